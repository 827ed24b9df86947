// kcmlab: exact-diagonalization workflows for kinetically constrained,
// particle-conserving lattice models. Every task writes plot-ready CSV/JSON
// plus a provenance sidecar; integer outputs are exact and reproducible from
// the emitted config.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kcmlab/dynamics.hpp"
#include "kcmlab/io.hpp"

using namespace kcm;
using nlohmann::json;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string model = "east";
    int range = 2;
    std::string couplings;  // comma separated, defaults to ones
    int sites = 0;
    int lx = 0, ly = 0;
    int particles = -1;
    std::string seed_state;
    std::string sector = "largest";  // largest | full | seed
    u64 rng_seed = 1;
    double tolerance_kernel = 1e-10;
    std::string times = "40:0.05";
    std::string epsilon_list = "0";
    std::string g_list = "0";
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "key = value config file; flags override");
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--model", a.model, "east | east_west | north_east | pair_flip");
    cmd->add_option("--range", a.range, "kinetic constraint range r");
    cmd->add_option("--couplings", a.couplings, "comma-separated t_1..t_r (default all 1)");
    cmd->add_option("--sites", a.sites, "chain length L");
    cmd->add_option("--lx", a.lx, "rectangle width");
    cmd->add_option("--ly", a.ly, "rectangle height");
    cmd->add_option("--particles", a.particles, "particle number N");
    cmd->add_option("--seed-state", a.seed_state, "sector seed as a 0/1 string (rows joined by /)");
    cmd->add_option("--sector", a.sector, "largest | full | seed");
    cmd->add_option("--rng-seed", a.rng_seed, "seed for disorder and sampling");
    cmd->add_option("--tolerance-kernel", a.tolerance_kernel, "numeric kernel tolerance");
    cmd->add_option("--times", a.times, "time grid as t_max:dt");
    cmd->add_option("--epsilon", a.epsilon_list, "comma-separated uncorrelated-hopping strengths");
    cmd->add_option("--g", a.g_list, "comma-separated tunneling-disorder strengths");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string tok;
    std::istringstream in(text);
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<double> parse_times(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("--times wants t_max:dt");
    const double t_max = std::stod(text.substr(0, colon));
    const double dt = std::stod(text.substr(colon + 1));
    if (t_max <= 0 || dt <= 0) throw std::invalid_argument("--times wants positive t_max and dt");
    std::vector<double> t;
    for (double x = 0.0; x <= t_max + 1e-12; x += dt) t.push_back(x);
    return t;
}

// effective config = file values overridden by explicit flags
RunConfig effective_config(const CLI::App* cmd, const CommonArgs& a, const std::string& task) {
    RunConfig cfg;
    if (!a.config_path.empty()) cfg = RunConfig::from_file(a.config_path);
    cfg.set("task", task);
    auto maybe = [&](const std::string& flag, const std::string& key, const std::string& value) {
        if (cmd->count(flag) || !cfg.has(key)) cfg.set(key, value);
    };
    maybe("--model", "model", a.model);
    maybe("--range", "range", std::to_string(a.range));
    maybe("--couplings", "couplings", a.couplings);
    maybe("--sites", "sites", std::to_string(a.sites));
    maybe("--lx", "lx", std::to_string(a.lx));
    maybe("--ly", "ly", std::to_string(a.ly));
    maybe("--particles", "particles", std::to_string(a.particles));
    maybe("--seed-state", "seed_state", a.seed_state);
    maybe("--sector", "sector", a.sector);
    maybe("--rng-seed", "rng_seed", std::to_string(a.rng_seed));
    maybe("--tolerance-kernel", "tolerance_kernel", format_number(a.tolerance_kernel));
    maybe("--times", "times", a.times);
    maybe("--epsilon", "epsilon", a.epsilon_list);
    maybe("--g", "g", a.g_list);
    return cfg;
}

Geometry geometry_from(const RunConfig& cfg) {
    const std::string model = cfg.get("model");
    if (model == "north_east") {
        const int lx = std::stoi(cfg.get("lx", "0")), ly = std::stoi(cfg.get("ly", "0"));
        if (lx < 1 || ly < 1) throw std::domain_error("north_east needs --lx and --ly");
        return Geometry::rectangle(lx, ly);
    }
    int sites = std::stoi(cfg.get("sites", "0"));
    if (sites == 0) {
        const int n = std::stoi(cfg.get("particles", "-1"));
        const int r = std::stoi(cfg.get("range", "1"));
        if (n > 0 && (model == "east" || model == "east_west")) sites = (r + 1) * n - r;
    }
    if (sites < 1) throw std::domain_error("chain length missing: give --sites or --particles");
    return Geometry::chain(sites);
}

ModelSpec model_from(const RunConfig& cfg) {
    const std::string name = cfg.get("model");
    const Geometry geom = geometry_from(cfg);
    ModelSpec spec;
    if (name == "east")
        spec = ModelSpec::east(std::stoi(cfg.get("range", "1")), geom);
    else if (name == "east_west")
        spec = ModelSpec::east_west(std::stoi(cfg.get("range", "1")), geom);
    else if (name == "north_east")
        spec = ModelSpec::north_east(geom);
    else if (name == "pair_flip")
        spec = ModelSpec::pair_flip(geom);
    else
        throw std::domain_error("unknown model: " + name);
    const std::string couplings = cfg.get("couplings");
    if (!couplings.empty()) {
        spec.couplings = parse_list(couplings);
        spec.validate();
    }
    return spec;
}

// basis per the sector mode: the full fixed-N space, the component grown from
// an explicit seed, or the largest sector (domain-wall seed for east-type
// models, all-filled seed for pair_flip)
std::shared_ptr<const SectorBasis> basis_from(const RunConfig& cfg, const ModelSpec& spec) {
    const std::string mode = cfg.get("sector", "largest");
    const int n = std::stoi(cfg.get("particles", "-1"));
    if (mode == "full") {
        if (spec.family == Family::pair_flip)
            return std::make_shared<SectorBasis>(enumerate_basis(spec.geom, std::nullopt));
        if (n < 0) throw std::domain_error("--particles required for a full fixed-N basis");
        return std::make_shared<SectorBasis>(enumerate_basis(spec.geom, n));
    }
    u64 seed;
    const std::string seed_str = cfg.get("seed_state");
    if (mode == "seed" || !seed_str.empty()) {
        if (seed_str.empty()) throw std::domain_error("--seed-state required with --sector seed");
        seed = state_from_string(seed_str, spec.geom);
    } else if (spec.family == Family::pair_flip) {
        seed = (u64(1) << spec.geom.site_count()) - 1;  // all filled maximizes flips
    } else {
        if (n < 0) throw std::domain_error("--particles required to build the largest sector");
        seed = domain_wall_seed(spec.geom, n);
    }
    return std::make_shared<SectorBasis>(largest_sector_from_seed(spec, seed));
}

struct TaskIO {
    RunConfig cfg;
    fs::path dir;
    std::map<std::string, double> timings;
    clock_type::time_point started = clock_type::now();

    explicit TaskIO(const RunConfig& c, const std::string& out_dir) : cfg(c), dir(out_dir) {
        fs::create_directories(dir);
    }
    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) const {
        write_csv((dir / name).string(), cfg.hash(), header, rows);
    }
    void dump(const std::string& name, json j) const {
        j["config_hash"] = cfg.hash();
        std::ofstream out(dir / name);
        out << j.dump(2) << "\n";
    }
    void finish() {
        timings["total_s"] =
            std::chrono::duration<double>(clock_type::now() - started).count();
        write_provenance((dir / "provenance.json").string(), cfg, timings);
    }
};

json certificate_json(const BoundStateCertificate& cert) {
    json residuals = json::array();
    for (auto& [n, m, r] : cert.residuals)
        residuals.push_back({{"left_units", n}, {"right_units", m}, {"residual", r}});
    return {{"bound", cert.bound},
            {"left_bound", cert.left_bound},
            {"right_bound", cert.right_bound},
            {"analytic_left", cert.analytic_left},
            {"q_max", cert.q_max},
            {"energy", cert.energy},
            {"tolerance", cert.tolerance},
            {"residuals", residuals}};
}

json amplitudes_json(const SectorBasis& basis, const Eigen::VectorXd& v, double cutoff = 1e-14) {
    json out = json::array();
    for (u64 i = 0; i < basis.dim(); ++i)
        if (std::abs(v[i]) > cutoff)
            out.push_back({state_to_string(basis.states[i], basis.geom), v[i], 0.0});
    return out;
}

// ---------------------------------------------------------------- tasks ---

int task_enumerate(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const Geometry geom = geometry_from(cfg);
    const int n = std::stoi(cfg.get("particles", "-1"));
    const auto basis =
        enumerate_basis(geom, n >= 0 ? std::optional<int>(n) : std::nullopt);
    std::vector<std::vector<std::string>> rows;
    for (u64 i = 0; i < basis.dim(); ++i)
        rows.push_back({std::to_string(i), state_to_string(basis.states[i], geom)});
    io.csv("enumerate.csv", {"index", "state"}, rows);
    io.dump("enumerate.json", {{"dimension", basis.dim()}});
    io.finish();
    return 0;
}

int task_fragment(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    std::shared_ptr<const SectorBasis> basis;
    if (spec.family == Family::pair_flip)
        basis = std::make_shared<SectorBasis>(enumerate_basis(spec.geom, std::nullopt));
    else
        basis = std::make_shared<SectorBasis>(
            enumerate_basis(spec.geom, std::stoi(cfg.get("particles"))));
    const auto h = build_hamiltonian(spec, basis);
    const auto rep = connected_components(h);
    std::vector<std::vector<std::string>> rows;
    for (u64 i = 0; i < basis->dim(); ++i)
        rows.push_back({state_to_string(basis->states[i], spec.geom),
                        std::to_string(rep.sector_of[i])});
    io.csv("fragment.csv", {"state", "sector_id"}, rows);

    const auto largest = sector_basis(*basis, rep, rep.largest_id);
    io.dump("fragment.json", {{"sizes", rep.sizes_desc},
                              {"frozen_count", rep.frozen_count},
                              {"sector_count", rep.sector_count},
                              {"largest_seed", state_to_string(largest.states[0], spec.geom)}});
    io.finish();
    return 0;
}

int task_mismatch(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec base = model_from(cfg);
    const int n = std::stoi(cfg.get("particles"));
    const int L = base.geom.site_count();
    auto basis = std::make_shared<SectorBasis>(enumerate_basis(base.geom, n));
    const auto h = build_hamiltonian(base, basis);
    const auto coloring = color(*basis, default_parity_op(base));
    const auto rep = connected_components(h);
    const auto mm = fragmented_mismatch(coloring, rep);
    const i64 n_zm = zero_mode_count(h).count;
    std::vector<std::vector<std::string>> rows = {
        {std::to_string(n), std::to_string(L), std::to_string(mm.mismatch),
         std::to_string(mm.mismatch_frag), std::to_string(n_zm), cfg.get("model")}};
    io.csv("mismatch.csv", {"N", "L", "M", "M_frag", "N_ZM", "model"}, rows);
    io.dump("mismatch.json",
            {{"M", mm.mismatch},
             {"M_frag", mm.mismatch_frag},
             {"flipped_sectors", mm.flipped},
             {"formula_M", mismatch_formula(L, n, L / 2)}});
    io.finish();
    return 0;
}

int task_count_zm(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto basis = basis_from(cfg, spec);
    const auto h = build_hamiltonian(spec, basis);
    const auto zc = zero_mode_count(h);
    io.dump("count_zm.json", {{"dimension", h.dim()},
                              {"n_zm", zc.count},
                              {"exact", zc.exact},
                              {"numeric_checked", zc.numeric},
                              {"primes", zc.primes_used}});
    io.finish();
    return 0;
}

int task_bound_states(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto basis = basis_from(cfg, spec);
    const auto h = build_hamiltonian(spec, basis);
    const auto zm = zero_mode_basis(h);
    const auto search = find_bound_states(zm, ObservableSpec::boundary_for(spec), spec);
    json states = json::array();
    for (i64 j = 0; j < search.vectors.cols(); ++j)
        states.push_back({{"amplitudes", amplitudes_json(*basis, search.vectors.col(j))},
                          {"certificate", certificate_json(search.certificates[j])}});
    io.dump("bound_states.json", {{"model", cfg.get("model")},
                                  {"sector_seed", state_to_string(basis->states[0], spec.geom)},
                                  {"n_zm", zm.count()},
                                  {"n_bs", search.vectors.cols()},
                                  {"states", states}});
    io.finish();
    return 0;
}

int task_factorizable(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto basis = basis_from(cfg, spec);
    const auto h = build_hamiltonian(spec, basis);
    if (h.dim() <= 4000) {
        const auto zm = zero_mode_basis(h);
        const auto fs = find_factorizable(zm, spec);
        const auto exact = exact_structure_counts(h, spec);
        if (exact.n_fs != fs.count)
            throw std::runtime_error("exact and dense factorizable counts disagree");
        io.dump("factorizable.json", {{"n_zm", zm.count()},
                                      {"n_fs", fs.count},
                                      {"ratio", fs.ratio},
                                      {"window_dims", fs.window_dims},
                                      {"route", "dense+exact"}});
    } else {
        const auto exact = exact_structure_counts(h, spec);
        io.dump("factorizable.json",
                {{"n_zm", exact.n_zm},
                 {"n_fs", exact.n_fs},
                 {"ratio", exact.n_zm ? double(exact.n_fs) / double(exact.n_zm) : 0.0},
                 {"window_dims", exact.window_dims},
                 {"route", "exact"}});
    }
    io.finish();
    return 0;
}

int task_mpo_state(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const int r = std::stoi(cfg.get("range"));
    const int n = std::stoi(cfg.get("particles"));
    const StateVector v = east_west_mpo_state(r, n);
    const double residual = eigen_residual(v, ModelSpec::east_west(r, v.geom), 0.0);
    json amp = json::array();
    for (auto& [bits, a] : v.amp)
        amp.push_back({state_to_string(bits, v.geom), a, 0.0});
    io.dump("mpo_state.json", {{"range", r},
                               {"particles", n},
                               {"sites", v.geom.site_count()},
                               {"amplitudes", amp},
                               {"residual", residual}});
    io.finish();
    return 0;
}

int task_spectrum(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto basis = basis_from(cfg, spec);
    const auto h = build_hamiltonian(spec, basis);
    const auto rep = spectrum(h);
    std::vector<std::vector<std::string>> rows;
    for (i64 i = 0; i < rep.eigenvalues.size(); ++i)
        rows.push_back({std::to_string(i), format_number(rep.eigenvalues[i]),
                        i + 1 < rep.eigenvalues.size() ? format_number(rep.gaps[i]) : "",
                        std::to_string(rep.cluster_id[i]),
                        std::to_string(int(rep.factorizable_flag[i]))});
    io.csv("spectrum.csv", {"i", "E_i", "gap_i", "cluster_id", "factorizable_flag"}, rows);
    io.dump("spectrum.json",
            {{"dimension", h.dim()}, {"clusters", rep.cluster_count}, {"width", rep.width}});
    io.finish();
    return 0;
}

int task_quench(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const std::string initial = cfg.get("initial_state");
    if (initial.empty()) throw std::domain_error("--initial-state required");
    const u64 seed_bits = state_from_string(initial, spec.geom);
    const double eps = parse_list(cfg.get("epsilon", "0")).front();

    std::shared_ptr<const SectorBasis> basis;
    if (eps > 0.0 || cfg.get("sector") == "full") {
        basis = std::make_shared<SectorBasis>(
            enumerate_basis(spec.geom, popcount(seed_bits)));
    } else {
        basis = std::make_shared<SectorBasis>(largest_sector_from_seed(spec, seed_bits));
    }
    SparseOperator h = build_hamiltonian(spec, basis);
    if (eps > 0.0) {
        PerturbationSpec p;
        p.kind = PerturbationSpec::Kind::uncorrelated_hopping;
        p.strength = eps;
        h = operator_sum(h, build_perturbation(p, spec, basis));
    }

    std::vector<TrackedObservable> tracked;
    {
        std::string names = cfg.get("observe");
        std::istringstream in(names);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (tok.empty()) continue;
            TrackedObservable t;
            t.name = tok;
            // n<k> for chains, n_<x>_<y> for rectangles
            if (tok.rfind("n_", 0) == 0) {
                const auto us = tok.find('_', 2);
                const int x = std::stoi(tok.substr(2, us - 2));
                const int y = std::stoi(tok.substr(us + 1));
                t.mask = u64(1) << spec.geom.bit(x, y);
            } else {
                t.mask = u64(1) << spec.geom.bit(std::stoi(tok.substr(1)));
            }
            tracked.push_back(t);
        }
    }

    VectorXcd psi0 = VectorXcd::Zero(basis->dim());
    const auto idx = basis->lookup(seed_bits);
    if (!idx) throw std::domain_error("initial state outside the basis");
    psi0[*idx] = 1.0;

    const auto times = parse_times(cfg.get("times", "40:0.05"));
    const auto trace = evolve(h, psi0, times, tracked);

    std::vector<std::string> header = {"t", "fidelity"};
    for (const auto& name : trace.observable_names) header.push_back(name);
    std::vector<std::vector<std::string>> rows;
    for (u64 k = 0; k < times.size(); ++k) {
        std::vector<std::string> row = {format_number(times[k]), format_number(trace.fidelity[k])};
        for (const auto& series : trace.observables) row.push_back(format_number(series[k]));
        rows.push_back(row);
    }
    io.csv("quench.csv", header, rows);
    io.dump("quench.json", {{"dimension", basis->dim()},
                            {"epsilon", eps},
                            {"max_norm_drift", trace.max_norm_drift},
                            {"max_energy_drift", trace.max_energy_drift}});
    io.finish();
    return 0;
}

int task_lift_scan(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto eps = parse_list(cfg.get("epsilon", "0"));
    const auto scan = lifting_scan(spec, std::stoi(cfg.get("particles")), eps);
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : scan.rows)
        rows.push_back({format_number(row.epsilon), format_number(row.epsilon_over_delta),
                        std::to_string(row.n_near_zm), format_number(row.ratio)});
    io.csv("lift_scan.csv", {"epsilon", "eps_over_delta", "n_near_zm", "ratio"}, rows);
    io.dump("lift_scan.json",
            {{"delta", scan.delta}, {"n_zm", scan.n_zm}, {"mismatch", scan.mismatch}});
    io.finish();
    return 0;
}

int task_disorder_scan(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    const ModelSpec spec = model_from(cfg);
    const auto basis = basis_from(cfg, spec);
    const auto gs = parse_list(cfg.get("g", "0"));
    const u64 seed = std::stoull(cfg.get("rng_seed", "1"));
    const auto rows = disorder_scan(spec, basis, gs, seed);
    std::vector<std::vector<std::string>> out;
    for (const auto& row : rows)
        out.push_back({format_number(row.g), std::to_string(row.seed),
                       std::to_string(row.n_zm), std::to_string(row.n_bs)});
    io.csv("disorder_scan.csv", {"g", "seed", "n_zm", "n_bs"}, out);
    io.finish();
    return 0;
}

int task_entropy(const RunConfig& cfg, const std::string& out_dir) {
    TaskIO io(cfg, out_dir);
    StateVector psi;
    const std::string state_file = cfg.get("state_file");
    if (!state_file.empty()) {
        std::ifstream in(state_file);
        if (!in) throw std::domain_error("cannot open " + state_file);
        json j;
        in >> j;
        const int sites = j.at("sites").get<int>();
        psi.geom = Geometry::chain(sites);
        for (const auto& entry : j.at("amplitudes"))
            psi.amp[state_from_string(entry[0].get<std::string>(), psi.geom)] =
                entry[1].get<double>();
    } else {
        psi = east_west_mpo_state(std::stoi(cfg.get("range")), std::stoi(cfg.get("particles")));
    }
    std::vector<std::vector<std::string>> rows;
    for (int cut = 1; cut < psi.geom.site_count(); ++cut) {
        const auto res = entanglement_entropy(psi, cut);
        rows.push_back({std::to_string(cut), format_number(res.entropy)});
    }
    io.csv("entropy.csv", {"cut", "entropy"}, rows);
    io.finish();
    return 0;
}

int task_reproduce_table(const RunConfig& cfg, const std::string& out_dir,
                         const std::string& which) {
    TaskIO io(cfg, out_dir);
    const int cap = std::stoi(cfg.get("max_particles", "99"));
    std::vector<std::vector<std::string>> rows;
    if (which == "east") {
        const int max_n[4] = {0, 10, 9, 8};
        for (int r = 1; r <= 3; ++r) {
            for (int n = 2; n <= std::min(cap, max_n[r]); ++n) {
                const int L = (r + 1) * n - r;
                const ModelSpec spec = ModelSpec::east(r, Geometry::chain(L));
                auto sector = std::make_shared<SectorBasis>(
                    largest_sector_from_seed(spec, domain_wall_seed(spec.geom, n)));
                const auto h = build_hamiltonian(spec, sector);
                const auto coloring = color(*sector, ParityOp::sublattice_even);
                const i64 m_sector = std::abs(i64(coloring.n_even) - i64(coloring.n_odd));
                ExactStructureOptions opts;
                opts.want_bs = false;
                const auto counts = exact_structure_counts(h, spec, opts);
                rows.push_back({std::to_string(r), std::to_string(n), std::to_string(L),
                                std::to_string(m_sector), std::to_string(counts.n_zm),
                                std::to_string(counts.n_fs)});
                std::printf("east r=%d N=%d: L=%d M=%lld N_ZM=%lld N_FS=%lld\n", r, n, L,
                            (long long)m_sector, (long long)counts.n_zm, (long long)counts.n_fs);
                std::fflush(stdout);
            }
        }
        io.csv("table_east.csv", {"r", "N", "L", "M", "N_ZM", "N_FS"}, rows);
    } else if (which == "eastwest") {
        for (int n = 4; n <= std::min(cap, 6); ++n) {
            for (int L = 10; L <= 17; ++L) {
                const ModelSpec spec = ModelSpec::east_west(2, Geometry::chain(L));
                auto full = std::make_shared<SectorBasis>(enumerate_basis(spec.geom, n));
                const auto h_full = build_hamiltonian(spec, full);
                const auto rep = connected_components(h_full);
                auto sector =
                    std::make_shared<SectorBasis>(sector_basis(*full, rep, rep.largest_id));
                const auto h = build_hamiltonian(spec, sector);
                const auto coloring = color(*sector, ParityOp::sublattice_even);
                const i64 m_sector = std::abs(i64(coloring.n_even) - i64(coloring.n_odd));
                const auto counts = exact_structure_counts(h, spec);
                rows.push_back({std::to_string(n), std::to_string(L), std::to_string(m_sector),
                                std::to_string(counts.n_zm), std::to_string(counts.n_bs),
                                std::to_string(counts.n_fs)});
                std::printf("east-west N=%d L=%d: M=%lld N_ZM=%lld N_BS=%lld N_FS=%lld\n", n, L,
                            (long long)m_sector, (long long)counts.n_zm, (long long)counts.n_bs,
                            (long long)counts.n_fs);
                std::fflush(stdout);
            }
        }
        io.csv("table_eastwest.csv", {"N", "L", "M", "N_ZM", "N_BS", "N_FS"}, rows);
    } else {
        throw std::domain_error("reproduce-table wants east or eastwest");
    }
    io.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("KCMLAB_THREADS")) {
#ifdef _OPENMP
        omp_set_num_threads(std::max(1, std::atoi(threads)));
#endif
    }

    CLI::App app{"kcmlab: zero modes, fragmentation and bound states in constrained models"};
    app.require_subcommand(1);

    CommonArgs a;
    std::string initial_state, observe, state_file, table_which;
    int max_particles = 99;

    auto* c_enumerate = app.add_subcommand("enumerate", "enumerate a basis");
    auto* c_fragment = app.add_subcommand("fragment", "connected-component split");
    auto* c_mismatch = app.add_subcommand("mismatch", "chiral mismatch and zero-mode count");
    auto* c_count = app.add_subcommand("count-zm", "dim ker H, exact with numeric cross-check");
    auto* c_bound = app.add_subcommand("bound-states", "bound states in the kernel subspace");
    auto* c_fact = app.add_subcommand("factorizable", "factorizable kernel states");
    auto* c_mpo = app.add_subcommand("mpo-state", "east-west MPO kernel state");
    auto* c_spec = app.add_subcommand("spectrum", "dense spectrum with degeneracy clusters");
    auto* c_quench = app.add_subcommand("quench", "real-time evolution of a product state");
    auto* c_lift = app.add_subcommand("lift-scan", "kernel degeneracy lifting scan");
    auto* c_dis = app.add_subcommand("disorder-scan", "tunneling-disorder robustness scan");
    auto* c_ent = app.add_subcommand("entropy", "entanglement entropy across all cuts");
    auto* c_table = app.add_subcommand("reproduce-table", "reference tables (east | eastwest)");

    for (CLI::App* cmd : {c_enumerate, c_fragment, c_mismatch, c_count, c_bound, c_fact, c_mpo,
                          c_spec, c_quench, c_lift, c_dis, c_ent, c_table})
        add_common(cmd, a);
    c_quench->add_option("--initial-state", initial_state, "product state string");
    c_quench->add_option("--observe", observe, "comma list: n9 or n_2_2");
    c_ent->add_option("--state-file", state_file, "amplitude JSON ({sites, amplitudes})");
    c_table->add_option("which", table_which, "east | eastwest")->required();
    c_table->add_option("--max-particles", max_particles, "cap the table rows");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        RunConfig cfg = effective_config(active, a, active->get_name());
        if (active == c_quench) {
            if (!initial_state.empty()) cfg.set("initial_state", initial_state);
            if (!observe.empty()) cfg.set("observe", observe);
        }
        if (active == c_ent && !state_file.empty()) cfg.set("state_file", state_file);
        if (active == c_table) {
            cfg.set("table", table_which);
            cfg.set("max_particles", std::to_string(max_particles));
        }

        if (active == c_enumerate) return task_enumerate(cfg, a.out_dir);
        if (active == c_fragment) return task_fragment(cfg, a.out_dir);
        if (active == c_mismatch) return task_mismatch(cfg, a.out_dir);
        if (active == c_count) return task_count_zm(cfg, a.out_dir);
        if (active == c_bound) return task_bound_states(cfg, a.out_dir);
        if (active == c_fact) return task_factorizable(cfg, a.out_dir);
        if (active == c_mpo) return task_mpo_state(cfg, a.out_dir);
        if (active == c_spec) return task_spectrum(cfg, a.out_dir);
        if (active == c_quench) return task_quench(cfg, a.out_dir);
        if (active == c_lift) return task_lift_scan(cfg, a.out_dir);
        if (active == c_dis) return task_disorder_scan(cfg, a.out_dir);
        if (active == c_ent) return task_entropy(cfg, a.out_dir);
        if (active == c_table) return task_reproduce_table(cfg, a.out_dir, table_which);
    } catch (const std::domain_error& e) {
        std::cout << nlohmann::json{{"error", e.what()}, {"kind", "domain"}}.dump() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cout << nlohmann::json{{"error", e.what()}, {"kind", "domain"}}.dump() << "\n";
        return 1;
    } catch (const std::length_error& e) {
        std::cout << nlohmann::json{{"error", e.what()}, {"kind", "capacity"}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cout << nlohmann::json{{"error", e.what()}, {"kind", "internal_check"}}.dump() << "\n";
        return 2;
    }
    return 0;
}
