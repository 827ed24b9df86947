#include "kcmlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kcmlab/lapack.hpp"

namespace kcm {

namespace {

Eigen::MatrixXd to_dense(const SparseOperator& h) {
    const u64 d = h.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (u64 k = 0; k < h.val.size(); ++k) m(h.row[k], h.col[k]) += h.val[k];
    return m;
}

void apply_cx(const SparseOperator& h, const VectorXcd& in, VectorXcd& out) {
    const u64 d = h.dim();
    static thread_local std::vector<double> re, im, ore, oim;
    re.resize(d);
    im.resize(d);
    ore.resize(d);
    oim.resize(d);
    for (u64 i = 0; i < d; ++i) {
        re[i] = in[i].real();
        im[i] = in[i].imag();
    }
    apply_omp(h, re.data(), im.data(), ore.data(), oim.data());
    out.resize(d);
    for (u64 i = 0; i < d; ++i) out[i] = cxd(ore[i], oim[i]);
}

// One Lanczos exp(-i H dt) step with full reorthogonalization. The Krylov
// dimension grows until the standard a-posteriori estimate drops below tol.
VectorXcd krylov_step(const SparseOperator& h, const VectorXcd& psi, double dt,
                      const KrylovOptions& opts) {
    const double nrm = psi.norm();
    if (nrm == 0.0) return psi;
    const u64 d = h.dim();
    const int mmax = int(std::min<u64>(opts.max_dim, d));
    std::vector<VectorXcd> v;
    v.reserve(mmax + 1);
    v.push_back(psi / nrm);
    std::vector<double> alpha, beta;  // tridiagonal T
    VectorXcd w(d);

    auto expm_small = [&](int m, Eigen::VectorXcd& col0, double& err) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        Eigen::VectorXcd phase(m);
        for (int i = 0; i < m; ++i) phase[i] = std::exp(cxd(0.0, -dt * es.eigenvalues()[i]));
        col0 = es.eigenvectors() * (phase.asDiagonal() * es.eigenvectors().row(0).transpose());
        err = (m <= int(beta.size())) ? std::abs(beta[m - 1] * std::abs(col0[m - 1])) : 0.0;
    };

    Eigen::VectorXcd col0;
    int m = 0;
    while (true) {
        apply_cx(h, v[m], w);
        const double a = std::real(v[m].dot(w));
        alpha.push_back(a);
        w -= a * v[m];
        if (m > 0) w -= beta[m - 1] * v[m - 1];
        for (int r = 0; r <= m; ++r) w -= v[r].dot(w) * v[r];  // full reorth
        const double b = w.norm();
        ++m;
        if (b < 1e-14) {  // happy breakdown: the subspace is invariant
            double err;
            expm_small(m, col0, err);
            break;
        }
        beta.push_back(b);
        if (m >= 3 || m >= mmax) {
            double err;
            expm_small(m, col0, err);
            if (err < opts.step_tol || m >= mmax) {
                if (err >= opts.step_tol && m >= mmax)
                    throw std::runtime_error("Krylov step did not reach the requested tolerance");
                break;
            }
        }
        v.push_back(w / b);
    }
    VectorXcd out = VectorXcd::Zero(d);
    for (int i = 0; i < m; ++i) out += col0[i] * v[i];
    return nrm * out;
}

double diag_expectation(const SectorBasis& basis, const VectorXcd& psi, u64 mask) {
    double s = 0.0;
    for (u64 i = 0; i < basis.dim(); ++i)
        if ((basis.states[i] & mask) == mask) s += std::norm(psi[i]);
    return s;
}

void record_point(const SparseOperator& h, const VectorXcd& psi0, const VectorXcd& psi,
                  const std::vector<TrackedObservable>& obs, double e0, QuenchTrace& trace) {
    trace.fidelity.push_back(std::norm(psi0.dot(psi)));
    for (u64 k = 0; k < obs.size(); ++k)
        trace.observables[k].push_back(diag_expectation(*h.basis, psi, obs[k].mask));
    trace.max_norm_drift = std::max(trace.max_norm_drift, std::abs(psi.norm() - 1.0));
    VectorXcd hp;
    apply_cx(h, psi, hp);
    trace.max_energy_drift = std::max(trace.max_energy_drift, std::abs(std::real(psi.dot(hp)) - e0));
}

} // namespace

QuenchTrace evolve(const SparseOperator& h, const VectorXcd& psi0,
                   const std::vector<double>& times, const std::vector<TrackedObservable>& obs,
                   const KrylovOptions& opts) {
    if (u64(psi0.size()) != h.dim()) throw std::invalid_argument("state dimension mismatch");
    if (times.empty() || times.front() != 0.0)
        throw std::invalid_argument("time grid must start at zero");
    QuenchTrace trace;
    trace.times = times;
    trace.observables.resize(obs.size());
    for (const auto& o : obs) trace.observable_names.push_back(o.name);

    VectorXcd hp;
    apply_cx(h, psi0, hp);
    const double e0 = std::real(psi0.dot(hp));

    VectorXcd psi = psi0;
    record_point(h, psi0, psi, obs, e0, trace);
    for (u64 t = 1; t < times.size(); ++t) {
        const double dt = times[t] - times[t - 1];
        if (dt <= 0.0) throw std::invalid_argument("time grid must be ascending");
        psi = krylov_step(h, psi, dt, opts);
        record_point(h, psi0, psi, obs, e0, trace);
    }
    return trace;
}

QuenchTrace evolve_dense(const SparseOperator& h, const VectorXcd& psi0,
                         const std::vector<double>& times,
                         const std::vector<TrackedObservable>& obs) {
    Eigen::MatrixXd m = to_dense(h);
    Eigen::VectorXd ev;
    sym_eig(m, ev, true);
    const Eigen::VectorXcd coeff = m.transpose() * psi0;

    QuenchTrace trace;
    trace.times = times;
    trace.observables.resize(obs.size());
    for (const auto& o : obs) trace.observable_names.push_back(o.name);
    VectorXcd hp;
    apply_cx(h, psi0, hp);
    const double e0 = std::real(psi0.dot(hp));
    for (double t : times) {
        Eigen::VectorXcd phase(ev.size());
        for (i64 i = 0; i < ev.size(); ++i) phase[i] = std::exp(cxd(0.0, -t * ev[i])) * coeff[i];
        const VectorXcd psi = m * phase;
        record_point(h, psi0, psi, obs, e0, trace);
    }
    return trace;
}

SpectrumReport spectrum(const SparseOperator& h) {
    SpectrumReport rep;
    Eigen::MatrixXd m = to_dense(h);
    sym_eig(m, rep.eigenvalues, false);
    const u64 d = rep.eigenvalues.size();
    rep.width = d ? rep.eigenvalues[d - 1] - rep.eigenvalues[0] : 0.0;
    const double thr = 1e-12 * rep.width;
    rep.cluster_id.resize(d);
    rep.gaps.resize(d > 0 ? d - 1 : 0);
    u32 cluster = 0;
    for (u64 i = 0; i < d; ++i) {
        if (i > 0) {
            rep.gaps[i - 1] = rep.eigenvalues[i] - rep.eigenvalues[i - 1];
            if (rep.gaps[i - 1] > thr) ++cluster;
        }
        rep.cluster_id[i] = cluster;
    }
    rep.cluster_count = d ? cluster + 1 : 0;
    rep.factorizable_flag.assign(d, 0);
    return rep;
}

void dense_eig(const SparseOperator& h, Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) {
    evecs = to_dense(h);
    sym_eig(evecs, evals, true);
}

LiftScanResult lifting_scan(const ModelSpec& model, int particles,
                            const std::vector<double>& epsilons) {
    auto basis = std::make_shared<SectorBasis>(enumerate_basis(model.geom, particles));
    const SparseOperator h0 = build_hamiltonian(model, basis);

    LiftScanResult out;
    out.n_zm = zero_mode_count(h0).count;
    const int L = model.geom.site_count();
    out.mismatch = mismatch_formula(L, particles, L / 2);

    Eigen::MatrixXd m0 = to_dense(h0);
    Eigen::VectorXd ev0;
    sym_eig(m0, ev0, false);
    // Delta: mean spacing of the 10% of nonzero levels closest to zero (the
    // zero-mode cluster itself can swallow any index-centered window)
    const u64 d = ev0.size();
    const double ztol = 1e-10 * std::max(std::abs(ev0[0]), std::abs(ev0[d - 1]));
    std::vector<double> magnitudes;
    for (u64 i = 0; i < d; ++i)
        if (std::abs(ev0[i]) > ztol) magnitudes.push_back(std::abs(ev0[i]));
    std::sort(magnitudes.begin(), magnitudes.end());
    if (magnitudes.size() < 2) throw std::runtime_error("too few nonzero eigenvalues for Delta");
    const u64 k = std::max<u64>(2, u64(0.1 * double(magnitudes.size())));
    out.delta = (magnitudes[k - 1] - magnitudes[0]) / double(k - 1);
    if (out.delta <= 0.0) out.delta = magnitudes[0];  // fully degenerate shell

    PerturbationSpec pert;
    pert.kind = PerturbationSpec::Kind::uncorrelated_hopping;
    for (double eps : epsilons) {
        Eigen::VectorXd ev;
        if (eps == 0.0) {
            ev = ev0;
        } else {
            pert.strength = eps;
            const SparseOperator dh = build_perturbation(pert, model, basis);
            const SparseOperator h = operator_sum(h0, dh);
            Eigen::MatrixXd m = to_dense(h);
            sym_eig(m, ev, false);
        }
        i64 count = 0;
        for (i64 i = 0; i < ev.size(); ++i)
            if (std::abs(ev[i]) <= out.delta) ++count;
        LiftScanRow row;
        row.epsilon = eps;
        row.epsilon_over_delta = eps / out.delta;
        row.n_near_zm = count;
        row.ratio = out.n_zm ? double(count) / double(out.n_zm) : 0.0;
        out.rows.push_back(row);
    }
    return out;
}

std::vector<DisorderScanRow> disorder_scan(const ModelSpec& model,
                                           std::shared_ptr<const SectorBasis> basis,
                                           const std::vector<double>& gs, u64 seed) {
    if (model.family != Family::east)
        throw std::domain_error("the tunneling-disorder scan is defined for the east family");
    std::vector<DisorderScanRow> rows;
    for (double g : gs) {
        SparseOperator h;
        if (g == 0.0) {
            h = build_hamiltonian(model, basis);
        } else {
            PerturbationSpec p;
            p.kind = PerturbationSpec::Kind::tunneling_disorder;
            p.strength = g;
            p.seed = seed;
            h = build_perturbation(p, model, basis);
        }
        ExactStructureOptions opts;
        opts.want_fs = false;
        const ExactStructureCounts c = exact_structure_counts(h, model, opts);
        rows.push_back({g, seed, c.n_zm, c.n_bs});
    }
    return rows;
}

namespace {

EntropyResult schmidt_entropy(const std::vector<std::pair<u64, double>>& amps, int cut) {
    // compact row/column indices over the occurring half-chain patterns
    std::vector<u64> lefts, rights;
    const u64 lmask = (u64(1) << cut) - 1;
    for (auto& [s, a] : amps) {
        lefts.push_back(s & lmask);
        rights.push_back(s >> cut);
    }
    std::sort(lefts.begin(), lefts.end());
    lefts.erase(std::unique(lefts.begin(), lefts.end()), lefts.end());
    std::sort(rights.begin(), rights.end());
    rights.erase(std::unique(rights.begin(), rights.end()), rights.end());

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lefts.size(), rights.size());
    for (auto& [s, a] : amps) {
        const u64 i = std::lower_bound(lefts.begin(), lefts.end(), s & lmask) - lefts.begin();
        const u64 j = std::lower_bound(rights.begin(), rights.end(), s >> cut) - rights.begin();
        m(i, j) += a;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    EntropyResult out;
    out.cut = cut;
    out.schmidt = svd.singularValues();
    double s = 0.0;
    for (i64 i = 0; i < out.schmidt.size(); ++i) {
        const double p = out.schmidt[i] * out.schmidt[i];
        if (p > 1e-15) s -= p * std::log(p);
    }
    out.entropy = s;
    return out;
}

} // namespace

EntropyResult entanglement_entropy(const StateVector& psi, int cut) {
    if (psi.geom.kind != Geometry::Kind::chain) throw std::domain_error("entropy cuts are 1D");
    if (cut < 1 || cut >= psi.geom.site_count()) throw std::domain_error("cut outside the chain");
    std::vector<std::pair<u64, double>> amps(psi.amp.begin(), psi.amp.end());
    return schmidt_entropy(amps, cut);
}

EntropyResult entanglement_entropy(const SectorBasis& basis, const Eigen::VectorXd& psi, int cut) {
    if (basis.geom.kind != Geometry::Kind::chain) throw std::domain_error("entropy cuts are 1D");
    if (cut < 1 || cut >= basis.geom.site_count()) throw std::domain_error("cut outside the chain");
    std::vector<std::pair<u64, double>> amps;
    for (u64 i = 0; i < basis.dim(); ++i)
        if (psi[i] != 0.0) amps.push_back({basis.states[i], psi[i]});
    return schmidt_entropy(amps, cut);
}

std::vector<u64> random_sector_states(const SectorBasis& basis, int count, u64 seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<u64> pick(0, basis.dim() - 1);
    std::vector<u64> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(basis.states[pick(gen)]);
    return out;
}

} // namespace kcm
