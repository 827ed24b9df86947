// Compares the OpenMP kernels against their serial reference implementations
// (operator assembly and matvec), and optionally times the exact prime-field
// structure pass used by the table workflows.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <random>

#include "kcmlab/chiral.hpp"
#include "kcmlab/zeromode.hpp"

using namespace kcm;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kcmlab kernel benchmarks"};
    std::string model = "east";
    int range = 2;
    int particles = 7;
    int repeats = 20;
    bool probe_exact = false;
    int agree = 1;
    app.add_option("--model", model, "east | east_west");
    app.add_option("--range", range, "kinetic constraint range");
    app.add_option("--particles", particles, "particle number (L = (r+1)N - r)");
    app.add_option("--repeats", repeats, "matvec repetitions");
    app.add_flag("--exact-probe", probe_exact, "time the prime-field structure pass");
    app.add_option("--agree", agree, "required prime agreement");
    CLI11_PARSE(app, argc, argv);

    const int L = (range + 1) * particles - range;
    const ModelSpec spec = model == "east" ? ModelSpec::east(range, Geometry::chain(L))
                                           : ModelSpec::east_west(range, Geometry::chain(L));
    auto t0 = clock_type::now();
    auto sector = std::make_shared<SectorBasis>(
        largest_sector_from_seed(spec, domain_wall_seed(spec.geom, particles)));
    std::printf("sector: D=%llu   (%.3f s)\n", (unsigned long long)sector->dim(), seconds_since(t0));

    t0 = clock_type::now();
    const SparseOperator h_serial = build_hamiltonian(spec, sector, false);
    const double t_build_serial = seconds_since(t0);
    t0 = clock_type::now();
    const SparseOperator h = build_hamiltonian(spec, sector, true);
    const double t_build_omp = seconds_since(t0);
    if (h.row != h_serial.row || h.col != h_serial.col || h.val != h_serial.val) {
        std::fprintf(stderr, "parallel assembly differs from the serial reference\n");
        return 1;
    }
    std::printf("assemble: nnz=%llu  serial %.3f s  omp %.3f s  speedup %.2fx\n",
                (unsigned long long)h.nnz(), t_build_serial, t_build_omp,
                t_build_serial / t_build_omp);

    std::mt19937_64 gen(1);
    std::vector<double> x(h.dim()), y1(h.dim()), y2(h.dim());
    for (auto& v : x) v = std::uniform_real_distribution<double>(-1, 1)(gen);
    t0 = clock_type::now();
    for (int k = 0; k < repeats; ++k) apply_serial(h, x.data(), y1.data());
    const double t_mv_serial = seconds_since(t0) / repeats;
    t0 = clock_type::now();
    for (int k = 0; k < repeats; ++k) apply_omp(h, x.data(), y2.data());
    const double t_mv_omp = seconds_since(t0) / repeats;
    if (y1 != y2) {
        std::fprintf(stderr, "parallel matvec differs from the serial reference\n");
        return 1;
    }
    std::printf("matvec:   serial %.6f s  omp %.6f s  speedup %.2fx\n", t_mv_serial, t_mv_omp,
                t_mv_serial / t_mv_omp);

    if (probe_exact) {
        t0 = clock_type::now();
        ExactStructureOptions opts;
        opts.required_agreement = agree;
        opts.max_primes = agree + 2;
        const auto counts = exact_structure_counts(h, spec, opts);
        std::printf("exact pass (1 prime): n_zm=%lld n_bs=%lld n_fs=%lld   (%.3f s)\n",
                    (long long)counts.n_zm, (long long)counts.n_bs, (long long)counts.n_fs,
                    seconds_since(t0));
        long long sum = 0;
        std::printf("window dims:");
        for (i64 wd : counts.window_dims) {
            std::printf(" %lld", (long long)wd);
            sum += wd;
        }
        std::printf("   sum=%lld\n", sum);
    }
    return 0;
}
