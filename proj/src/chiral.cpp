#include "kcmlab/chiral.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "kcmlab/gfp.hpp"

namespace kcm {

ParityOp default_parity_op(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::pair_flip: return ParityOp::pairflip_phase;
        case Family::north_east: return ParityOp::checkerboard;
        default: return ParityOp::sublattice_even;
    }
}

namespace {

u64 sublattice_mask(const Geometry& geom, ParityOp op) {
    u64 mask = 0;
    if (geom.kind == Geometry::Kind::chain) {
        const int start = (op == ParityOp::sublattice_even) ? 2 : 1;
        for (int site = start; site <= geom.site_count(); site += 2)
            mask |= u64(1) << geom.bit(site);
    } else {
        for (int y = 1; y <= geom.ly; ++y)
            for (int x = 1; x <= geom.lx; ++x)
                if ((x + y) % 2 == 0) mask |= u64(1) << geom.bit(x, y);
    }
    return mask;
}

} // namespace

u8 state_parity(u64 bits, const Geometry& geom, ParityOp op) {
    if (op == ParityOp::pairflip_phase) {
        const u64 n = popcount(bits);
        return u8((n * (n - 1) / 2) & 1);
    }
    return u8(popcount(bits & sublattice_mask(geom, op)) & 1);
}

ChiralColoring color(const SectorBasis& basis, ParityOp op) {
    ChiralColoring out;
    out.op = op;
    out.parity.resize(basis.dim());
    u64 mask = (op == ParityOp::pairflip_phase) ? 0 : sublattice_mask(basis.geom, op);
    for (u64 i = 0; i < basis.dim(); ++i) {
        u8 par;
        if (op == ParityOp::pairflip_phase) {
            const u64 n = popcount(basis.states[i]);
            par = u8((n * (n - 1) / 2) & 1);
        } else {
            par = u8(popcount(basis.states[i] & mask) & 1);
        }
        out.parity[i] = par;
        (par ? out.n_odd : out.n_even)++;
    }
    return out;
}

std::vector<double> chiral_diagonal(const ChiralColoring& coloring) {
    std::vector<double> d(coloring.parity.size());
    for (u64 i = 0; i < d.size(); ++i) d[i] = coloring.parity[i] ? -1.0 : 1.0;
    return d;
}

i64 mismatch_formula(int L, int N, int L_A) {
    if (N < 0 || N > L || L_A < 0 || L_A > L) throw std::domain_error("mismatch arguments out of range");
    const int lo = std::max(0, N - (L - L_A));
    const int hi = std::min(N, L_A);
    i128 sum = 0;
    for (int n = lo; n <= hi; ++n) {
        const i128 term = i128(binomial(L_A, n)) * i128(binomial(L - L_A, N - n));
        sum += (n & 1) ? -term : term;
    }
    if (sum < 0) sum = -sum;
    if (sum > i128(INT64_MAX)) throw std::overflow_error("mismatch exceeds 64 bits");
    return i64(sum);
}

i64 mismatch_closed_form(int N) {
    if (N < 2) throw std::domain_error("closed form needs N >= 2");
    if (N % 2 == 0) return 2 * i64(binomial(3 * N / 2 - 1, N));
    return 3 * i64(binomial((3 * N - 5) / 2, N - 1));
}

double mismatch_asymptote(int N) {
    return std::pow(2.0, 1.0 - N) * std::pow(3.0, 1.5 * N) / std::sqrt(6.0 * M_PI * N);
}

MismatchReport fragmented_mismatch(const ChiralColoring& coloring,
                                   const FragmentationReport& report) {
    MismatchReport out;
    std::vector<i64> delta(report.sector_count, 0);  // N_e - N_o per sector
    for (u64 i = 0; i < coloring.parity.size(); ++i)
        delta[report.sector_of[i]] += coloring.parity[i] ? -1 : 1;
    i64 total = 0;
    out.per_sector.resize(report.sector_count);
    for (u32 s = 0; s < report.sector_count; ++s) {
        total += delta[s];
        out.per_sector[s] = std::abs(delta[s]);
        out.mismatch_frag += out.per_sector[s];
    }
    out.mismatch = std::abs(total);
    const int global_sign = total >= 0 ? 1 : -1;  // even majority on a tie
    for (u32 s = 0; s < report.sector_count; ++s)
        if (delta[s] != 0 && (delta[s] > 0 ? 1 : -1) != global_sign) out.flipped.push_back(s);
    return out;
}

namespace {

i64 numeric_kernel_count(const SparseOperator& h) {
    const u64 d = h.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (u64 k = 0; k < h.val.size(); ++k) m(h.row[k], h.col[k]) += h.val[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double max_sv = 0.0;
    for (i64 i = 0; i < ev.size(); ++i) max_sv = std::max(max_sv, std::abs(ev[i]));
    if (max_sv == 0.0) return i64(d);
    i64 count = 0;
    for (i64 i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) < 1e-10 * max_sv) ++count;
    return count;
}

} // namespace

ZeroModeCount zero_mode_count(const SparseOperator& h, const ZeroModeCountOptions& opts) {
    ZeroModeCount out;
    const u64 d = h.dim();
    const auto primes = word_primes(opts.max_primes, opts.rng_seed);

    // Bipartite split halves the elimination when the operator has no
    // diagonal: rank H = rank C + rank C^T with C the odd-column block.
    const bool bipartite = !h.has_diagonal();
    std::vector<u8> odd_col;
    if (bipartite) {
        const ChiralColoring col_e = color(*h.basis, h.basis->geom.kind == Geometry::Kind::chain
                                                         ? ParityOp::sublattice_even
                                                         : ParityOp::checkerboard);
        odd_col.assign(d, 0);
        for (u64 i = 0; i < d; ++i) odd_col[i] = col_e.parity[i];
    }

    std::vector<i64> counts;
    for (u64 p : primes) {
        i64 rank = 0;
        if (bipartite) {
            SparseMatGFp c = gfp_image_columns(h, p, odd_col);
            std::vector<u8> even_col(odd_col.size());
            for (u64 i = 0; i < d; ++i) even_col[i] = !odd_col[i];
            SparseMatGFp ct = gfp_image_columns(h, p, even_col);
            rank = i64(rank_eliminate(c)) + i64(rank_eliminate(ct));
        } else {
            SparseMatGFp m = gfp_image(h, p);
            rank = i64(rank_eliminate(m));
        }
        counts.push_back(i64(d) - rank);
        out.primes_used.push_back(p);
        // kernel dim is minimized at the best prime (field rank <= rational rank)
        const i64 best = *std::min_element(counts.begin(), counts.end());
        const int agree = int(std::count(counts.begin(), counts.end(), best));
        if (agree >= opts.required_agreement) {
            out.count = best;
            out.exact = true;
            break;
        }
    }
    if (!out.exact)
        throw std::runtime_error("prime fields disagree on the kernel dimension");

    if (d <= opts.numeric_budget || opts.force_numeric_check) {
        out.numeric = true;
        const i64 numeric = numeric_kernel_count(h);
        if (numeric != out.count)
            throw std::runtime_error("exact and numeric zero-mode counts disagree");
    }
    return out;
}

} // namespace kcm
