#pragma once

#include "kcmlab/fragmentation.hpp"

namespace kcm {

/// Which chiral operator labels the states: sublattice particle parity for
/// chains (even or odd sites), the checkerboard sublattice for rectangles,
/// and the global phase (-1)^(N(N-1)/2) for the pair-flip family.
enum class ParityOp { sublattice_even, sublattice_odd, checkerboard, pairflip_phase };

struct ChiralColoring {
    ParityOp op = ParityOp::sublattice_even;
    std::vector<u8> parity;  // 0 even, 1 odd
    u64 n_even = 0;
    u64 n_odd = 0;
};

ParityOp default_parity_op(const ModelSpec& spec);
u8 state_parity(u64 bits, const Geometry& geom, ParityOp op);
ChiralColoring color(const SectorBasis& basis, ParityOp op);

/// Signed diagonal of the chiral operator for anticommutator checks.
std::vector<double> chiral_diagonal(const ChiralColoring& coloring);

/// |sum_n (-1)^n C(L_A, n) C(L-L_A, N-n)| in exact integer arithmetic.
i64 mismatch_formula(int L, int N, int L_A);

/// Closed form at the filling L = 3N-2: 2 C(3N/2-1, N) for even N and
/// 3 C((3N-5)/2, N-1) for odd N > 1.
i64 mismatch_closed_form(int N);

/// Leading asymptotic 2^(1-N) 3^(3N/2) / sqrt(6 pi N) for even N.
double mismatch_asymptote(int N);

struct MismatchReport {
    i64 mismatch = 0;             // |N_e - N_o| before fragmentation
    i64 mismatch_frag = 0;        // sum of per-sector mismatches
    std::vector<i64> per_sector;  // M_i by sector id
    std::vector<u32> flipped;     // sectors whose majority color opposes the global one
};

MismatchReport fragmented_mismatch(const ChiralColoring& coloring,
                                   const FragmentationReport& report);

struct ZeroModeCount {
    i64 count = 0;
    bool exact = false;
    bool numeric = false;
    std::vector<u64> primes_used;
};

struct ZeroModeCountOptions {
    int required_agreement = 3;
    int max_primes = 5;
    u64 rng_seed = 0x5eed;
    u64 numeric_budget = 4000;  // dense solver used up to this dimension
    bool force_numeric_check = false;
};

/// dim ker H. The exact path computes the rank over several word-size prime
/// fields and takes the maximum (a field rank lower-bounds the rational
/// rank); at least `required_agreement` primes must agree or the count is
/// refused. Every matrix entry is a dyadic rational (an IEEE double), so the
/// exact path applies to perturbed operators too. The numeric path counts
/// singular values below 1e-10 times the largest one and must agree with the
/// exact path whenever the dimension fits the dense budget.
ZeroModeCount zero_mode_count(const SparseOperator& h, const ZeroModeCountOptions& opts = {});

} // namespace kcm
