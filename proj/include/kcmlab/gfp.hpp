#pragma once

#include <vector>

#include "kcmlab/common.hpp"

namespace kcm {

struct SparseOperator;  // models.hpp

/// Arithmetic in GF(p) for p below 2^31 (products fit in u64).
struct PrimeField {
    u64 p;

    u64 add(u64 a, u64 b) const { u64 s = a + b; return s >= p ? s - p : s; }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p - b; }
    u64 mul(u64 a, u64 b) const { return (a * b) % p; }
    u64 pow(u64 a, u64 e) const;
    u64 inv(u64 a) const { return pow(a, p - 2); }
    u64 neg(u64 a) const { return a == 0 ? 0 : p - a; }
    /// Exact image of an IEEE double (a dyadic rational) in GF(p).
    u64 of_double(double v) const;
};

/// Deterministic Miller-Rabin for 64-bit inputs.
bool is_prime_u64(u64 n);

/// The k-th 31-bit prime below 2^31, scanning downward from a seeded start.
std::vector<u64> word_primes(int count, u64 rng_seed);

/// Sparse matrix over GF(p), row-major. Destructive elimination routines.
struct SparseMatGFp {
    PrimeField field{2147483647};
    u32 n_rows = 0;
    u32 n_cols = 0;
    std::vector<std::vector<std::pair<u32, u32>>> rows;  // (col, value), unsorted

    void add_entry(u32 r, u32 c, u64 v);
};

/// Rank by sparse Gaussian elimination with greedy Markowitz-style pivoting
/// (min column count, then shortest row). Destroys the matrix.
u32 rank_eliminate(SparseMatGFp& m);

/// Dense continuation of the elimination: once fill makes the active rows
/// dense, they move into a flat row-major block over the surviving columns
/// and finish with Barrett-reduced Gaussian elimination.
struct DenseTail {
    std::vector<u32> cols;       // local -> original column ids
    u32 width = 0;
    u32 rank = 0;
    std::vector<u32> pivot_local;  // per dense echelon row
    std::vector<u32> rows;         // rank * width, row-major, unit pivots
};

/// Row echelon data sufficient to read off the kernel: the sparse pivot rows
/// in elimination order plus an optional dense tail (whose pivots come after
/// all sparse ones).
struct EchelonForm {
    u32 rank = 0;
    std::vector<u32> pivot_col_of_row;            // per kept sparse row
    std::vector<std::vector<std::pair<u32, u32>>> rows;  // sparse pivot rows
    std::vector<u8> is_pivot_col;
    DenseTail tail;
};

EchelonForm reduce_to_rref(SparseMatGFp& m);

/// Kernel basis as a dense row-major block: dim x count values mod p (one
/// contiguous coefficient row per ambient coordinate, so constraint streaming
/// walks memory linearly). Column j is the kernel vector associated with the
/// j-th free column.
struct KernelBasisGFp {
    PrimeField field;
    u32 dim = 0;  // ambient dimension (columns of the original matrix)
    u32 count = 0;
    std::vector<u64> data;  // dim * count, row-major

    u64 at(u32 i, u32 j) const { return data[u64(i) * count + j]; }
};

KernelBasisGFp kernel_basis(SparseMatGFp& m);

/// Streaming rank of a row set drawn from a kernel basis: rank of the
/// submatrix of B formed by the given rows. Rows are fed one by one into a
/// growing echelon; early exit once the rank saturates at `cap`.
u32 streaming_row_rank(const KernelBasisGFp& basis, const std::vector<u32>& row_ids, u32 cap);

/// Kernel (in coefficient space) of the submatrix of B formed by the given
/// rows: vectors alpha with B[rows] * alpha = 0. Returned column-major,
/// count columns of length basis.count.
std::vector<std::vector<u64>> row_constraint_kernel(const KernelBasisGFp& basis,
                                                    const std::vector<u32>& row_ids);

/// Rank of a list of coefficient vectors (each of length width) mod p.
u32 vectors_rank(const PrimeField& field, std::vector<std::vector<u64>> vecs, u32 width);

/// GF(p) image of a real sparse operator (entries are dyadic rationals).
SparseMatGFp gfp_image(const SparseOperator& h, u64 p);

/// GF(p) image restricted to a column subset; `keep_col[i]` selects columns,
/// which are renumbered consecutively. Rows are kept in full. When col_ids is
/// given it receives the original index of each kept column.
SparseMatGFp gfp_image_columns(const SparseOperator& h, u64 p, const std::vector<u8>& keep_col,
                               std::vector<u32>* col_ids = nullptr);

} // namespace kcm
