#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "kcmlab/fock.hpp"

namespace kcm {

enum class Family { east, east_west, north_east, pair_flip };

/// Model family plus range and couplings. For east / east_west the couplings
/// t_1..t_r weight the hop enabled by the nearest occupied neighbor at
/// distance l; north_east is fixed at r = 1 and pair_flip has no range.
struct ModelSpec {
    Family family = Family::east;
    int range = 1;
    std::vector<double> couplings;  // length r; defaults to all ones
    Geometry geom = Geometry::chain(1);

    static ModelSpec east(int range, const Geometry& geom);
    static ModelSpec east_west(int range, const Geometry& geom);
    static ModelSpec north_east(const Geometry& geom);
    static ModelSpec pair_flip(const Geometry& geom);

    void validate() const;
};

struct PerturbationSpec {
    enum class Kind { uncorrelated_hopping, tunneling_disorder, onsite_disorder };
    Kind kind = Kind::uncorrelated_hopping;
    double strength = 0.0;              // epsilon or g
    std::optional<u64> seed;            // required for the disorder kinds
};

/// One local off-diagonal term: the two states s and s^toggle are connected
/// with the given amplitude whenever the occupied/empty masks match and
/// popcount(s & toggle) has the required parity (1 for hops, 0 for pair
/// flips). Constraint sites never overlap the toggled sites, so the matrix
/// element is symmetric by construction.
struct HopRule {
    u64 must_occupied = 0;
    u64 must_empty = 0;
    u64 toggle = 0;
    int toggle_parity = 1;
    double amplitude = 1.0;
};

/// Diagonal term: amplitude * n_site.
struct DiagRule {
    int bit = 0;
    double amplitude = 0.0;
};

struct RuleSet {
    std::vector<HopRule> hops;
    std::vector<DiagRule> diag;
};

/// Compile a model to its local rule list; one engine serves all families.
RuleSet compile_rules(const ModelSpec& spec);

/// Real symmetric sparse operator over a SectorBasis. Stored as sorted
/// (row, col, value) triples with both orientations present, plus CSR arrays
/// for the matvec kernels. Immutable after construction.
struct SparseOperator {
    std::shared_ptr<const SectorBasis> basis;
    std::vector<u32> row;   // triples, sorted by (row, col)
    std::vector<u32> col;
    std::vector<double> val;
    std::vector<u64> row_ptr;  // CSR over the same data
    bool symmetric = true;

    u64 dim() const { return basis ? basis->dim() : 0; }
    u64 nnz() const { return val.size(); }
    bool has_diagonal() const;
    /// Largest row sum of absolute values (an upper bound on the spectral radius).
    double norm_bound() const;
};

/// Assemble an operator from rules over a basis. Hops whose partner state
/// falls outside the basis are dropped (the operator is the projection onto
/// the spanned subspace). The parallel scan produces bit-identical output to
/// the serial one.
SparseOperator assemble_operator(const RuleSet& rules, std::shared_ptr<const SectorBasis> basis,
                                 bool parallel = true);

SparseOperator build_hamiltonian(const ModelSpec& spec, std::shared_ptr<const SectorBasis> basis,
                                 bool parallel = true);

/// Per the perturbation kind: uncorrelated_hopping returns eps * sum of bare
/// hops; tunneling_disorder returns the full East Hamiltonian with terms
/// scaled by (1 + g w_i); onsite_disorder returns the diagonal g * sum w_i n_i.
/// Disorder draws w_i are uniform on [-1/2, 1/2) on a dyadic grid of spacing
/// 2^-16 so that every matrix entry stays an exact rational.
SparseOperator build_perturbation(const PerturbationSpec& p, const ModelSpec& base,
                                  std::shared_ptr<const SectorBasis> basis, bool parallel = true);

/// Entrywise sum of two operators over the same basis.
SparseOperator operator_sum(const SparseOperator& a, const SparseOperator& b);

/// y = H x. The OpenMP kernel partitions rows and matches the serial
/// reference bitwise; the serial version is kept for testing.
void apply_serial(const SparseOperator& h, const double* x, double* y);
void apply_omp(const SparseOperator& h, const double* x, double* y);
std::vector<double> matvec(const SparseOperator& h, const std::vector<double>& x);

/// Complex matvec done as two real ones (H is real).
void apply_omp(const SparseOperator& h, const double* re, const double* im, double* out_re,
               double* out_im);

/// Disorder stream used by the perturbation builder; exposed so scans can
/// reproduce the exact realization for a given seed.
std::vector<double> dyadic_disorder(u64 seed, int count);

/// Neighbor states of s under the rule set (used by sector BFS and by
/// on-the-fly applications on enlarged lattices).
void rule_neighbors(const RuleSet& rules, u64 s, std::vector<std::pair<u64, double>>& out);

} // namespace kcm
