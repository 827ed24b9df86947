#pragma once

#include <Eigen/Dense>
#include <map>

#include "kcmlab/chiral.hpp"
#include "kcmlab/gfp.hpp"

namespace kcm {

/// Orthonormal spanning set of ker H over a sector basis.
struct ZeroModeBasis {
    std::shared_ptr<const SectorBasis> basis;
    Eigen::MatrixXd vectors;  // dim x count

    u64 count() const { return vectors.cols(); }
};

struct ZeroModeBasisOptions {
    u64 dense_budget = 20000;
    ZeroModeCountOptions count;
};

/// Kernel vectors of H. Dense eigendecomposition up to the budget, a
/// Chebyshev-filtered subspace iteration beyond it. The vector count must
/// match the exact prime-field rank or the call fails.
ZeroModeBasis zero_mode_basis(const SparseOperator& h, const ZeroModeBasisOptions& opts = {});

/// Diagonal observable written as a sum of projector products: each term
/// contributes `weight` when all `occupied` sites hold a particle and all
/// `empty` sites are vacant. Positive weights keep the operator PSD.
struct ObservableSpec {
    struct Term {
        double weight = 1.0;
        u64 occupied = 0;
        u64 empty = 0;
    };
    std::vector<Term> terms;

    double value(u64 state) const {
        double v = 0.0;
        for (const Term& t : terms)
            if ((state & t.occupied) == t.occupied && !(state & t.empty)) v += t.weight;
        return v;
    }

    static ObservableSpec identity();
    /// n_L * sum_j n_{L-j}: configurations that can leak into a site appended
    /// on the right of an East-type chain.
    static ObservableSpec east_boundary(const Geometry& geom, int range);
    /// Mirror of east_boundary for the left edge (East-West needs both).
    static ObservableSpec west_boundary(const Geometry& geom, int range);
    /// Window operator W_j = sum_{t=0..r} n_{j+t}.
    static ObservableSpec window(const Geometry& geom, int j, int range);
    /// North-East: mobile particles in the top row or right column.
    static ObservableSpec north_east_boundary(const Geometry& geom);
    /// Pair-flip edge configurations that couple to an added unit (Table of
    /// boundary rules); `filled_unit` selects the padding state.
    static ObservableSpec pair_flip_boundary(const Geometry& geom, bool right_side,
                                             bool filled_unit);
    /// The model's full boundary discriminator (both ends where applicable).
    static ObservableSpec boundary_for(const ModelSpec& spec);
};

/// Theta_ij = <psi_i| O |psi_j> resolved in the zero-mode subspace.
Eigen::MatrixXd theta_matrix(const ZeroModeBasis& zm, const ObservableSpec& obs);

/// Orthonormal basis of ker Theta rotated back into the sector, with the
/// global phase fixed so the largest-magnitude amplitude is real positive.
/// Kernel threshold: 1e-10 * trace(Theta) / count.
Eigen::MatrixXd theta_kernel_states(const ZeroModeBasis& zm, const Eigen::MatrixXd& theta);

/// Sparse amplitude map over product states of a free-standing geometry
/// (no enumerated basis required).
struct StateVector {
    Geometry geom = Geometry::chain(1);
    std::map<u64, double> amp;

    double norm() const;
    void normalize();
};

struct BoundStateCertificate {
    PaddingSpec padding;
    int q_max = 3;
    double energy = 0.0;
    std::vector<std::tuple<int, int, double>> residuals;  // (n, m, |H'v - E v|)
    bool left_bound = false;
    bool right_bound = false;
    bool bound = false;
    bool analytic_left = false;  // East: left padding provably inert
    double tolerance = 1e-10;
};

/// Pad the state by n left and m right units for every n + m <= q_max, apply
/// the enlarged Hamiltonian on the fly and record the residuals.
BoundStateCertificate certify_bound(const StateVector& v, const ModelSpec& model,
                                    const PaddingSpec& padding, int q_max, double energy);

struct BoundStateSearch {
    Eigen::MatrixXd vectors;  // dim x n_bs, orthonormal
    std::vector<BoundStateCertificate> certificates;
};

/// Kernel of Theta(boundary observable), certified state by state.
BoundStateSearch find_bound_states(const ZeroModeBasis& zm, const ObservableSpec& obs,
                                   const ModelSpec& model, int q_max = 3);

struct FactorizableSearch {
    Eigen::MatrixXd vectors;        // spanning set, orthonormal
    std::vector<i64> window_dims;   // dim ker Theta(W_j) per swept window
    i64 count = 0;                  // rank of the union
    double ratio = 0.0;             // count / N_ZM
};

/// Sweep W_j over interior windows, intersect each kernel with the zero-mode
/// subspace and count the linearly independent states found.
FactorizableSearch find_factorizable(const ZeroModeBasis& zm, const ModelSpec& model);

/// Exact integer structure counts over prime fields (no real eigenvectors).
/// Computes dim ker H, the boundary-kernel count and the factorizable-span
/// count in one pass per prime; all counts must agree across primes.
struct ExactStructureCounts {
    i64 n_zm = 0;
    i64 n_bs = 0;
    i64 n_fs = 0;
    std::vector<i64> window_dims;
    std::vector<u64> primes_used;
};

struct ExactStructureOptions {
    bool want_bs = true;
    bool want_fs = true;
    int required_agreement = 2;
    int max_primes = 4;
    u64 rng_seed = 0x5eed;
};

ExactStructureCounts exact_structure_counts(const SparseOperator& h, const ModelSpec& model,
                                            const ExactStructureOptions& opts = {});

/// Kernel of the observable resolved in an arbitrary orthonormal subspace
/// (degenerate eigenspaces at nonzero energy host bound states too).
Eigen::MatrixXd observable_kernel_in_subspace(const SectorBasis& basis,
                                              const Eigen::MatrixXd& subspace,
                                              const ObservableSpec& obs);

/// Uniform-magnitude East-West kernel state generated by the bond-dimension-3
/// matrix product operator acting on the most diluted configuration. Requires
/// even range; the chain has (range+1)(particles-1)+1 sites.
StateVector east_west_mpo_state(int range, int particles);

/// Tensor product of building states separated by inert padding strings;
/// returns the concatenated vector. Throws when a padding string is shorter
/// than range+1 sites.
StateVector build_factorizable(const std::vector<StateVector>& parts,
                               const std::vector<StateVector>& paddings, int range);

/// Residual |H v - E v| of a sparse amplitude map under the model's rules on
/// `sites` sites (the state need not live in any enumerated basis).
double eigen_residual(const StateVector& v, const ModelSpec& model, double energy);

/// Frobenius norm of [H, J] with J = |psi1><psi2| (x) |pad><pad| (x) identity
/// on extra_sites appended sites. psi1 and psi2 must share site count and
/// particle number.
double dynamical_symmetry_check(const StateVector& psi1, const StateVector& psi2,
                                int padding_sites, int extra_sites, const ModelSpec& model);

/// Embed a sparse chain state into a sector basis as a dense vector.
Eigen::VectorXd embed(const StateVector& v, const SectorBasis& basis);
StateVector extract(const Eigen::VectorXd& dense, const SectorBasis& basis, double cutoff = 1e-14);

} // namespace kcm
