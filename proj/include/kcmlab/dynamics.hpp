#pragma once

#include <complex>
#include <string>

#include "kcmlab/zeromode.hpp"

namespace kcm {

using cxd = std::complex<double>;
using VectorXcd = Eigen::VectorXcd;

/// Diagonal observable tracked along a trajectory: expectation of "all mask
/// sites occupied" (a single n_i for one-bit masks).
struct TrackedObservable {
    std::string name;
    u64 mask = 0;
};

struct QuenchTrace {
    std::vector<double> times;
    std::vector<double> fidelity;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> observables;  // one series per name
    double max_norm_drift = 0.0;
    double max_energy_drift = 0.0;
};

struct KrylovOptions {
    double step_tol = 1e-12;
    int max_dim = 96;
};

/// Unitary evolution of psi0 over the time grid with a Lanczos propagator per
/// step; fidelity against psi0 and tracked observables recorded at each grid
/// point. Grid times must be ascending and start at t = 0.
QuenchTrace evolve(const SparseOperator& h, const VectorXcd& psi0,
                   const std::vector<double>& times, const std::vector<TrackedObservable>& obs = {},
                   const KrylovOptions& opts = {});

/// Reference propagator through a full eigendecomposition (cross-check path).
QuenchTrace evolve_dense(const SparseOperator& h, const VectorXcd& psi0,
                         const std::vector<double>& times,
                         const std::vector<TrackedObservable>& obs = {});

struct SpectrumReport {
    Eigen::VectorXd eigenvalues;     // ascending
    std::vector<double> gaps;        // E_{i+1} - E_i
    std::vector<u32> cluster_id;     // exact-degeneracy clusters
    u32 cluster_count = 0;
    double width = 0.0;
    std::vector<u8> factorizable_flag;  // per eigenvalue, filled by the caller
};

/// Full dense spectrum with degenerate clusters (relative gap threshold
/// 1e-12 of the spectral width).
SpectrumReport spectrum(const SparseOperator& h);

/// Full spectrum plus eigenvectors.
void dense_eig(const SparseOperator& h, Eigen::VectorXd& evals, Eigen::MatrixXd& evecs);

struct LiftScanRow {
    double epsilon = 0.0;
    double epsilon_over_delta = 0.0;
    i64 n_near_zm = 0;
    double ratio = 0.0;
};

struct LiftScanResult {
    double delta = 0.0;      // half-width of the counting window
    i64 n_zm = 0;            // unperturbed zero modes (exact)
    i64 mismatch = 0;        // chiral lower bound of the full space
    std::vector<LiftScanRow> rows;
};

/// Dense scan of the zero-mode degeneracy lifting under uncorrelated hopping
/// on the full fixed-N space. Delta is the mean spacing of the nonzero
/// eigenvalues within the central 10% of the unperturbed spectrum.
LiftScanResult lifting_scan(const ModelSpec& model, int particles,
                            const std::vector<double>& epsilons);

struct DisorderScanRow {
    double g = 0.0;
    u64 seed = 0;
    i64 n_zm = 0;
    i64 n_bs = 0;
};

/// Exact (n_zm, n_bs) counts of the tunneling-disordered East model per
/// disorder strength, one seeded realization each.
std::vector<DisorderScanRow> disorder_scan(const ModelSpec& model,
                                           std::shared_ptr<const SectorBasis> basis,
                                           const std::vector<double>& gs, u64 seed);

struct EntropyResult {
    int cut = 0;          // entropy across the bond after this site
    double entropy = 0.0; // natural log
    Eigen::VectorXd schmidt;  // singular values, descending
};

/// Schmidt decomposition of a chain state across the cut after `cut` sites.
EntropyResult entanglement_entropy(const StateVector& psi, int cut);
EntropyResult entanglement_entropy(const SectorBasis& basis, const Eigen::VectorXd& psi, int cut);

/// Uniformly sampled basis states (product states of the sector).
std::vector<u64> random_sector_states(const SectorBasis& basis, int count, u64 seed);

} // namespace kcm
