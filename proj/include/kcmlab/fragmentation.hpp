#pragma once

#include "kcmlab/models.hpp"

namespace kcm {

/// Connected-component split of a Hamiltonian's basis. Sector ids are
/// assigned in order of each sector's smallest contained state, so the
/// labeling is invariant under permutations of the input.
struct FragmentationReport {
    std::vector<u32> sector_of;       // per basis state
    std::vector<u64> sector_sizes;    // by sector id
    std::vector<u64> sizes_desc;      // sizes sorted descending
    u64 frozen_count = 0;             // sectors of size one
    u32 sector_count = 0;
    u32 largest_id = 0;

    std::vector<u64> members_of(u32 id) const;  // state indices, ascending

  private:
    friend FragmentationReport connected_components(const SparseOperator&);
};

FragmentationReport connected_components(const SparseOperator& h);

/// Sub-basis formed by one sector of a parent basis.
SectorBasis sector_basis(const SectorBasis& parent, const FragmentationReport& report, u32 id);

/// BFS closure of a seed state under the model's rules; no full-space
/// enumeration required. The result is sorted ascending.
SectorBasis largest_sector_from_seed(const ModelSpec& spec, u64 seed);

/// BFS closure of several seeds at once (quench initial states whose support
/// crosses sector boundaries).
SectorBasis sector_closure(const ModelSpec& spec, const std::vector<u64>& seeds);

/// Domain-wall seed: particles on the first N chain sites, or a square block
/// in the lower-left corner when the geometry is a rectangle (N must be a
/// perfect square in that case).
u64 domain_wall_seed(const Geometry& geom, int particles);

} // namespace kcm
