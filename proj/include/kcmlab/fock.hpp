#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kcmlab/common.hpp"

namespace kcm {

/// Lattice geometry: open-boundary chain or rectangle, at most 64 sites total
/// so that product states pack into one 64-bit word. Sites are 1-based; for
/// rectangles the site (x, y) = (1, 1) maps to bit 0 and rows are flattened
/// row-major (x fastest).
struct Geometry {
    enum class Kind { chain, rectangle };

    Kind kind = Kind::chain;
    int lx = 1;
    int ly = 1;

    static Geometry chain(int sites);
    static Geometry rectangle(int lx, int ly);

    int site_count() const { return lx * ly; }

    /// Bit index of a 1-based chain site.
    int bit(int site) const { return site - 1; }
    /// Bit index of a 1-based (x, y) rectangle site.
    int bit(int x, int y) const { return (y - 1) * lx + (x - 1); }

    bool operator==(const Geometry&) const = default;
};

/// Occupation configuration, one bit per site (site 1 = least significant).
struct FockState {
    u64 bits = 0;

    int particles() const { return popcount(bits); }
    bool occupied(int bit_index) const { return (bits >> bit_index) & 1; }
    auto operator<=>(const FockState&) const = default;
};

/// Ordered basis of one particle sector (or a dynamically connected subset
/// of it). States are strictly sorted by bit value; index lookups invert the
/// list exactly. Immutable after construction.
struct SectorBasis {
    Geometry geom;
    std::optional<int> particles;  // set when the basis lives in a fixed-N sector
    std::vector<u64> states;       // strictly ascending

    u64 dim() const { return states.size(); }
    u64 at(u64 i) const { return states[i]; }

    /// Position of a state in the list, or nullopt if absent.
    std::optional<u64> lookup(u64 bits) const;
};

/// Repeated product-state padding units attached to the two ends of a chain.
struct PaddingSpec {
    FockState left_unit;
    int left_len = 1;
    FockState right_unit;
    int right_len = 1;
};

/// All C(L, N) states of a fixed particle number, or the full 2^L space when
/// no particle count is given (pair-flip case). Sorted ascending.
SectorBasis enumerate_basis(const Geometry& geom, std::optional<int> particle_count);

/// Bitwise concatenation |left|pad|right> preserving site order.
FockState concat(FockState left, int left_sites, FockState pad, int pad_sites,
                 FockState right, int right_sites);

/// Serialize as '1'/'0' from site 1 to site L; rectangle rows joined by '/'.
std::string state_to_string(u64 bits, const Geometry& geom);
u64 state_from_string(const std::string& s, const Geometry& geom);

} // namespace kcm
