#include "kcmlab/fock.hpp"

#include <algorithm>

namespace kcm {

Geometry Geometry::chain(int sites) {
    if (sites < 1) throw std::domain_error("chain needs at least one site");
    if (sites > 64) throw std::length_error("site count exceeds 64-bit packing budget");
    Geometry g;
    g.kind = Kind::chain;
    g.lx = sites;
    g.ly = 1;
    return g;
}

Geometry Geometry::rectangle(int lx, int ly) {
    if (lx < 1 || ly < 1) throw std::domain_error("rectangle dimensions must be positive");
    if (lx * ly > 64) throw std::length_error("site count exceeds 64-bit packing budget");
    Geometry g;
    g.kind = Kind::rectangle;
    g.lx = lx;
    g.ly = ly;
    return g;
}

std::optional<u64> SectorBasis::lookup(u64 bits) const {
    auto it = std::lower_bound(states.begin(), states.end(), bits);
    if (it == states.end() || *it != bits) return std::nullopt;
    return u64(it - states.begin());
}

SectorBasis enumerate_basis(const Geometry& geom, std::optional<int> particle_count) {
    const int L = geom.site_count();
    SectorBasis basis;
    basis.geom = geom;
    basis.particles = particle_count;
    if (!particle_count) {
        if (L > 30) throw std::length_error("full Fock space enumeration limited to 30 sites");
        basis.states.resize(u64(1) << L);
        for (u64 s = 0; s < basis.states.size(); ++s) basis.states[s] = s;
        return basis;
    }
    const int N = *particle_count;
    if (N < 0 || N > L) throw std::domain_error("particle count outside [0, sites]");
    basis.states.reserve(binomial(L, N));
    if (N == 0) {
        basis.states.push_back(0);
        return basis;
    }
    // Gosper's hack walks fixed-popcount words in ascending order.
    u64 s = (u64(1) << N) - 1;
    const u64 limit = (L == 64) ? ~u64(0) : (u64(1) << L) - 1;
    while (true) {
        basis.states.push_back(s);
        if (N == L) break;
        u64 c = s & (~s + 1);
        u64 r = s + c;
        if (r > limit || r == 0) break;
        s = (((r ^ s) >> 2) / c) | r;
        if (s > limit) break;
    }
    return basis;
}

FockState concat(FockState left, int left_sites, FockState pad, int pad_sites,
                 FockState right, int right_sites) {
    const int total = left_sites + pad_sites + right_sites;
    if (total > 64) throw std::length_error("concatenation exceeds 64-site budget");
    FockState out;
    out.bits = left.bits | (pad.bits << left_sites) | (right.bits << (left_sites + pad_sites));
    return out;
}

std::string state_to_string(u64 bits, const Geometry& geom) {
    std::string out;
    const int L = geom.site_count();
    out.reserve(L + geom.ly);
    for (int b = 0; b < L; ++b) {
        if (geom.kind == Geometry::Kind::rectangle && b > 0 && b % geom.lx == 0) out += '/';
        out += ((bits >> b) & 1) ? '1' : '0';
    }
    return out;
}

u64 state_from_string(const std::string& s, const Geometry& geom) {
    u64 bits = 0;
    int b = 0;
    for (char c : s) {
        if (c == '/') continue;
        if (c != '0' && c != '1') throw std::invalid_argument("state string must be 0/1 with optional '/'");
        if (b >= geom.site_count()) throw std::invalid_argument("state string longer than geometry");
        if (c == '1') bits |= u64(1) << b;
        ++b;
    }
    if (b != geom.site_count()) throw std::invalid_argument("state string shorter than geometry");
    return bits;
}

} // namespace kcm
