#include "kcmlab/fragmentation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace kcm {

namespace {

// Weighted quick-union with path compression.
struct UnionFind {
    std::vector<u32> parent;
    std::vector<u32> size;

    explicit UnionFind(u64 n) : parent(n), size(n, 1) {
        for (u64 i = 0; i < n; ++i) parent[i] = u32(i);
    }
    u32 find(u32 v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    }
    void unite(u32 a, u32 b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
    }
};

} // namespace

FragmentationReport connected_components(const SparseOperator& h) {
    const u64 d = h.dim();
    UnionFind uf(d);
    for (u64 k = 0; k < h.val.size(); ++k)
        if (h.row[k] != h.col[k]) uf.unite(h.row[k], h.col[k]);

    FragmentationReport report;
    report.sector_of.assign(d, 0);
    // ids in order of the smallest state index per root; states are sorted,
    // so scanning ascending assigns stable labels
    std::vector<u32> id_of_root(d, UINT32_MAX);
    u32 next = 0;
    for (u64 i = 0; i < d; ++i) {
        const u32 root = uf.find(u32(i));
        if (id_of_root[root] == UINT32_MAX) id_of_root[root] = next++;
        report.sector_of[i] = id_of_root[root];
    }
    report.sector_count = next;
    report.sector_sizes.assign(next, 0);
    for (u64 i = 0; i < d; ++i) report.sector_sizes[report.sector_of[i]]++;
    report.sizes_desc = report.sector_sizes;
    std::sort(report.sizes_desc.begin(), report.sizes_desc.end(), std::greater<>());
    report.frozen_count = 0;
    u64 best = 0;
    for (u32 s = 0; s < next; ++s) {
        if (report.sector_sizes[s] == 1) report.frozen_count++;
        if (report.sector_sizes[s] > best) {
            best = report.sector_sizes[s];
            report.largest_id = s;
        }
    }
    return report;
}

std::vector<u64> FragmentationReport::members_of(u32 id) const {
    std::vector<u64> out;
    out.reserve(sector_sizes[id]);
    for (u64 i = 0; i < sector_of.size(); ++i)
        if (sector_of[i] == id) out.push_back(i);
    return out;
}

SectorBasis sector_basis(const SectorBasis& parent, const FragmentationReport& report, u32 id) {
    SectorBasis out;
    out.geom = parent.geom;
    out.particles = parent.particles;
    for (u64 i = 0; i < parent.states.size(); ++i)
        if (report.sector_of[i] == id) out.states.push_back(parent.states[i]);
    return out;
}

SectorBasis sector_closure(const ModelSpec& spec, const std::vector<u64>& seeds) {
    const RuleSet rules = compile_rules(spec);
    const u64 site_mask = (spec.geom.site_count() == 64)
                              ? ~u64(0)
                              : (u64(1) << spec.geom.site_count()) - 1;
    std::unordered_set<u64> seen;
    std::vector<u64> queue;
    for (u64 s : seeds) {
        if (s & ~site_mask) throw std::domain_error("seed uses sites outside the geometry");
        if (seen.insert(s).second) queue.push_back(s);
    }
    std::vector<std::pair<u64, double>> nbr;
    for (u64 head = 0; head < queue.size(); ++head) {
        rule_neighbors(rules, queue[head], nbr);
        for (auto& [t, amp] : nbr) {
            (void)amp;
            if (seen.insert(t).second) queue.push_back(t);
        }
    }
    SectorBasis out;
    out.geom = spec.geom;
    if (spec.family != Family::pair_flip && !seeds.empty())
        out.particles = popcount(seeds.front());
    out.states.assign(seen.begin(), seen.end());
    std::sort(out.states.begin(), out.states.end());
    return out;
}

SectorBasis largest_sector_from_seed(const ModelSpec& spec, u64 seed) {
    return sector_closure(spec, {seed});
}

u64 domain_wall_seed(const Geometry& geom, int particles) {
    if (particles < 0 || particles > geom.site_count())
        throw std::domain_error("particle count outside geometry");
    if (geom.kind == Geometry::Kind::chain)
        return particles == 0 ? 0 : (u64(1) << particles) - 1;
    const int side = int(std::lround(std::sqrt(double(particles))));
    if (side * side != particles)
        throw std::domain_error("2D domain wall needs a square particle number");
    if (side > geom.lx || side > geom.ly)
        throw std::domain_error("2D domain wall block does not fit the lattice");
    u64 s = 0;
    for (int y = 1; y <= side; ++y)
        for (int x = 1; x <= side; ++x) s |= u64(1) << geom.bit(x, y);
    return s;
}

} // namespace kcm
