#include "kcmlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kcm {

ModelSpec ModelSpec::east(int range, const Geometry& geom) {
    ModelSpec m;
    m.family = Family::east;
    m.range = range;
    m.couplings.assign(range, 1.0);
    m.geom = geom;
    m.validate();
    return m;
}

ModelSpec ModelSpec::east_west(int range, const Geometry& geom) {
    ModelSpec m = east(range, geom);
    m.family = Family::east_west;
    return m;
}

ModelSpec ModelSpec::north_east(const Geometry& geom) {
    ModelSpec m;
    m.family = Family::north_east;
    m.range = 1;
    m.couplings = {1.0};
    m.geom = geom;
    m.validate();
    return m;
}

ModelSpec ModelSpec::pair_flip(const Geometry& geom) {
    ModelSpec m;
    m.family = Family::pair_flip;
    m.range = 1;
    m.couplings = {1.0};
    m.geom = geom;
    m.validate();
    return m;
}

void ModelSpec::validate() const {
    if (range < 1) throw std::domain_error("range must be >= 1");
    switch (family) {
        case Family::east:
        case Family::east_west:
            if (geom.kind != Geometry::Kind::chain)
                throw std::domain_error("east/east-west models are one-dimensional");
            if (int(couplings.size()) != range)
                throw std::domain_error("couplings length must equal the range");
            break;
        case Family::north_east:
            if (geom.kind != Geometry::Kind::rectangle)
                throw std::domain_error("north-east model needs a rectangle geometry");
            if (range != 1) throw std::domain_error("north-east model is fixed at range 1");
            break;
        case Family::pair_flip:
            if (geom.kind != Geometry::Kind::chain)
                throw std::domain_error("pair-flip model is one-dimensional");
            break;
    }
}

namespace {

u64 bitmask(int b) { return u64(1) << b; }

// East-type rules for hops between chain sites (i, i+1), enabled by the
// nearest occupied site at distance l on the given side. Patterns for
// different l are mutually exclusive, so each hop picks up exactly one t_l.
void east_side_rules(int L, int r, const std::vector<double>& t, bool west,
                     std::vector<HopRule>& out) {
    for (int i = 1; i <= L - 1; ++i) {
        for (int l = 1; l <= r; ++l) {
            HopRule rule;
            rule.toggle = bitmask(i - 1) | bitmask(i);
            rule.toggle_parity = 1;
            rule.amplitude = t[l - 1];
            if (!west) {
                const int en = i - l;  // n_{i<1} = 0: terms referencing missing sites drop
                if (en < 1) continue;
                rule.must_occupied = bitmask(en - 1);
                for (int j = en + 1; j <= i - 1; ++j) rule.must_empty |= bitmask(j - 1);
            } else {
                const int en = i + 1 + l;
                if (en > L) continue;
                rule.must_occupied = bitmask(en - 1);
                for (int j = i + 2; j <= en - 1; ++j) rule.must_empty |= bitmask(j - 1);
            }
            out.push_back(rule);
        }
    }
}

} // namespace

RuleSet compile_rules(const ModelSpec& spec) {
    spec.validate();
    RuleSet rules;
    const int L = spec.geom.site_count();
    switch (spec.family) {
        case Family::east:
            east_side_rules(L, spec.range, spec.couplings, false, rules.hops);
            break;
        case Family::east_west:
            east_side_rules(L, spec.range, spec.couplings, false, rules.hops);
            east_side_rules(L, spec.range, spec.couplings, true, rules.hops);
            break;
        case Family::north_east: {
            const int lx = spec.geom.lx, ly = spec.geom.ly;
            for (int y = 2; y <= ly; ++y) {
                for (int x = 2; x <= lx; ++x) {
                    const u64 occ = bitmask(spec.geom.bit(x - 1, y)) | bitmask(spec.geom.bit(x, y - 1));
                    if (x + 1 <= lx) {
                        HopRule h;
                        h.must_occupied = occ;
                        h.toggle = bitmask(spec.geom.bit(x, y)) | bitmask(spec.geom.bit(x + 1, y));
                        rules.hops.push_back(h);
                    }
                    if (y + 1 <= ly) {
                        HopRule v;
                        v.must_occupied = occ;
                        v.toggle = bitmask(spec.geom.bit(x, y)) | bitmask(spec.geom.bit(x, y + 1));
                        rules.hops.push_back(v);
                    }
                }
            }
            break;
        }
        case Family::pair_flip:
            for (int j = 1; j + 2 <= L; ++j) {
                HopRule f;
                f.must_occupied = bitmask(j);  // center site j+1
                f.toggle = bitmask(j - 1) | bitmask(j + 1);
                f.toggle_parity = 0;  // pair sites equal before the flip
                rules.hops.push_back(f);
            }
            break;
    }
    return rules;
}

void rule_neighbors(const RuleSet& rules, u64 s, std::vector<std::pair<u64, double>>& out) {
    out.clear();
    for (const HopRule& rule : rules.hops) {
        if (rule.amplitude == 0.0) continue;
        if ((s & rule.must_occupied) != rule.must_occupied) continue;
        if (s & rule.must_empty) continue;
        if ((popcount(s & rule.toggle) & 1) != rule.toggle_parity) continue;
        out.push_back({s ^ rule.toggle, rule.amplitude});
    }
}

bool SparseOperator::has_diagonal() const {
    for (u64 k = 0; k < val.size(); ++k)
        if (row[k] == col[k]) return true;
    return false;
}

double SparseOperator::norm_bound() const {
    double best = 0.0;
    for (u64 r = 0; r + 1 < row_ptr.size(); ++r) {
        double s = 0.0;
        for (u64 k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += std::abs(val[k]);
        best = std::max(best, s);
    }
    return best;
}

namespace {

void finalize_csr(SparseOperator& op) {
    const u64 d = op.dim();
    op.row_ptr.assign(d + 1, 0);
    for (u32 r : op.row) op.row_ptr[r + 1]++;
    for (u64 i = 0; i < d; ++i) op.row_ptr[i + 1] += op.row_ptr[i];
}

// Edges emitted from one source state, deduplicated and amplitude-summed.
// Only pairs (i, j) with j > i are returned; diagonal entries separately.
void scan_state(const RuleSet& rules, const SectorBasis& basis, u64 idx,
                std::vector<std::pair<u32, double>>& edges, double& diag) {
    edges.clear();
    diag = 0.0;
    const u64 s = basis.states[idx];
    for (const HopRule& rule : rules.hops) {
        if (rule.amplitude == 0.0) continue;
        if ((s & rule.must_occupied) != rule.must_occupied) continue;
        if (s & rule.must_empty) continue;
        if ((popcount(s & rule.toggle) & 1) != rule.toggle_parity) continue;
        const u64 t = s ^ rule.toggle;
        auto j = basis.lookup(t);
        if (!j || *j <= idx) continue;
        edges.push_back({u32(*j), rule.amplitude});
    }
    for (const DiagRule& rule : rules.diag)
        if ((s >> rule.bit) & 1) diag += rule.amplitude;
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // merge duplicates (east + west rules can enable the same hop)
    u64 w = 0;
    for (u64 k = 0; k < edges.size(); ++k) {
        if (w > 0 && edges[w - 1].first == edges[k].first)
            edges[w - 1].second += edges[k].second;
        else
            edges[w++] = edges[k];
    }
    edges.resize(w);
    std::erase_if(edges, [](const auto& e) { return e.second == 0.0; });
}

} // namespace

SparseOperator assemble_operator(const RuleSet& rules, std::shared_ptr<const SectorBasis> basis,
                                 bool parallel) {
    SparseOperator op;
    op.basis = std::move(basis);
    const SectorBasis& b = *op.basis;
    const u64 d = b.dim();

    // Two-pass scheme: count per-state emissions, prefix-sum, then fill.
    // This keeps the parallel result identical to the serial one.
    std::vector<u64> count(d + 1, 0);
    std::vector<std::pair<u32, double>> scratch;
    double diag = 0.0;

#ifdef _OPENMP
#pragma omp parallel if (parallel) private(scratch, diag)
    {
#pragma omp for schedule(static)
        for (i64 i = 0; i < i64(d); ++i) {
            scan_state(rules, b, u64(i), scratch, diag);
            count[i + 1] = scratch.size() + (diag != 0.0 ? 1 : 0);
        }
    }
#else
    (void)parallel;
    for (u64 i = 0; i < d; ++i) {
        scan_state(rules, b, i, scratch, diag);
        count[i + 1] = scratch.size() + (diag != 0.0 ? 1 : 0);
    }
#endif
    for (u64 i = 0; i < d; ++i) count[i + 1] += count[i];
    const u64 upper = count[d];

    struct Entry {
        u32 r, c;
        double v;
    };
    std::vector<Entry> upper_entries(upper);

#ifdef _OPENMP
#pragma omp parallel if (parallel) private(scratch, diag)
    {
#pragma omp for schedule(static)
        for (i64 i = 0; i < i64(d); ++i) {
            scan_state(rules, b, u64(i), scratch, diag);
            u64 at = count[i];
            if (diag != 0.0) upper_entries[at++] = {u32(i), u32(i), diag};
            for (auto& [j, v] : scratch) upper_entries[at++] = {u32(i), j, v};
        }
    }
#else
    for (u64 i = 0; i < d; ++i) {
        scan_state(rules, b, i, scratch, diag);
        u64 at = count[i];
        if (diag != 0.0) upper_entries[at++] = {u32(i), u32(i), diag};
        for (auto& [j, v] : scratch) upper_entries[at++] = {u32(i), j, v};
    }
#endif

    // Mirror the strict-upper entries and sort into row-major order.
    u64 total = 0;
    for (const Entry& e : upper_entries) total += (e.r == e.c) ? 1 : 2;
    std::vector<Entry> all;
    all.reserve(total);
    for (const Entry& e : upper_entries) {
        all.push_back(e);
        if (e.r != e.c) all.push_back({e.c, e.r, e.v});
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    op.row.resize(all.size());
    op.col.resize(all.size());
    op.val.resize(all.size());
    for (u64 k = 0; k < all.size(); ++k) {
        op.row[k] = all[k].r;
        op.col[k] = all[k].c;
        op.val[k] = all[k].v;
    }
    finalize_csr(op);
    return op;
}

SparseOperator build_hamiltonian(const ModelSpec& spec, std::shared_ptr<const SectorBasis> basis,
                                 bool parallel) {
    if (!(spec.geom == basis->geom)) throw std::invalid_argument("basis geometry does not match model");
    return assemble_operator(compile_rules(spec), std::move(basis), parallel);
}

std::vector<double> dyadic_disorder(u64 seed, int count) {
    std::mt19937_64 gen(seed);
    std::vector<double> w(count);
    for (int i = 0; i < count; ++i) {
        const u64 k = gen() >> 48;  // 16-bit draw
        w[i] = (double(k) - 32768.0) / 65536.0;
    }
    return w;
}

SparseOperator build_perturbation(const PerturbationSpec& p, const ModelSpec& base,
                                  std::shared_ptr<const SectorBasis> basis, bool parallel) {
    const int L = base.geom.site_count();
    RuleSet rules;
    switch (p.kind) {
        case PerturbationSpec::Kind::uncorrelated_hopping: {
            for (int i = 1; i <= L - 1; ++i) {
                HopRule h;
                h.toggle = (u64(1) << (i - 1)) | (u64(1) << i);
                h.amplitude = p.strength;
                rules.hops.push_back(h);
            }
            break;
        }
        case PerturbationSpec::Kind::tunneling_disorder: {
            if (!p.seed) throw std::invalid_argument("tunneling disorder needs a seed");
            if (base.family != Family::east)
                throw std::domain_error("tunneling disorder is defined for the east family");
            const auto w = dyadic_disorder(*p.seed, L);
            // w[i-1] scales the hop between sites (i, i+1)
            RuleSet east = compile_rules(base);
            for (HopRule& h : east.hops) {
                const int low_bit = __builtin_ctzll(h.toggle);
                h.amplitude *= 1.0 + p.strength * w[low_bit];
            }
            rules = std::move(east);
            break;
        }
        case PerturbationSpec::Kind::onsite_disorder: {
            if (!p.seed) throw std::invalid_argument("onsite disorder needs a seed");
            const auto w = dyadic_disorder(*p.seed, L);
            for (int i = 0; i < L; ++i) rules.diag.push_back({i, p.strength * w[i]});
            break;
        }
    }
    return assemble_operator(rules, std::move(basis), parallel);
}

SparseOperator operator_sum(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimensions differ");
    SparseOperator out;
    out.basis = a.basis;
    std::map<std::pair<u32, u32>, double> acc;
    for (u64 k = 0; k < a.val.size(); ++k) acc[{a.row[k], a.col[k]}] += a.val[k];
    for (u64 k = 0; k < b.val.size(); ++k) acc[{b.row[k], b.col[k]}] += b.val[k];
    for (auto& [rc, v] : acc) {
        if (v == 0.0) continue;
        out.row.push_back(rc.first);
        out.col.push_back(rc.second);
        out.val.push_back(v);
    }
    finalize_csr(out);
    return out;
}

void apply_serial(const SparseOperator& h, const double* x, double* y) {
    const u64 d = h.dim();
    for (u64 r = 0; r < d; ++r) {
        double acc = 0.0;
        for (u64 k = h.row_ptr[r]; k < h.row_ptr[r + 1]; ++k) acc += h.val[k] * x[h.col[k]];
        y[r] = acc;
    }
}

void apply_omp(const SparseOperator& h, const double* x, double* y) {
    const i64 d = i64(h.dim());
#pragma omp parallel for schedule(static)
    for (i64 r = 0; r < d; ++r) {
        double acc = 0.0;
        for (u64 k = h.row_ptr[r]; k < h.row_ptr[r + 1]; ++k) acc += h.val[k] * x[h.col[k]];
        y[r] = acc;
    }
}

std::vector<double> matvec(const SparseOperator& h, const std::vector<double>& x) {
    if (x.size() != h.dim()) throw std::invalid_argument("vector dimension does not match operator");
    std::vector<double> y(x.size());
    apply_omp(h, x.data(), y.data());
    return y;
}

void apply_omp(const SparseOperator& h, const double* re, const double* im, double* out_re,
               double* out_im) {
    const i64 d = i64(h.dim());
#pragma omp parallel for schedule(static)
    for (i64 r = 0; r < d; ++r) {
        double ar = 0.0, ai = 0.0;
        for (u64 k = h.row_ptr[r]; k < h.row_ptr[r + 1]; ++k) {
            ar += h.val[k] * re[h.col[k]];
            ai += h.val[k] * im[h.col[k]];
        }
        out_re[r] = ar;
        out_im[r] = ai;
    }
}

} // namespace kcm
