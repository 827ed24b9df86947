#include "kcmlab/gfp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>

#include "kcmlab/models.hpp"

namespace kcm {

u64 PrimeField::pow(u64 a, u64 e) const {
    u64 r = 1 % p;
    a %= p;
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

u64 PrimeField::of_double(double v) const {
    if (v == 0.0) return 0;
    if (!std::isfinite(v)) throw std::domain_error("non-finite matrix entry");
    int e = 0;
    const double m = std::frexp(v, &e);
    const i64 mi = i64(std::ldexp(m, 53));  // v = mi * 2^(e-53) exactly
    e -= 53;
    u64 base = mi < 0 ? (p - (u64(-mi) % p)) % p : u64(mi) % p;
    const u64 two = (e >= 0) ? pow(2, u64(e)) : inv(pow(2, u64(-e)));
    return mul(base, two);
}

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    auto witness = [&](u64 a) {
        u128 x = 1;
        u128 base = a % n;
        u64 e = d;
        while (e) {
            if (e & 1) x = x * base % n;
            base = base * base % n;
            e >>= 1;
        }
        if (x == 1 || x == n - 1) return false;
        for (int i = 1; i < s; ++i) {
            x = x * x % n;
            if (x == n - 1) return false;
        }
        return true;
    };
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull})
        if (witness(a)) return false;
    return true;
}

std::vector<u64> word_primes(int count, u64 rng_seed) {
    std::mt19937_64 gen(rng_seed);
    std::vector<u64> primes;
    while (int(primes.size()) < count) {
        // 30-bit primes: eight products of two residues plus a carry fit in
        // one u64, which the dense panels rely on
        u64 c = (u64(1) << 29) + (gen() % (u64(1) << 29));  // in [2^29, 2^30)
        c |= 1;
        while (!is_prime_u64(c)) c -= 2;
        if (std::find(primes.begin(), primes.end(), c) == primes.end()) primes.push_back(c);
    }
    return primes;
}

void SparseMatGFp::add_entry(u32 r, u32 c, u64 v) {
    v %= field.p;
    if (v == 0) return;
    if (r >= rows.size()) rows.resize(r + 1);
    rows[r].push_back({c, u32(v)});
    n_rows = std::max(n_rows, r + 1);
    n_cols = std::max(n_cols, c + 1);
}

namespace {

// Barrett reduction for products below 2^62 (factors below 2^31).
struct Barrett {
    u64 p;
    u64 mu;  // floor(2^64 / p)

    explicit Barrett(u64 prime) : p(prime), mu(u64((u128(1) << 64) / prime)) {}
    u64 reduce(u64 t) const {
        const u64 q = u64((u128(t) * mu) >> 64);
        u64 r = t - q * p;
        while (r >= p) r -= p;
        return r;
    }
    u64 mulmod(u64 a, u64 b) const { return reduce(a * b); }
};

// Dense Barrett-reduced Gaussian elimination over the surviving columns once
// sparse fill makes further pivoting quadratic. Columns are processed in
// panels of four: inside a panel only the panel columns update eagerly, and
// the trailing block receives one fused rank-k update per panel so most
// elements see several multiply-adds per Barrett reduction (4 (p-1)^2 + p
// stays below 2^64 for 31-bit primes). Rows update in parallel.
void dense_eliminate(std::vector<u32>& a, u32 n_rows, u32 width, const PrimeField& F,
                     DenseTail& tail) {
    const Barrett bar(F.p);
    const u32 pw = 8;
    u32 rank = 0;
    tail.pivot_local.clear();
    std::vector<u64> mult(u64(n_rows) * pw, 0);  // negated multipliers, per panel
    std::vector<u64> pivot_inv(pw, 1);

    for (u32 c0 = 0; c0 < width && rank < n_rows; c0 += pw) {
        const u32 c1 = std::min(width, c0 + pw);
        const u32 rank0 = rank;
        u32 np = 0;
        for (u32 cc = c0; cc < c1 && rank < n_rows; ++cc) {
            u32 pr = UINT32_MAX;
            for (u32 r = rank; r < n_rows; ++r)
                if (a[u64(r) * width + cc]) {
                    pr = r;
                    break;
                }
            if (pr == UINT32_MAX) continue;
            if (pr != rank) {
                for (u32 j = c0; j < width; ++j)
                    std::swap(a[u64(pr) * width + j], a[u64(rank) * width + j]);
                for (u32 k = 0; k < pw; ++k)
                    std::swap(mult[u64(pr) * pw + k], mult[u64(rank) * pw + k]);
            }
            u32* prow = &a[u64(rank) * width];
            const u64 inv = F.inv(prow[cc]);
            pivot_inv[np] = inv;
            // normalize the panel part now; the trailing part after the cascade
            for (u32 j = cc; j < c1; ++j)
                if (prow[j]) prow[j] = u32(bar.mulmod(prow[j], inv));
            for (u32 r = rank + 1; r < n_rows; ++r) {
                u32* row = &a[u64(r) * width];
                const u64 f = row[cc];
                mult[u64(r) * pw + np] = f ? F.p - f : 0;
                if (!f) continue;
                const u64 nf = F.p - f;
                for (u32 j = cc; j < c1; ++j)
                    if (prow[j]) row[j] = u32(bar.reduce(row[j] + nf * prow[j]));
            }
            tail.pivot_local.push_back(cc);
            ++np;
            ++rank;
        }
        if (np == 0) continue;

        // bring the panel pivot rows' trailing parts up to date, in order:
        // subtract the earlier panel pivots, then apply the pivot's own scale
        for (u32 k = 0; k < np; ++k) {
            u32* row = &a[u64(rank0 + k) * width];
            for (u32 l = 0; l < k; ++l) {
                const u64 nf = mult[u64(rank0 + k) * pw + l];
                if (!nf) continue;
                const u32* prow = &a[u64(rank0 + l) * width];
                for (u32 j = c1; j < width; ++j)
                    if (prow[j]) row[j] = u32(bar.reduce(row[j] + nf * prow[j]));
            }
            if (pivot_inv[k] != 1)
                for (u32 j = c1; j < width; ++j)
                    if (row[j]) row[j] = u32(bar.mulmod(row[j], pivot_inv[k]));
        }

        // fused rank-np update of the trailing block
        const u32* prows[8];
        for (u32 k = 0; k < pw; ++k) prows[k] = &a[u64(rank0 + std::min(k, np - 1)) * width];
#pragma omp parallel for schedule(static)
        for (i64 r = i64(rank); r < i64(n_rows); ++r) {
            u32* row = &a[u64(r) * width];
            const u64* nf = &mult[u64(r) * pw];
            u64 any = 0;
            for (u32 k = 0; k < np; ++k) any |= nf[k];
            if (!any) continue;
            if (np == 8) {
                const u32 *p0 = prows[0], *p1 = prows[1], *p2 = prows[2], *p3 = prows[3],
                          *p4 = prows[4], *p5 = prows[5], *p6 = prows[6], *p7 = prows[7];
                const u64 f0 = nf[0], f1 = nf[1], f2 = nf[2], f3 = nf[3], f4 = nf[4], f5 = nf[5],
                          f6 = nf[6], f7 = nf[7];
                for (u32 j = c1; j < width; ++j)
                    row[j] = u32(bar.reduce(row[j] + f0 * p0[j] + f1 * p1[j] + f2 * p2[j] +
                                            f3 * p3[j] + f4 * p4[j] + f5 * p5[j] + f6 * p6[j] +
                                            f7 * p7[j]));
            } else {
                for (u32 j = c1; j < width; ++j) {
                    u64 acc = row[j];
                    for (u32 k = 0; k < np; ++k) acc += nf[k] * prows[k][j];
                    row[j] = u32(bar.reduce(acc));
                }
            }
        }
    }
    tail.rank = rank;
    // hand the flat block over without a second full-size copy
    tail.rows = std::move(a);
    tail.rows.resize(u64(rank) * width);
    a.clear();
}

// Shared sparse forward elimination. Pivots greedily on the column with the
// fewest active rows, then the shortest of those rows. Eliminated pivot rows
// leave the active set; the echelon of normalized pivot rows is returned in
// elimination order. When the live rows turn dense the elimination finishes
// in a flat dense block (the tail).
struct Eliminator {
    PrimeField F;
    u32 ncols;
    std::vector<std::vector<std::pair<u32, u32>>> rows;
    std::vector<u8> active;
    std::vector<u32> col_count;               // active rows per column
    std::vector<std::vector<u32>> col_rows;   // candidate row ids per column (lazy)
    std::vector<u64> acc;
    std::vector<u8> acc_used;
    u64 live_nnz = 0;
    u64 live_rows = 0;

    explicit Eliminator(SparseMatGFp& m)
        : F(m.field), ncols(m.n_cols), rows(std::move(m.rows)) {
        rows.resize(m.n_rows);
        active.assign(rows.size(), 1);
        col_count.assign(ncols, 0);
        col_rows.assign(ncols, {});
        for (u32 r = 0; r < rows.size(); ++r) {
            normalize_row(rows[r]);
            if (rows[r].empty()) {
                active[r] = 0;
                continue;
            }
            ++live_rows;
            live_nnz += rows[r].size();
            for (auto& [c, v] : rows[r]) {
                col_count[c]++;
                col_rows[c].push_back(r);
            }
        }
        acc.assign(ncols, 0);
        acc_used.assign(ncols, 0);
    }

    // collapse duplicate columns mod p
    void normalize_row(std::vector<std::pair<u32, u32>>& row) const {
        std::sort(row.begin(), row.end());
        u64 w = 0;
        for (u64 k = 0; k < row.size(); ++k) {
            if (w > 0 && row[w - 1].first == row[k].first) {
                row[w - 1].second = u32(F.add(row[w - 1].second, row[k].second));
                if (row[w - 1].second == 0) --w;
            } else {
                row[w++] = row[k];
            }
        }
        row.resize(w);
    }

    // rows are kept sorted by column
    bool row_has(u32 r, u32 c, u32& val) const {
        const auto& row = rows[r];
        auto it = std::lower_bound(row.begin(), row.end(), std::pair<u32, u32>{c, 0},
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        if (it == row.end() || it->first != c) return false;
        val = it->second;
        return true;
    }

    // drop stale candidate entries once they dominate the live count
    void compact_candidates(u32 c) {
        auto& cand = col_rows[c];
        if (cand.size() <= 16 || cand.size() <= 2 * u64(col_count[c])) return;
        u64 w = 0;
        u32 dummy;
        for (u64 k = 0; k < cand.size(); ++k)
            if (active[cand[k]] && row_has(cand[k], c, dummy)) cand[w++] = cand[k];
        cand.resize(w);
    }

    void retire_row(u32 r) {
        for (auto& [c, v] : rows[r]) col_count[c]--;
        active[r] = 0;
        live_nnz -= rows[r].size();
        --live_rows;
    }

    // row_r -= factor * pivot_row, maintaining column counts and candidates
    void eliminate_into(u32 r, u64 factor, const std::vector<std::pair<u32, u32>>& pivot_row) {
        auto& row = rows[r];
        live_nnz -= row.size();
        std::vector<u32> touched;
        touched.reserve(row.size() + pivot_row.size());
        for (auto& [c, v] : row) {
            acc[c] = v;
            acc_used[c] = 1;
            touched.push_back(c);
        }
        for (auto& [c, v] : pivot_row) {
            const u64 sub = F.mul(factor, v);
            if (!acc_used[c]) {
                acc[c] = F.neg(sub);
                acc_used[c] = 1;
                touched.push_back(c);
            } else {
                acc[c] = F.sub(acc[c], sub);
            }
        }
        std::vector<std::pair<u32, u32>> fresh;
        fresh.reserve(touched.size());
        std::sort(touched.begin(), touched.end());
        for (u32 c : touched) {
            if (acc[c] != 0) fresh.push_back({c, u32(acc[c])});
            acc[c] = 0;
            acc_used[c] = 0;
        }
        // column bookkeeping; compaction must wait until the row is committed
        static thread_local std::vector<u32> gained;
        gained.clear();
        {
            auto it_old = row.begin();
            auto it_new = fresh.begin();
            while (it_old != row.end() || it_new != fresh.end()) {
                if (it_new == fresh.end() || (it_old != row.end() && it_old->first < it_new->first)) {
                    col_count[it_old->first]--;
                    ++it_old;
                } else if (it_old == row.end() || it_new->first < it_old->first) {
                    col_count[it_new->first]++;
                    col_rows[it_new->first].push_back(r);
                    gained.push_back(it_new->first);
                    ++it_new;
                } else {
                    ++it_old;
                    ++it_new;
                }
            }
        }
        row = std::move(fresh);
        live_nnz += row.size();
        if (row.empty()) {
            active[r] = 0;
            --live_rows;
        }
        for (u32 c : gained) compact_candidates(c);
    }

    // move the remaining live rows into a flat dense block over the live
    // columns and finish there
    void dense_switchover(DenseTail& tail) {
        std::vector<u32> local_of(ncols, UINT32_MAX);
        tail.cols.clear();
        for (u32 c = 0; c < ncols; ++c)
            if (col_count[c] > 0) {
                local_of[c] = u32(tail.cols.size());
                tail.cols.push_back(c);
            }
        tail.width = u32(tail.cols.size());
        std::vector<u32> flat(u64(live_rows) * tail.width, 0);
        u32 at = 0;
        for (u32 r = 0; r < rows.size(); ++r) {
            if (!active[r]) continue;
            for (auto& [c, v] : rows[r]) flat[u64(at) * tail.width + local_of[c]] = v;
            rows[r].clear();
            rows[r].shrink_to_fit();
            active[r] = 0;
            ++at;
        }
        col_rows.clear();
        col_rows.shrink_to_fit();
        dense_eliminate(flat, at, tail.width, F, tail);
    }

    // run the forward elimination; returns echelon pivot rows + pivot columns
    void run(std::vector<std::vector<std::pair<u32, u32>>>& echelon, std::vector<u32>& pivots,
             DenseTail& tail) {
        // bucketed min-column selection, lazily revalidated
        std::vector<std::vector<u32>> bucket(2, std::vector<u32>{});
        auto push_col = [&](u32 c) {
            const u32 k = col_count[c];
            if (k == 0) return;
            if (bucket.size() <= k) bucket.resize(k + 1);
            bucket[k].push_back(c);
        };
        auto rebuild = [&] {
            bucket.assign(2, {});
            for (u32 c = 0; c < ncols; ++c) push_col(c);
        };
        // a column re-pushed below the scan point can be missed within one
        // pass; the rebuild catches it
        auto find_pivot_col = [&]() -> u32 {
            for (u32 k = 1; k < bucket.size(); ++k) {
                auto& b = bucket[k];
                while (!b.empty()) {
                    const u32 c = b.back();
                    b.pop_back();
                    if (col_count[c] == 0) continue;
                    if (col_count[c] != k) {
                        push_col(c);
                        continue;
                    }
                    return c;
                }
            }
            return UINT32_MAX;
        };
        rebuild();
        const bool verbose = std::getenv("KCMLAB_ELIM_VERBOSE") != nullptr;
        u64 dense_avg = 4096;
        if (const char* env = std::getenv("KCMLAB_DENSE_AVG")) dense_avg = std::strtoull(env, nullptr, 10);
        const auto t0 = std::chrono::steady_clock::now();

        while (true) {
            u32 pc = find_pivot_col();
            if (pc == UINT32_MAX) {
                bool any = false;
                for (u32 c = 0; c < ncols && !any; ++c) any = col_count[c] > 0;
                if (!any) break;
                rebuild();
                pc = find_pivot_col();
                if (pc == UINT32_MAX) break;
            }
            if (verbose && pivots.size() % 2048 == 0)
                std::fprintf(stderr, "[elim] pivots=%zu live=%llu nnz=%llu t=%.1fs\n",
                             pivots.size(), (unsigned long long)live_rows,
                             (unsigned long long)live_nnz,
                             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count());
            // fill turned the remainder dense: finish in the flat block
            // (the flat panels win once density passes about an eighth)
            if (live_rows > 512 &&
                (live_nnz * 8 > live_rows * live_rows || live_nnz > dense_avg * live_rows)) {
                if (verbose)
                    std::fprintf(stderr, "[elim] dense switchover: rows=%llu cols~%llu\n",
                                 (unsigned long long)live_rows, (unsigned long long)live_rows);
                dense_switchover(tail);
                return;
            }

            // live rows containing pc
            u32 pr = UINT32_MAX;
            u64 best_len = UINT64_MAX;
            auto& cand = col_rows[pc];
            u64 w = 0;
            u32 dummy;
            for (u64 k = 0; k < cand.size(); ++k) {
                const u32 r = cand[k];
                if (!active[r] || !row_has(r, pc, dummy)) continue;
                cand[w++] = r;
                if (rows[r].size() < best_len) {
                    best_len = rows[r].size();
                    pr = r;
                }
            }
            cand.resize(w);
            if (pr == UINT32_MAX) continue;

            // normalize pivot row to unit pivot
            u32 pv = 0;
            row_has(pr, pc, pv);
            const u64 inv = F.inv(pv);
            for (auto& [c, v] : rows[pr]) v = u32(F.mul(v, inv));

            std::vector<std::pair<u32, u32>> pivot_row = rows[pr];
            retire_row(pr);
            for (u32 r : cand) {
                if (r == pr || !active[r]) continue;
                u32 f = 0;
                if (!row_has(r, pc, f)) continue;
                eliminate_into(r, f, pivot_row);
            }
            cand.clear();
            pivots.push_back(pc);
            echelon.push_back(std::move(pivot_row));
        }
    }
};

} // namespace

u32 rank_eliminate(SparseMatGFp& m) {
    Eliminator e(m);
    std::vector<std::vector<std::pair<u32, u32>>> echelon;
    std::vector<u32> pivots;
    DenseTail tail;
    e.run(echelon, pivots, tail);
    return u32(pivots.size()) + tail.rank;
}

EchelonForm reduce_to_rref(SparseMatGFp& m) {
    Eliminator e(m);
    EchelonForm ef;
    e.run(ef.rows, ef.pivot_col_of_row, ef.tail);
    ef.rank = u32(ef.pivot_col_of_row.size()) + ef.tail.rank;
    ef.is_pivot_col.assign(m.n_cols, 0);
    for (u32 c : ef.pivot_col_of_row) ef.is_pivot_col[c] = 1;
    for (u32 r = 0; r < ef.tail.rank; ++r)
        ef.is_pivot_col[ef.tail.cols[ef.tail.pivot_local[r]]] = 1;
    return ef;
}

KernelBasisGFp kernel_basis(SparseMatGFp& m) {
    const PrimeField F = m.field;
    const u32 dim = m.n_cols;
    EchelonForm ef = reduce_to_rref(m);

    KernelBasisGFp kb;
    kb.field = F;
    kb.dim = dim;
    kb.count = dim - ef.rank;
    kb.data.assign(u64(dim) * kb.count, 0);

    std::vector<u32> free_cols;
    for (u32 c = 0; c < dim; ++c)
        if (!ef.is_pivot_col[c]) free_cols.push_back(c);

    // Back-substitute in reverse elimination order: each echelon row was
    // cleaned of all earlier pivots, so later unknowns are already resolved.
    // Dense-tail pivots come after every sparse pivot.
    const Barrett bar(F.p);
    std::vector<u64> x(dim);
    for (u32 j = 0; j < kb.count; ++j) {
        std::fill(x.begin(), x.end(), 0);
        x[free_cols[j]] = 1;
        for (u32 ri = ef.tail.rank; ri-- > 0;) {
            const u32* row = &ef.tail.rows[u64(ri) * ef.tail.width];
            const u32 pl = ef.tail.pivot_local[ri];
            u64 s = 0;
            for (u32 c = pl + 1; c < ef.tail.width; ++c)
                if (row[c] && x[ef.tail.cols[c]])
                    s = F.add(s, bar.mulmod(row[c], x[ef.tail.cols[c]]));
            x[ef.tail.cols[pl]] = F.neg(s);
        }
        for (u64 ri = ef.rows.size(); ri-- > 0;) {
            const u32 pc = ef.pivot_col_of_row[ri];
            u64 s = 0;
            for (auto& [c, v] : ef.rows[ri]) {
                if (c == pc) continue;
                if (x[c]) s = F.add(s, F.mul(v, x[c]));
            }
            x[pc] = F.neg(s);  // pivot value normalized to 1
        }
        for (u32 i = 0; i < dim; ++i) kb.data[u64(i) * kb.count + j] = x[i];
    }
    return kb;
}

namespace {

// Dense echelon over the coefficient space of a kernel basis (width = count).
struct SmallRref {
    PrimeField F;
    u32 width;
    std::vector<std::vector<u64>> rows;  // reduced rows
    std::vector<u32> lead;               // leading column per row

    SmallRref(PrimeField f, u32 w) : F(f), width(w) {}

    // reduce a row against the echelon; returns true if it adds rank
    bool absorb(std::vector<u64> v) {
        for (u64 r = 0; r < rows.size(); ++r) {
            if (v[lead[r]] == 0) continue;
            const u64 f = v[lead[r]];
            for (u32 c = 0; c < width; ++c)
                if (rows[r][c]) v[c] = F.sub(v[c], F.mul(f, rows[r][c]));
        }
        u32 l = width;
        for (u32 c = 0; c < width; ++c)
            if (v[c]) {
                l = c;
                break;
            }
        if (l == width) return false;
        const u64 inv = F.inv(v[l]);
        for (u32 c = 0; c < width; ++c) v[c] = F.mul(v[c], inv);
        rows.push_back(std::move(v));
        lead.push_back(l);
        return true;
    }

    std::vector<std::vector<u64>> kernel() const {
        std::vector<u8> is_lead(width, 0);
        for (u32 l : lead) is_lead[l] = 1;
        std::vector<std::vector<u64>> out;
        for (u32 f = 0; f < width; ++f) {
            if (is_lead[f]) continue;
            std::vector<u64> x(width, 0);
            x[f] = 1;
            for (u64 r = rows.size(); r-- > 0;) {
                u64 s = 0;
                for (u32 c = 0; c < width; ++c)
                    if (c != lead[r] && rows[r][c] && x[c]) s = F.add(s, F.mul(rows[r][c], x[c]));
                x[lead[r]] = F.neg(s);
            }
            out.push_back(std::move(x));
        }
        return out;
    }
};

} // namespace

std::vector<std::vector<u64>> row_constraint_kernel(const KernelBasisGFp& basis,
                                                    const std::vector<u32>& row_ids) {
    const PrimeField F = basis.field;
    const u32 k = basis.count;
    SmallRref ech(F, k);
    auto row_of = [&](u32 i) {
        std::vector<u64> v(k);
        const u64 off = u64(i) * k;
        for (u32 j = 0; j < k; ++j) v[j] = basis.data[off + j];
        return v;
    };

    // Absorb a first batch, then sweep the rest against the candidate kernel
    // and only eliminate rows that violate it.
    const u64 batch = std::min<u64>(row_ids.size(), u64(k) + 64);
    for (u64 t = 0; t < batch; ++t) ech.absorb(row_of(row_ids[t]));
    auto kern = ech.kernel();
    for (u64 t = batch; t < row_ids.size(); ++t) {
        if (kern.empty()) return {};
        const u64 off = u64(row_ids[t]) * k;
        bool violated = false;
        for (auto& v : kern) {
            u64 s = 0;
            for (u32 j = 0; j < k; ++j)
                if (v[j]) s = F.add(s, F.mul(basis.data[off + j], v[j]));
            if (s != 0) {
                violated = true;
                break;
            }
        }
        if (violated) {
            ech.absorb(row_of(row_ids[t]));
            kern = ech.kernel();
        }
    }
    return kern;
}

u32 streaming_row_rank(const KernelBasisGFp& basis, const std::vector<u32>& row_ids, u32 cap) {
    const u32 k = basis.count;
    SmallRref ech(basis.field, k);
    for (u32 i : row_ids) {
        std::vector<u64> v(k);
        const u64 off = u64(i) * k;
        for (u32 j = 0; j < k; ++j) v[j] = basis.data[off + j];
        ech.absorb(std::move(v));
        if (ech.rows.size() >= cap) break;
    }
    return u32(ech.rows.size());
}

u32 vectors_rank(const PrimeField& field, std::vector<std::vector<u64>> vecs, u32 width) {
    SmallRref ech(field, width);
    for (auto& v : vecs) ech.absorb(std::move(v));
    return u32(ech.rows.size());
}

SparseMatGFp gfp_image(const SparseOperator& h, u64 p) {
    SparseMatGFp m;
    m.field = PrimeField{p};
    m.n_rows = m.n_cols = u32(h.dim());
    m.rows.resize(m.n_rows);
    for (u64 k = 0; k < h.val.size(); ++k) {
        const u64 v = m.field.of_double(h.val[k]);
        if (v) m.rows[h.row[k]].push_back({h.col[k], u32(v)});
    }
    return m;
}

SparseMatGFp gfp_image_columns(const SparseOperator& h, u64 p, const std::vector<u8>& keep_col,
                               std::vector<u32>* col_ids) {
    std::vector<u32> new_id(keep_col.size(), UINT32_MAX);
    u32 next = 0;
    for (u64 c = 0; c < keep_col.size(); ++c)
        if (keep_col[c]) {
            new_id[c] = next++;
            if (col_ids) col_ids->push_back(u32(c));
        }
    SparseMatGFp m;
    m.field = PrimeField{p};
    m.n_rows = u32(h.dim());
    m.n_cols = next;
    m.rows.resize(m.n_rows);
    for (u64 k = 0; k < h.val.size(); ++k) {
        if (!keep_col[h.col[k]]) continue;
        const u64 v = m.field.of_double(h.val[k]);
        if (v) m.rows[h.row[k]].push_back({new_id[h.col[k]], u32(v)});
    }
    return m;
}

} // namespace kcm
