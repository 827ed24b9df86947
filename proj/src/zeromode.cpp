#include "kcmlab/zeromode.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kcmlab/lapack.hpp"

namespace kcm {

namespace {

Eigen::MatrixXd to_dense(const SparseOperator& h) {
    const u64 d = h.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (u64 k = 0; k < h.val.size(); ++k) m(h.row[k], h.col[k]) += h.val[k];
    return m;
}

// Chebyshev-filtered subspace iteration for the kernel of a symmetric sparse
// operator with a known kernel dimension. Filters H^2 over [cut^2, bound^2]
// with the cutoff refreshed from the current Ritz values.
Eigen::MatrixXd krylov_kernel(const SparseOperator& h, u64 want, double tol) {
    const u64 d = h.dim();
    const u64 cols = std::min<u64>(d, want + std::max<u64>(8, want / 4));
    const double bound = h.norm_bound() + 1e-12;

    std::mt19937_64 gen(12345);
    std::normal_distribution<double> dist;
    Eigen::MatrixXd x(d, cols);
    for (u64 j = 0; j < cols; ++j)
        for (u64 i = 0; i < d; ++i) x(i, j) = dist(gen);

    std::vector<double> tmp(d), tmp2(d);
    auto apply_h2 = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        apply_omp(h, in.data(), tmp.data());
        apply_omp(h, tmp.data(), tmp2.data());
        out = Eigen::Map<Eigen::VectorXd>(tmp2.data(), d);
    };

    double cut = bound / 50.0;
    for (int round = 0; round < 60; ++round) {
        // Chebyshev recurrence in H^2 mapped from [cut^2, bound^2] to [-1, 1]
        const double a = cut * cut, b = bound * bound;
        const double e = (b - a) / 2.0, c = (b + a) / 2.0;
        const int degree = std::min(600, 40 + 40 * round);
        Eigen::VectorXd t0(d), t1(d), t2(d), y(d);
        for (u64 j = 0; j < cols; ++j) {
            t0 = x.col(j);
            apply_h2(t0, y);
            t1 = (y - c * t0) / e;
            for (int k = 2; k <= degree; ++k) {
                apply_h2(t1, y);
                t2 = 2.0 * (y - c * t1) / e - t0;
                t0.swap(t1);
                t1.swap(t2);
            }
            x.col(j) = t1;
        }
        // orthonormalize and Rayleigh-Ritz on H
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(d, cols);
        Eigen::MatrixXd hx(d, cols);
        for (u64 j = 0; j < cols; ++j) {
            apply_omp(h, x.col(j).data(), tmp.data());
            hx.col(j) = Eigen::Map<Eigen::VectorXd>(tmp.data(), d);
        }
        Eigen::MatrixXd small = x.transpose() * hx;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(small);
        // order Ritz pairs by |theta|
        std::vector<u64> order(cols);
        for (u64 j = 0; j < cols; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](u64 l, u64 r) {
            return std::abs(es.eigenvalues()[l]) < std::abs(es.eigenvalues()[r]);
        });
        Eigen::MatrixXd rot(cols, cols);
        for (u64 j = 0; j < cols; ++j) rot.col(j) = es.eigenvectors().col(order[j]);
        x = x * rot;
        hx = hx * rot;

        bool done = true;
        for (u64 j = 0; j < want && done; ++j) {
            const double theta = x.col(j).dot(hx.col(j));
            const double res = (hx.col(j) - theta * x.col(j)).norm();
            if (res > tol || std::abs(theta) > tol) done = false;
        }
        if (done) return x.leftCols(want);
        // refresh the cutoff from the first Ritz value outside the kernel
        if (want < cols) {
            const double next = std::abs(x.col(want).dot(hx.col(want)));
            if (next > 10 * tol) cut = std::max(next / 2.0, bound * 1e-6);
        }
    }
    throw std::runtime_error("kernel iteration did not converge within the round budget");
}

} // namespace

ZeroModeBasis zero_mode_basis(const SparseOperator& h, const ZeroModeBasisOptions& opts) {
    const u64 d = h.dim();
    const ZeroModeCount zc = zero_mode_count(h, opts.count);

    ZeroModeBasis out;
    out.basis = h.basis;
    if (zc.count == 0) {
        out.vectors = Eigen::MatrixXd::Zero(d, 0);
        return out;
    }
    if (d <= opts.dense_budget) {
        Eigen::MatrixXd m = to_dense(h);
        Eigen::VectorXd ev;
        sym_eig(m, ev, true);
        double max_sv = 0.0;
        for (i64 i = 0; i < ev.size(); ++i) max_sv = std::max(max_sv, std::abs(ev[i]));
        std::vector<u64> keep;
        for (i64 i = 0; i < ev.size(); ++i)
            if (max_sv == 0.0 || std::abs(ev[i]) < 1e-10 * max_sv) keep.push_back(u64(i));
        if (i64(keep.size()) != zc.count)
            throw std::runtime_error("dense kernel count disagrees with the exact rank");
        out.vectors.resize(d, keep.size());
        for (u64 j = 0; j < keep.size(); ++j) out.vectors.col(j) = m.col(keep[j]);
    } else {
        out.vectors = krylov_kernel(h, u64(zc.count), 1e-10);
    }
    return out;
}

ObservableSpec ObservableSpec::identity() {
    ObservableSpec o;
    o.terms.push_back({1.0, 0, 0});
    return o;
}

ObservableSpec ObservableSpec::east_boundary(const Geometry& geom, int range) {
    ObservableSpec o;
    const int L = geom.site_count();
    for (int j = 1; j <= range && L - j >= 1; ++j)
        o.terms.push_back({1.0, (u64(1) << geom.bit(L)) | (u64(1) << geom.bit(L - j)), 0});
    return o;
}

ObservableSpec ObservableSpec::west_boundary(const Geometry& geom, int range) {
    ObservableSpec o;
    const int L = geom.site_count();
    for (int j = 1; j <= range && 1 + j <= L; ++j)
        o.terms.push_back({1.0, (u64(1) << geom.bit(1)) | (u64(1) << geom.bit(1 + j)), 0});
    return o;
}

ObservableSpec ObservableSpec::window(const Geometry& geom, int j, int range) {
    if (j < 1 || j + range > geom.site_count()) throw std::domain_error("window outside chain");
    ObservableSpec o;
    for (int t = 0; t <= range; ++t) o.terms.push_back({1.0, u64(1) << geom.bit(j + t), 0});
    return o;
}

ObservableSpec ObservableSpec::north_east_boundary(const Geometry& geom) {
    ObservableSpec o;
    const int lx = geom.lx, ly = geom.ly;
    for (int x = 2; x <= lx; ++x) {
        const u64 m = (u64(1) << geom.bit(x, ly)) | (u64(1) << geom.bit(x - 1, ly)) |
                      (u64(1) << geom.bit(x, ly - 1));
        o.terms.push_back({1.0, m, 0});
    }
    for (int y = 2; y <= ly; ++y) {
        const u64 m = (u64(1) << geom.bit(lx, y)) | (u64(1) << geom.bit(lx - 1, y)) |
                      (u64(1) << geom.bit(lx, y - 1));
        o.terms.push_back({1.0, m, 0});
    }
    return o;
}

ObservableSpec ObservableSpec::pair_flip_boundary(const Geometry& geom, bool right_side,
                                                  bool filled_unit) {
    // A flip couples the edge to an added unit exactly when the last site is
    // occupied and the second-to-last matches the unit.
    ObservableSpec o;
    const int L = geom.site_count();
    const int last = right_side ? L : 1;
    const int prev = right_side ? L - 1 : 2;
    ObservableSpec::Term t;
    t.weight = 1.0;
    t.occupied = u64(1) << geom.bit(last);
    if (filled_unit)
        t.occupied |= u64(1) << geom.bit(prev);
    else
        t.empty = u64(1) << geom.bit(prev);
    o.terms.push_back(t);
    return o;
}

ObservableSpec ObservableSpec::boundary_for(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::east: return east_boundary(spec.geom, spec.range);
        case Family::east_west: {
            ObservableSpec o = east_boundary(spec.geom, spec.range);
            const ObservableSpec w = west_boundary(spec.geom, spec.range);
            o.terms.insert(o.terms.end(), w.terms.begin(), w.terms.end());
            return o;
        }
        case Family::north_east: return north_east_boundary(spec.geom);
        case Family::pair_flip:
            throw std::invalid_argument(
                "pair-flip boundedness depends on the padding unit; combine "
                "pair_flip_boundary terms explicitly");
    }
    throw std::logic_error("unreachable");
}

Eigen::MatrixXd theta_matrix(const ZeroModeBasis& zm, const ObservableSpec& obs) {
    const u64 d = zm.basis->dim();
    Eigen::VectorXd diag(d);
    for (u64 i = 0; i < d; ++i) diag[i] = obs.value(zm.basis->states[i]);
    return zm.vectors.transpose() * diag.asDiagonal() * zm.vectors;
}

Eigen::MatrixXd theta_kernel_states(const ZeroModeBasis& zm, const Eigen::MatrixXd& theta) {
    const u64 k = theta.rows();
    if (k == 0) return Eigen::MatrixXd::Zero(zm.basis->dim(), 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta);
    const double thr = std::max(1e-10 * es.eigenvalues().sum() / double(k), 1e-24);
    std::vector<u64> keep;
    for (u64 j = 0; j < k; ++j)
        if (es.eigenvalues()[j] < thr) keep.push_back(j);
    Eigen::MatrixXd out(zm.basis->dim(), keep.size());
    for (u64 j = 0; j < keep.size(); ++j) {
        out.col(j) = zm.vectors * es.eigenvectors().col(keep[j]);
        // fix the global phase: largest-magnitude amplitude real positive
        u64 arg = 0;
        double best = 0.0;
        for (u64 i = 0; i < u64(out.rows()); ++i)
            if (std::abs(out(i, j)) > best) {
                best = std::abs(out(i, j));
                arg = i;
            }
        if (out(arg, j) < 0.0) out.col(j) = -out.col(j);
    }
    return out;
}

double StateVector::norm() const {
    double s = 0.0;
    for (auto& [k, v] : amp) s += v * v;
    return std::sqrt(s);
}

void StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
    for (auto& [k, v] : amp) v /= n;
}

namespace {

// residual map r = H v - E v computed term by term on the amplitude support
double residual_norm(const std::map<u64, double>& amp, const RuleSet& rules, double energy) {
    std::map<u64, double> r;
    std::vector<std::pair<u64, double>> nbr;
    for (auto& [s, a] : amp) {
        rule_neighbors(rules, s, nbr);
        for (auto& [t, w] : nbr) r[t] += w * a;
        for (const DiagRule& dr : rules.diag)
            if ((s >> dr.bit) & 1) r[s] += dr.amplitude * a;
        if (energy != 0.0) r[s] -= energy * a;
    }
    double n2 = 0.0;
    for (auto& [s, v] : r) n2 += v * v;
    return std::sqrt(n2);
}

ModelSpec respan(const ModelSpec& model, const Geometry& geom) {
    ModelSpec m = model;
    m.geom = geom;
    return m;
}

u64 remap_rect(u64 bits, const Geometry& from, const Geometry& to) {
    u64 out = 0;
    for (int y = 1; y <= from.ly; ++y)
        for (int x = 1; x <= from.lx; ++x)
            if ((bits >> from.bit(x, y)) & 1) out |= u64(1) << to.bit(x, y);
    return out;
}

} // namespace

double eigen_residual(const StateVector& v, const ModelSpec& model, double energy) {
    const RuleSet rules = compile_rules(respan(model, v.geom));
    return residual_norm(v.amp, rules, energy);
}

BoundStateCertificate certify_bound(const StateVector& v, const ModelSpec& model,
                                    const PaddingSpec& padding, int q_max, double energy) {
    BoundStateCertificate cert;
    cert.padding = padding;
    cert.q_max = q_max;
    cert.energy = energy;

    const bool two_d = v.geom.kind == Geometry::Kind::rectangle;
    bool left_ok = true, right_ok = true, all_ok = true;
    for (int n = 0; n <= q_max; ++n) {
        for (int m = 0; m + n <= q_max; ++m) {
            if (n == 0 && m == 0) continue;
            double res;
            if (!two_d) {
                const int ln = n * padding.left_len, lm = m * padding.right_len;
                const int total = ln + v.geom.site_count() + lm;
                if (total > 64) throw std::length_error("padded state exceeds 64 sites");
                u64 pad_l = 0, pad_r = 0;
                for (int q = 0; q < n; ++q)
                    pad_l |= padding.left_unit.bits << (q * padding.left_len);
                for (int q = 0; q < m; ++q)
                    pad_r |= padding.right_unit.bits << (q * padding.right_len);
                StateVector big;
                big.geom = Geometry::chain(total);
                for (auto& [s, a] : v.amp)
                    big.amp[pad_l | (s << ln) | (pad_r << (ln + v.geom.site_count()))] = a;
                res = eigen_residual(big, model, energy);
            } else {
                // 2D: n empty rows on top, m empty columns on the right
                const Geometry big_geom = Geometry::rectangle(v.geom.lx + m, v.geom.ly + n);
                StateVector big;
                big.geom = big_geom;
                for (auto& [s, a] : v.amp) big.amp[remap_rect(s, v.geom, big_geom)] = a;
                res = eigen_residual(big, model, energy);
            }
            cert.residuals.push_back({n, m, res});
            const bool ok = res < cert.tolerance;
            if (!ok) {
                if (m == 0) left_ok = false;
                if (n == 0) right_ok = false;
                all_ok = false;
            }
        }
    }
    (void)all_ok;
    cert.left_bound = left_ok;
    cert.right_bound = right_ok;
    cert.bound = left_ok && right_ok;
    if (model.family == Family::east && !two_d && padding.left_unit.bits == 0)
        cert.analytic_left = true;  // empty left sites are unreachable
    return cert;
}

namespace {

PaddingSpec empty_padding() {
    PaddingSpec p;
    p.left_unit = FockState{0};
    p.left_len = 1;
    p.right_unit = FockState{0};
    p.right_len = 1;
    return p;
}

BoundStateSearch certify_columns(const Eigen::MatrixXd& cols, const ZeroModeBasis& zm,
                                 const ModelSpec& model, const PaddingSpec& padding, int q_max) {
    BoundStateSearch out;
    out.vectors = cols;
    for (i64 j = 0; j < cols.cols(); ++j) {
        StateVector v = extract(cols.col(j), *zm.basis);
        out.certificates.push_back(certify_bound(v, model, padding, q_max, 0.0));
    }
    return out;
}

} // namespace

BoundStateSearch find_bound_states(const ZeroModeBasis& zm, const ObservableSpec& obs,
                                   const ModelSpec& model, int q_max) {
    const Eigen::MatrixXd theta = theta_matrix(zm, obs);
    const Eigen::MatrixXd states = theta_kernel_states(zm, theta);
    return certify_columns(states, zm, model, empty_padding(), q_max);
}

FactorizableSearch find_factorizable(const ZeroModeBasis& zm, const ModelSpec& model) {
    if (model.geom.kind != Geometry::Kind::chain)
        throw std::domain_error("factorizable search sweeps 1D windows");
    const int L = model.geom.site_count();
    const int r = model.range;
    FactorizableSearch out;
    const u64 d = zm.basis->dim();
    Eigen::MatrixXd pool(d, 0);
    for (int j = 2; j + r <= L - 1; ++j) {
        const Eigen::MatrixXd win = theta_kernel_states(zm, theta_matrix(zm, ObservableSpec::window(model.geom, j, r)));
        out.window_dims.push_back(win.cols());
        if (win.cols() == 0) continue;
        Eigen::MatrixXd merged(d, pool.cols() + win.cols());
        merged << pool, win;
        pool = std::move(merged);
    }
    // rank of the union by column-pivoted QR
    if (pool.cols() == 0) {
        out.vectors = pool;
        out.count = 0;
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pool);
        qr.setThreshold(1e-8);
        out.count = qr.rank();
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, out.count);
        out.vectors = q;
    }
    out.ratio = zm.count() ? double(out.count) / double(zm.count()) : 0.0;
    return out;
}

namespace {

// rows of the basis whose diagonal observable value is nonzero
std::vector<u32> support_rows(const SectorBasis& basis, const ObservableSpec& obs) {
    std::vector<u32> rows;
    for (u64 i = 0; i < basis.dim(); ++i)
        if (obs.value(basis.states[i]) != 0.0) rows.push_back(u32(i));
    return rows;
}

struct PrimePassResult {
    i64 n_zm = 0;
    i64 n_bs = -1;
    i64 n_fs = -1;
    std::vector<i64> window_dims;

    bool operator==(const PrimePassResult&) const = default;
};

PrimePassResult exact_pass(const SparseOperator& h, const ModelSpec& model, u64 p,
                           const ExactStructureOptions& opts) {
    if (h.has_diagonal())
        throw std::domain_error("exact structure counts need a purely off-diagonal operator");
    const SectorBasis& basis = *h.basis;
    const u64 d = basis.dim();

    // kernel basis assembled from the two chiral blocks
    const ParityOp op = basis.geom.kind == Geometry::Kind::chain ? ParityOp::sublattice_even
                                                                 : ParityOp::checkerboard;
    const ChiralColoring coloring = color(basis, op);
    std::vector<u8> odd(d), even(d);
    for (u64 i = 0; i < d; ++i) {
        odd[i] = coloring.parity[i];
        even[i] = !coloring.parity[i];
    }
    KernelBasisGFp full;
    full.field = PrimeField{p};
    full.dim = u32(d);
    {
        std::vector<u32> odd_ids, even_ids;
        SparseMatGFp c = gfp_image_columns(h, p, odd, &odd_ids);
        SparseMatGFp ct = gfp_image_columns(h, p, even, &even_ids);
        KernelBasisGFp ko = kernel_basis(c);
        KernelBasisGFp ke = kernel_basis(ct);
        full.count = ko.count + ke.count;
        full.data.assign(u64(d) * full.count, 0);
        for (u32 i = 0; i < ko.dim; ++i)
            for (u32 j = 0; j < ko.count; ++j)
                full.data[u64(odd_ids[i]) * full.count + j] = ko.data[u64(i) * ko.count + j];
        for (u32 i = 0; i < ke.dim; ++i)
            for (u32 j = 0; j < ke.count; ++j)
                full.data[u64(even_ids[i]) * full.count + ko.count + j] =
                    ke.data[u64(i) * ke.count + j];
    }

    PrimePassResult res;
    res.n_zm = full.count;

    if (opts.want_bs) {
        if (model.family == Family::pair_flip) {
            // union over the four padding-unit combinations
            std::vector<std::vector<u64>> pool;
            for (bool lf : {false, true}) {
                for (bool rf : {false, true}) {
                    ObservableSpec o = ObservableSpec::pair_flip_boundary(model.geom, false, lf);
                    const ObservableSpec orr =
                        ObservableSpec::pair_flip_boundary(model.geom, true, rf);
                    o.terms.insert(o.terms.end(), orr.terms.begin(), orr.terms.end());
                    auto kern = row_constraint_kernel(full, support_rows(basis, o));
                    for (auto& v : kern) pool.push_back(std::move(v));
                }
            }
            res.n_bs = vectors_rank(full.field, std::move(pool), full.count);
        } else {
            const ObservableSpec o = ObservableSpec::boundary_for(model);
            res.n_bs = i64(row_constraint_kernel(full, support_rows(basis, o)).size());
        }
    }
    if (opts.want_fs && basis.geom.kind == Geometry::Kind::chain) {
        const int L = basis.geom.site_count();
        std::vector<std::vector<u64>> pool;
        for (int j = 2; j + model.range <= L - 1; ++j) {
            const ObservableSpec w = ObservableSpec::window(basis.geom, j, model.range);
            auto kern = row_constraint_kernel(full, support_rows(basis, w));
            res.window_dims.push_back(i64(kern.size()));
            for (auto& v : kern) pool.push_back(std::move(v));
        }
        res.n_fs = vectors_rank(full.field, std::move(pool), full.count);
    }
    return res;
}

} // namespace

ExactStructureCounts exact_structure_counts(const SparseOperator& h, const ModelSpec& model,
                                            const ExactStructureOptions& opts) {
    const auto primes = word_primes(opts.max_primes, opts.rng_seed);
    std::vector<PrimePassResult> passes;
    ExactStructureCounts out;
    // the first `required_agreement` passes run concurrently over primes;
    // very large sectors run serially to keep the dense-tail memory bounded
    const int batch = (h.dim() > 150000)
                          ? 1
                          : std::min<int>(opts.required_agreement, int(primes.size()));
    passes.resize(batch);
    if (batch > 1) {
        // an inactive enclosing region would still suppress the kernels'
        // inner parallelism, so only open one when it does work
#pragma omp parallel for schedule(dynamic, 1)
        for (int k = 0; k < batch; ++k) passes[k] = exact_pass(h, model, primes[k], opts);
    } else {
        for (int k = 0; k < batch; ++k) passes[k] = exact_pass(h, model, primes[k], opts);
    }
    for (int k = 0; k < batch; ++k) out.primes_used.push_back(primes[k]);

    for (int next = batch;; ++next) {
        const auto best = *std::min_element(
            passes.begin(), passes.end(),
            [](const PrimePassResult& a, const PrimePassResult& b) { return a.n_zm < b.n_zm; });
        int agree = 0;
        for (const auto& r : passes)
            if (r == best) ++agree;
        if (agree >= opts.required_agreement) {
            out.n_zm = best.n_zm;
            out.n_bs = best.n_bs;
            out.n_fs = best.n_fs;
            out.window_dims = best.window_dims;
            return out;
        }
        if (next >= int(primes.size())) break;
        passes.push_back(exact_pass(h, model, primes[next], opts));
        out.primes_used.push_back(primes[next]);
    }
    throw std::runtime_error("prime fields disagree on structure counts");
}

Eigen::MatrixXd observable_kernel_in_subspace(const SectorBasis& basis,
                                              const Eigen::MatrixXd& subspace,
                                              const ObservableSpec& obs) {
    const u64 d = basis.dim();
    Eigen::VectorXd diag(d);
    for (u64 i = 0; i < d; ++i) diag[i] = obs.value(basis.states[i]);
    const Eigen::MatrixXd theta = subspace.transpose() * diag.asDiagonal() * subspace;
    const u64 k = theta.rows();
    if (k == 0) return Eigen::MatrixXd::Zero(d, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta);
    const double thr = std::max(1e-10 * es.eigenvalues().sum() / double(k), 1e-24);
    std::vector<u64> keep;
    for (u64 j = 0; j < k; ++j)
        if (es.eigenvalues()[j] < thr) keep.push_back(j);
    Eigen::MatrixXd out(d, keep.size());
    for (u64 j = 0; j < keep.size(); ++j) out.col(j) = subspace * es.eigenvectors().col(keep[j]);
    return out;
}

StateVector east_west_mpo_state(int range, int particles) {
    if (range % 2 != 0) throw std::domain_error("the construction needs an even range");
    if (particles < 2) throw std::domain_error("need at least two particles");
    const int L = (range + 1) * (particles - 1) + 1;
    if (L > 64) throw std::length_error("chain exceeds 64 sites");

    u64 seed = 0;
    for (int k = 0; k < particles; ++k) seed |= u64(1) << (k * (range + 1));

    // bond-3 transfer contraction; entries act on disjoint site windows
    struct Component {
        u64 bits;
        double a;
    };
    std::vector<std::vector<Component>> bond(3);
    bond[0].push_back({seed, 1.0});

    auto occupied = [](u64 b, int bit) { return (b >> bit) & 1; };
    for (int k = 0; k < particles; ++k) {
        const int i = k * (range + 1);  // bit of site (range+1)k + 1
        std::vector<std::vector<Component>> next(3);
        for (int from = 0; from < 3; ++from) {
            for (const Component& comp : bond[from]) {
                if (from == 0) {
                    next[0].push_back(comp);  // identity
                    // A^+ = sigma+_i sum_n (-1)^n sigma-_{i+n} sigma-_{i+r+1-n}
                    for (int n = 1; n <= range / 2; ++n) {
                        if (occupied(comp.bits, i)) break;
                        if (!occupied(comp.bits, i + n) || !occupied(comp.bits, i + range + 1 - n))
                            continue;
                        u64 b = comp.bits | (u64(1) << i);
                        b &= ~(u64(1) << (i + n));
                        b &= ~(u64(1) << (i + range + 1 - n));
                        next[1].push_back({b, comp.a * ((n & 1) ? -1.0 : 1.0)});
                    }
                    // A^- = sigma-_i sum_n (-1)^n sigma+_{i+n} sigma+_{i+r+1-n}
                    for (int n = 1; n <= range / 2; ++n) {
                        if (!occupied(comp.bits, i)) break;
                        if (occupied(comp.bits, i + n) || occupied(comp.bits, i + range + 1 - n))
                            continue;
                        u64 b = comp.bits & ~(u64(1) << i);
                        b |= u64(1) << (i + n);
                        b |= u64(1) << (i + range + 1 - n);
                        next[2].push_back({b, comp.a * ((n & 1) ? -1.0 : 1.0)});
                    }
                } else if (from == 1) {
                    if (!occupied(comp.bits, i)) next[0].push_back({comp.bits | (u64(1) << i), comp.a});
                } else {
                    if (occupied(comp.bits, i)) next[0].push_back({comp.bits & ~(u64(1) << i), comp.a});
                }
            }
        }
        bond = std::move(next);
    }

    StateVector out;
    out.geom = Geometry::chain(L);
    for (const Component& c : bond[0]) out.amp[c.bits] += c.a;
    for (auto it = out.amp.begin(); it != out.amp.end();)
        it = (it->second == 0.0) ? out.amp.erase(it) : std::next(it);
    out.normalize();
    return out;
}

StateVector build_factorizable(const std::vector<StateVector>& parts,
                               const std::vector<StateVector>& paddings, int range) {
    if (parts.size() < 2) throw std::invalid_argument("need at least two building states");
    if (paddings.size() + 1 != parts.size())
        throw std::invalid_argument("need one padding string between consecutive parts");
    for (const StateVector& pad : paddings) {
        if (pad.geom.site_count() < range + 1)
            throw std::invalid_argument("padding shorter than range+1 sites would couple the parts");
        if (pad.amp.size() != 1)
            throw std::invalid_argument("padding must be a single product state");
    }
    StateVector out = parts[0];
    for (u64 k = 1; k < parts.size(); ++k) {
        const StateVector& pad = paddings[k - 1];
        const u64 pad_bits = pad.amp.begin()->first;
        const int l0 = out.geom.site_count();
        const int lp = pad.geom.site_count();
        const int l1 = parts[k].geom.site_count();
        StateVector merged;
        merged.geom = Geometry::chain(l0 + lp + l1);
        for (auto& [s0, a0] : out.amp)
            for (auto& [s1, a1] : parts[k].amp)
                merged.amp[s0 | (pad_bits << l0) | (s1 << (l0 + lp))] = a0 * a1;
        out = std::move(merged);
    }
    return out;
}

double dynamical_symmetry_check(const StateVector& psi1, const StateVector& psi2,
                                int padding_sites, int extra_sites, const ModelSpec& model) {
    if (psi1.geom.site_count() != psi2.geom.site_count())
        throw std::invalid_argument("bound states must share the site count");
    int n1 = -1;
    for (auto& [s, a] : psi1.amp) {
        if (n1 < 0) n1 = popcount(s);
        if (popcount(s) != n1) throw std::invalid_argument("psi1 mixes particle numbers");
    }
    for (auto& [s, a] : psi2.amp)
        if (popcount(s) != n1) throw std::invalid_argument("particle numbers differ");

    const int l = psi1.geom.site_count();
    const int total = l + padding_sites + extra_sites;
    const ModelSpec big = respan(model, Geometry::chain(total));
    const RuleSet rules = compile_rules(big);

    // J = |psi1><psi2| (x) |000><000| (x) 1 as a sparse operator on bitmasks
    struct JEntry {
        u64 ket, bra;
        double v;
    };
    std::vector<JEntry> jops;
    const u64 n_rest = u64(1) << extra_sites;
    for (auto& [a, va] : psi1.amp)
        for (auto& [b, vb] : psi2.amp)
            for (u64 rest = 0; rest < n_rest; ++rest)
                jops.push_back({a | (rest << (l + padding_sites)), b | (rest << (l + padding_sites)),
                                va * vb});

    // [H, J] accumulated entrywise: H J has entries H[t,ket] J[ket,bra] at
    // (t, bra); J H has J[ket,bra] H[bra,t] at (ket, t).
    std::map<std::pair<u64, u64>, double> comm;
    std::vector<std::pair<u64, double>> nbr;
    for (const JEntry& e : jops) {
        rule_neighbors(rules, e.ket, nbr);
        for (auto& [t, w] : nbr) comm[{t, e.bra}] += w * e.v;
        rule_neighbors(rules, e.bra, nbr);
        for (auto& [t, w] : nbr) comm[{e.ket, t}] -= w * e.v;
    }
    double n2 = 0.0;
    for (auto& [rc, v] : comm) n2 += v * v;
    return std::sqrt(n2);
}

Eigen::VectorXd embed(const StateVector& v, const SectorBasis& basis) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.dim());
    for (auto& [s, a] : v.amp) {
        const auto idx = basis.lookup(s);
        if (!idx) throw std::domain_error("state outside the basis: " + state_to_string(s, basis.geom));
        out[*idx] = a;
    }
    return out;
}

StateVector extract(const Eigen::VectorXd& dense, const SectorBasis& basis, double cutoff) {
    StateVector v;
    v.geom = basis.geom;
    for (u64 i = 0; i < basis.dim(); ++i)
        if (std::abs(dense[i]) > cutoff) v.amp[basis.states[i]] = dense[i];
    return v;
}

} // namespace kcm
