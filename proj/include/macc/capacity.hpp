/*
 * capacity.hpp
 *
 * The secure channel-coding capacity C(alpha) = max I(U;Y) over joint
 * codebook laws p(u,x) whose Bayes estimation risk is at least alpha.
 *
 * Two routes: the closed form for the binary symmetric case,
 * 1 - H(p1 + alpha(1 - 2 p1)), and a generic constrained maximizer over
 * the joint simplex. The constraint sigma(p) >= alpha carves a convex
 * feasible set (sigma is a minimum of linear functions), so infeasible
 * iterates are retracted by bisection toward a maximally secure anchor.
 */

#ifndef MACC_CAPACITY_HPP
#define MACC_CAPACITY_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "macc/prob.hpp"
#include "macc/rng.hpp"
#include "macc/security.hpp"

namespace macc {

struct ProblemSpec {
    Channel ch_yx;        // the communication channel p(y|x)
    DistortionMatrix d;   // estimator distortion
    double alpha = 0.0;   // required security level

    ProblemSpec(Channel ch, DistortionMatrix dist, double a)
        : ch_yx(std::move(ch)), d(std::move(dist)), alpha(a) {
        detail::require(ch_yx.in_size() == d.size(), "ProblemSpec: |X| mismatch");
        detail::require(alpha >= 0.0, "ProblemSpec: alpha < 0");
    }
};

/// Binary symmetric shorthand: BSC(p1) channel, Hamming distortion.
struct BinaryParams {
    double p1 = 0.0;
    double alpha = 0.0;

    BinaryParams(double crossover, double a) : p1(crossover), alpha(a) {
        detail::require(p1 >= 0.0 && p1 <= 0.5, "BinaryParams: p1 outside [0,0.5]");
        detail::require(alpha >= 0.0, "BinaryParams: alpha < 0");
    }
    bool feasible() const { return alpha <= 0.5; }
};

struct SolverConfig {
    int restarts = 32;
    int max_iters = 4000;
    double improve_tol = 1e-9;   // stop when gains over stall_window drop below this
    int stall_window = 50;
    std::size_t u_size = 0;      // 0 -> |X|
    std::uint64_t seed = 0x6d616363ULL;
};

struct SolverDiagnostics {
    int restarts_used = 0;
    double best_second_gap = 0.0;  // best restart value minus runner-up
    bool constraint_active = false;
    bool converged = true;
    long iterations = 0;
};

struct CapacityResult {
    double value = 0.0;
    std::optional<JointUX> argmax_joint;
    bool feasible = false;
    SolverDiagnostics diag;
};

/// C(alpha) = 1 - H(p1 + alpha(1 - 2 p1)) for the binary symmetric
/// case; alpha above 1/2 leaves no feasible perturbation and yields 0.
inline double binary_capacity_closed_form(const BinaryParams& bp) {
    if (!bp.feasible()) return 0.0;
    return 1.0 - binary_entropy(bp.p1 + bp.alpha * (1.0 - 2.0 * bp.p1));
}

/// The maximizing joint for the binary case: gamma0 = beta1 = (1-a)/2,
/// gamma1 = beta0 = a/2, i.e. uniform content with a symmetric
/// perturbation of parameter a.
inline JointUX binary_achieving_joint(double alpha) {
    detail::require(alpha >= 0.0 && alpha <= 0.5, "binary_achieving_joint: alpha outside [0,0.5]");
    const double g0 = (1.0 - alpha) / 2.0, g1 = alpha / 2.0;
    return JointUX(2, 2, {g0, g1, g1, g0});
}

/// True iff some joint law meets the security level, i.e.
/// max_security(d) >= alpha.
inline bool feasibility(const DistortionMatrix& d, double alpha) {
    return max_security(d) >= alpha;
}

namespace detail {

struct Objective {
    const Channel& W;
    std::size_t nu, nx, ny;

    // I(U;Y) for the joint with the given cells (u-major)
    double value(std::span<const double> j) const {
        std::vector<double> m(nu * ny, 0.0), pu(nu, 0.0), py(ny, 0.0);
        accumulate(j, m, pu, py);
        double mi = 0.0;
        for (std::size_t u = 0; u < nu; ++u) {
            if (pu[u] == 0.0) continue;
            for (std::size_t y = 0; y < ny; ++y) {
                const double p = m[u * ny + y];
                if (p == 0.0 || py[y] == 0.0) continue;
                mi += p * std::log2(p / (pu[u] * py[y]));
            }
        }
        return mi < 0.0 ? 0.0 : mi;
    }

    // d I / d j(u,x) = sum_y W(x,y) log2( m(u,y) / (pu(u) py(y)) ), up
    // to an additive constant that projection onto the simplex removes.
    // Log arguments are floored so boundary cells yield large finite
    // pulls instead of infinities.
    void gradient(std::span<const double> j, std::span<double> g) const {
        std::vector<double> m(nu * ny, 0.0), pu(nu, 0.0), py(ny, 0.0);
        accumulate(j, m, pu, py);
        constexpr double kFloor = 1e-300;
        constexpr double kCap = 64.0;
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t x = 0; x < nx; ++x) {
                double s = 0.0;
                for (std::size_t y = 0; y < ny; ++y) {
                    const double w = W(x, y);
                    if (w == 0.0) continue;
                    const double num = std::max(m[u * ny + y], kFloor);
                    const double den = std::max(pu[u] * py[y], kFloor);
                    s += w * std::log2(num / den);
                }
                g[u * nx + x] = std::clamp(s, -kCap, kCap);
            }
    }

  private:
    void accumulate(std::span<const double> j, std::vector<double>& m, std::vector<double>& pu,
                    std::vector<double>& py) const {
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t x = 0; x < nx; ++x) {
                const double p = j[u * nx + x];
                if (p == 0.0) continue;
                pu[u] += p;
                for (std::size_t y = 0; y < ny; ++y) m[u * ny + y] += p * W(x, y);
            }
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t y = 0; y < ny; ++y) py[y] += m[u * ny + y];
    }
};

// Euclidean projection onto the probability simplex.
inline void project_simplex(std::vector<double>& v) {
    std::vector<double> s(v);
    std::sort(s.begin(), s.end(), std::greater<>());
    double acc = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        acc += s[i];
        const double t = (acc - 1.0) / static_cast<double>(i + 1);
        if (s[i] - t > 0.0) {
            rho = i + 1;
            theta = t;
        }
    }
    (void)rho;
    double sum = 0.0;
    for (double& x : v) {
        x = std::max(0.0, x - theta);
        sum += x;
    }
    if (sum > 0.0)
        for (double& x : v) x /= sum;  // absorb rounding
}

inline double sigma_of(std::span<const double> j, std::size_t nu, std::size_t nx,
                       const DistortionMatrix& d) {
    double sigma = 0.0;
    for (std::size_t u = 0; u < nu; ++u)
        sigma += min_weighted_risk(d, j.subspan(u * nx, nx)).second;
    return sigma;
}

// Retract an infeasible point onto the feasible side of sigma = alpha by
// bisecting along the segment toward a maximally secure anchor. sigma is
// concave along the segment, so the feasible sub-segment is the one
// touching the anchor; the returned blend satisfies sigma >= alpha.
inline void retract_feasible(std::vector<double>& j, std::span<const double> anchor,
                             std::size_t nu, std::size_t nx, const DistortionMatrix& d,
                             double alpha) {
    if (sigma_of(j, nu, nx, d) >= alpha) return;
    double lo = 0.0, hi = 1.0;  // blend factor toward anchor; hi feasible
    std::vector<double> cand(j.size());
    const auto blend = [&](double t) {
        for (std::size_t i = 0; i < j.size(); ++i) cand[i] = (1.0 - t) * j[i] + t * anchor[i];
    };
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        blend(mid);
        if (sigma_of(cand, nu, nx, d) >= alpha)
            hi = mid;
        else
            lo = mid;
    }
    blend(hi);
    j = cand;
}

// One restart of projected-gradient ascent with backtracking.
// hit_iter_cap reports whether this restart stopped at the iteration
// cap instead of the stall criterion.
inline std::pair<double, std::vector<double>> ascend(const Objective& obj, std::vector<double> j,
                                                     std::span<const double> anchor,
                                                     const DistortionMatrix& d, double alpha,
                                                     const SolverConfig& cfg, long& iters,
                                                     bool& hit_iter_cap) {
    const std::size_t dim = j.size();
    std::vector<double> g(dim), cand(dim);
    double value = obj.value(j);
    double step = 0.25;
    double window_base = value;
    int window_left = cfg.stall_window;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        obj.gradient(j, g);
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(dim);

        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t i = 0; i < dim; ++i) cand[i] = j[i] + step * (g[i] - mean);
            project_simplex(cand);
            retract_feasible(cand, anchor, obj.nu, obj.nx, d, alpha);
            const double v = obj.value(cand);
            if (v > value) {
                j.swap(cand);
                value = v;
                step *= 1.25;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (--window_left == 0) {
            if (value - window_base < cfg.improve_tol) break;
            window_base = value;
            window_left = cfg.stall_window;
        }
    }
    iters += it;
    hit_iter_cap = (it == cfg.max_iters);
    return {value, std::move(j)};
}

// Local polish: line searches along pairwise mass exchanges
// e_a - e_b, with the feasible sub-interval located by bisection
// (sigma is concave along any line). Golden-section on the objective.
inline std::pair<double, std::vector<double>> exchange_polish(const Objective& obj,
                                                              std::vector<double> j,
                                                              const DistortionMatrix& d,
                                                              double alpha, double value) {
    const std::size_t dim = j.size();
    std::vector<double> cand(dim);
    const auto at = [&](std::size_t a, std::size_t b, double t) {
        cand = j;
        cand[a] += t;
        cand[b] -= t;
    };
    const auto feasible_at = [&](std::size_t a, std::size_t b, double t) {
        at(a, b, t);
        return sigma_of(cand, obj.nu, obj.nx, d) >= alpha;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int pass = 0; pass < 80; ++pass) {
        double pass_gain = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) {
                if (a == b || j[b] <= 0.0) continue;
                double t_max = j[b];
                if (!feasible_at(a, b, t_max)) {  // shrink to the feasible prefix
                    double lo = 0.0, hi = t_max;
                    for (int k = 0; k < 60; ++k) {
                        const double mid = 0.5 * (lo + hi);
                        if (feasible_at(a, b, mid))
                            lo = mid;
                        else
                            hi = mid;
                    }
                    t_max = lo;
                }
                if (t_max <= 0.0) continue;
                // golden-section over [0, t_max]
                double lo = 0.0, hi = t_max;
                double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
                at(a, b, m1);
                double f1 = obj.value(cand);
                at(a, b, m2);
                double f2 = obj.value(cand);
                while (hi - lo > 1e-12) {
                    if (f1 < f2) {
                        lo = m1;
                        m1 = m2;
                        f1 = f2;
                        m2 = lo + gr * (hi - lo);
                        at(a, b, m2);
                        f2 = obj.value(cand);
                    } else {
                        hi = m2;
                        m2 = m1;
                        f2 = f1;
                        m1 = hi - gr * (hi - lo);
                        at(a, b, m1);
                        f1 = obj.value(cand);
                    }
                }
                const double t_best = 0.5 * (lo + hi);
                at(a, b, t_best);
                const double v = obj.value(cand);
                if (v > value && sigma_of(cand, obj.nu, obj.nx, d) >= alpha) {
                    pass_gain += v - value;
                    value = v;
                    j = cand;
                }
            }
        }
        if (pass_gain < 1e-13) break;
    }
    return {value, std::move(j)};
}

// Best feasible point of a coarse composition grid over the joint
// simplex; seeds the ascent near the global basin. Resolution shrinks
// with dimension; empty result means the grid missed the feasible set.
inline std::optional<std::vector<double>> grid_seed(const Objective& obj,
                                                    const DistortionMatrix& d, double alpha) {
    const std::size_t dim = obj.nu * obj.nx;
    int m;
    if (dim <= 4)
        m = 40;
    else if (dim <= 6)
        m = 20;
    else if (dim <= 9)
        m = 12;
    else if (dim <= 12)
        m = 8;
    else
        return std::nullopt;

    std::vector<double> point(dim, 0.0), best;
    double best_v = -1.0;
    std::vector<int> counts(dim, 0);
    const auto scan = [&](auto&& self, std::size_t pos, int left) -> void {
        if (pos == dim - 1) {
            counts[pos] = left;
            for (std::size_t i = 0; i < dim; ++i)
                point[i] = counts[i] / static_cast<double>(m);
            if (sigma_of(point, obj.nu, obj.nx, d) < alpha) return;
            const double v = obj.value(point);
            if (v > best_v) {
                best_v = v;
                best = point;
            }
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[pos] = c;
            self(self, pos + 1, left - c);
        }
    };
    scan(scan, 0, m);
    if (best.empty()) return std::nullopt;
    return best;
}

// Shrinking box-grid refinement around the incumbent: offsets in
// {-w, 0, +w} on all free coordinates with the last coordinate
// absorbing the slack, feasibility-filtered. Tracks optima that sit on
// thin manifolds (exactly balanced posterior pairs) which
// single-exchange moves cannot follow.
inline std::pair<double, std::vector<double>> box_refine(const Objective& obj,
                                                         std::vector<double> j,
                                                         const DistortionMatrix& d, double alpha,
                                                         double value) {
    const std::size_t dim = j.size();
    if (dim < 2 || dim > 9) return {value, std::move(j)};
    const std::size_t free_dims = dim - 1;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < free_dims; ++i) combos *= 3;

    std::vector<double> cand(dim);
    double w = 0.25;
    while (w > 1e-10) {
        bool improved = false;
        for (std::size_t code = 1; code < combos; ++code) {
            std::size_t c = code;
            double sum = 0.0;
            bool ok = true;
            for (std::size_t i = 0; i < free_dims; ++i, c /= 3) {
                const int off = static_cast<int>(c % 3) - 1;
                cand[i] = j[i] + off * w;
                if (cand[i] < 0.0 || cand[i] > 1.0) {
                    ok = false;
                    break;
                }
                sum += cand[i];
            }
            if (!ok || sum > 1.0) continue;
            cand[free_dims] = 1.0 - sum;
            if (sigma_of(cand, obj.nu, obj.nx, d) < alpha) continue;
            const double v = obj.value(cand);
            if (v > value) {
                value = v;
                std::copy(cand.begin(), cand.end(), j.begin());
                improved = true;
            }
        }
        if (!improved) w *= 0.5;
    }
    return {value, std::move(j)};
}

}  // namespace detail

/// Maximize I(U;Y) over joint laws p(u,x) with sigma(p) >= alpha.
/// Infeasible alpha (above max_security) returns value 0 with no joint.
/// Multi-start projected-gradient ascent with a feasibility retraction,
/// followed by a deterministic pairwise-exchange polish of the winner;
/// restart streams derive from (seed, restart index) so the result is
/// independent of evaluation order.
inline CapacityResult information_capacity(const ProblemSpec& spec, const SolverConfig& cfg = {}) {
    const std::size_t nx = spec.ch_yx.in_size();
    const std::size_t nu = cfg.u_size ? cfg.u_size : nx;
    const std::size_t ny = spec.ch_yx.out_size();
    const std::size_t dim = nu * nx;

    CapacityResult res;
    const auto ms = max_security_detail(spec.d);
    if (spec.alpha > ms.value) {
        res.feasible = false;
        res.value = 0.0;
        return res;
    }
    res.feasible = true;

    // anchor: uniform u with the maximin content law at every u
    std::vector<double> anchor(dim, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t x = 0; x < nx; ++x)
            anchor[u * nx + x] = ms.argmax_px[x] / static_cast<double>(nu);

    const detail::Objective obj{spec.ch_yx, nu, nx, ny};

    double best = -1.0, second = -1.0;
    std::vector<double> best_j;
    long iters = 0;
    bool best_hit_cap = false;

    const auto seed_point = detail::grid_seed(obj, spec.d, spec.alpha);

    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> j0(dim);
        if (r == 0) {
            j0 = seed_point ? *seed_point : anchor;
        } else if (r == 1) {
            std::fill(j0.begin(), j0.end(), 1.0 / static_cast<double>(dim));
        } else {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(r));
            double sum = 0.0;
            for (double& v : j0) {
                v = -std::log(1.0 - rng.next_unit());  // exponential -> Dirichlet(1)
                sum += v;
            }
            for (double& v : j0) v /= sum;
        }
        detail::retract_feasible(j0, anchor, nu, nx, spec.d, spec.alpha);
        bool hit_cap = false;
        auto [v, j] = detail::ascend(obj, std::move(j0), anchor, spec.d, spec.alpha, cfg, iters,
                                     hit_cap);
        if (v > best) {
            second = best;
            best = v;
            best_j = std::move(j);
            best_hit_cap = hit_cap;
        } else if (v > second) {
            second = v;
        }
    }

    auto [ev, ej] = detail::exchange_polish(obj, std::move(best_j), spec.d, spec.alpha, best);
    auto [bv, bj] = detail::box_refine(obj, std::move(ej), spec.d, spec.alpha, ev);
    auto [pv, pj] = detail::exchange_polish(obj, std::move(bj), spec.d, spec.alpha, bv);
    best = pv;

    res.value = best;
    res.argmax_joint = JointUX(nu, nx, pj);
    res.diag.restarts_used = restarts;
    res.diag.best_second_gap = (second >= 0.0) ? best - second : 0.0;
    res.diag.iterations = iters;
    res.diag.converged = !best_hit_cap;
    const double sigma = detail::sigma_of(pj, nu, nx, spec.d);
    res.diag.constraint_active = std::abs(sigma - spec.alpha) <= 1e-4;
    return res;
}

enum class SweepMode { closed_form, generic };

struct SweepRow {
    double alpha = 0.0;
    double capacity = 0.0;
};

/// Extracts the crossover of a binary symmetric channel; rejects
/// channels the closed form does not cover.
inline double bsc_crossover(const Channel& ch) {
    detail::require(ch.in_size() == 2 && ch.out_size() == 2, "bsc_crossover: not a 2x2 channel");
    detail::require(std::abs(ch(0, 1) - ch(1, 0)) <= kProbTol, "bsc_crossover: channel not symmetric");
    detail::require(ch(0, 1) <= 0.5, "bsc_crossover: crossover above 1/2");
    return ch(0, 1);
}

/// One (alpha, capacity) row per grid point, produced by the selected
/// route. Closed form requires a binary symmetric channel with Hamming
/// distortion.
inline std::vector<SweepRow> capacity_sweep(const Channel& ch, const DistortionMatrix& d,
                                            std::span<const double> alphas, SweepMode mode,
                                            const SolverConfig& cfg = {}) {
    std::vector<SweepRow> rows;
    rows.reserve(alphas.size());
    if (mode == SweepMode::closed_form) {
        const double p1 = bsc_crossover(ch);
        detail::require(d.size() == 2 && d.is_hamming(), "capacity_sweep: closed form needs Hamming");
        for (double a : alphas)
            rows.push_back({a, binary_capacity_closed_form(BinaryParams(p1, a))});
    } else {
        for (double a : alphas) {
            const ProblemSpec spec(ch, d, a);
            rows.push_back({a, information_capacity(spec, cfg).value});
        }
    }
    return rows;
}

}  // namespace macc

#endif  // MACC_CAPACITY_HPP
