/*
 * security.hpp
 *
 * Estimation-theoretic security of asymmetric codebooks: Bayes-optimal
 * single-letter codebook estimators, the security functional
 * sigma(p) = min_pi E[d(pi(U), X)], its n-fold separability, feasibility
 * bounds, and a small exhaustive oracle over unrestricted n-fold
 * estimator maps.
 */

#ifndef MACC_SECURITY_HPP
#define MACC_SECURITY_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "macc/prob.hpp"

namespace macc {

/// Bounded single-letter distortion; entry (xhat, x) = d(xhat, x) with
/// all entries >= 0 and < bound.
class DistortionMatrix {
  public:
    DistortionMatrix(std::size_t size, std::vector<double> cells, double bound)
        : k_(size), bound_(bound), m_(std::move(cells)) {
        detail::require(k_ >= 1, "DistortionMatrix: empty alphabet");
        detail::require(m_.size() == k_ * k_, "DistortionMatrix: shape mismatch");
        detail::require(std::isfinite(bound_), "DistortionMatrix: bound not finite");
        for (double v : m_)
            detail::require(std::isfinite(v) && v >= 0.0 && v < bound_,
                            "DistortionMatrix: entry outside [0, bound)");
    }

    /// d(xhat,x) = 0 iff xhat == x else 1; bound 2.
    static DistortionMatrix hamming(std::size_t size) {
        std::vector<double> m(size * size, 1.0);
        for (std::size_t i = 0; i < size; ++i) m[i * size + i] = 0.0;
        return DistortionMatrix(size, std::move(m), 2.0);
    }

    std::size_t size() const { return k_; }
    double bound() const { return bound_; }
    double operator()(std::size_t xhat, std::size_t x) const { return m_[xhat * k_ + x]; }

    bool is_hamming() const {
        for (std::size_t a = 0; a < k_; ++a)
            for (std::size_t b = 0; b < k_; ++b)
                if ((*this)(a, b) != (a == b ? 0.0 : 1.0)) return false;
        return true;
    }

  private:
    std::size_t k_;
    double bound_;
    std::vector<double> m_;
};

/// Single-letter estimator pi: U -> X together with the posterior risk
/// it attains at each u (weighted by p(u), i.e. joint-weighted).
struct EstimatorMap {
    std::vector<std::size_t> map;
    std::vector<double> per_u_risk;
};

struct SecurityLevel {
    double sigma = 0.0;
    bool feasible_for(double alpha) const { return sigma >= alpha; }
};

/// min_xhat sum_x d(xhat,x) w(x) over a nonnegative weight vector,
/// lowest-index tie break. Returns {argmin, value}.
inline std::pair<std::size_t, double> min_weighted_risk(const DistortionMatrix& d,
                                                        std::span<const double> w) {
    std::size_t best = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t xhat = 0; xhat < d.size(); ++xhat) {
        double risk = 0.0;
        for (std::size_t x = 0; x < d.size(); ++x) risk += d(xhat, x) * w[x];
        if (risk < best_risk) {
            best_risk = risk;
            best = xhat;
        }
    }
    return {best, best_risk};
}

/// Bayes-optimal single-letter estimator: for each u with p(u) > 0,
/// map(u) = argmin_xhat sum_x d(xhat,x) p(u,x); ties to the lowest
/// index. Zero-mass u get map(u) = 0 with zero risk.
inline EstimatorMap bayes_estimator(const JointUX& j, const DistortionMatrix& d) {
    detail::require(d.size() == j.cols(), "bayes_estimator: dimension mismatch");
    EstimatorMap e;
    e.map.assign(j.rows(), 0);
    e.per_u_risk.assign(j.rows(), 0.0);
    for (std::size_t u = 0; u < j.rows(); ++u) {
        double mass = 0.0;
        for (std::size_t x = 0; x < j.cols(); ++x) mass += j(u, x);
        if (mass == 0.0) continue;
        const auto [xhat, risk] = min_weighted_risk(d, j.row(u));
        e.map[u] = xhat;
        e.per_u_risk[u] = risk;
    }
    return e;
}

/// sigma = sum_u per_u_risk(u); the Bayes risk of reconstructing X from
/// U. Under Hamming distortion this is Pr(X_MAP != X).
inline SecurityLevel security_level(const JointUX& j, const DistortionMatrix& d) {
    const auto e = bayes_estimator(j, d);
    double sigma = 0.0;
    for (double r : e.per_u_risk) sigma += r;
    return {sigma};
}

/// Expected n-fold distortion of the per-letter Bayes estimator applied
/// coordinate-wise to an i.i.d. (U^n, X^n): (1/n) sum_i of the single
/// letter minimum, which collapses to the single-letter value.
inline double nfold_bayes_risk(const JointUX& j, const DistortionMatrix& d, int n) {
    detail::require(n >= 1, "nfold_bayes_risk: n < 1");
    const double per_letter = security_level(j, d).sigma;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += per_letter;
    return total / static_cast<double>(n);
}

/// Exact minimum of E[d_n(pi^n(U^n), X^n)] over ALL maps
/// pi^n : U^n -> X^n (no sequential or separable restriction): the
/// objective decomposes over the domain points u^n, so each u^n is
/// assigned its own jointly optimal sequence xhat^n by full enumeration
/// of X^n against the full sequence law p(u^n, x^n) = prod_i p(u_i,x_i).
/// Enforced small: |U|, |X| <= 3 and n <= 3.
inline double brute_force_nfold_min(const JointUX& j, const DistortionMatrix& d, int n) {
    detail::require(d.size() == j.cols(), "brute_force_nfold_min: dimension mismatch");
    detail::require(n >= 1 && n <= 3, "brute_force_nfold_min: n outside 1..3");
    detail::require(j.rows() <= 3 && j.cols() <= 3, "brute_force_nfold_min: alphabet > 3");

    const std::size_t nu = j.rows(), nx = j.cols();
    const int nn = std::clamp(n, 1, 3);  // bound visible to the optimizer
    std::size_t un = 1, xn = 1;
    for (int i = 0; i < nn; ++i) {
        un *= nu;
        xn *= nx;
    }
    const auto digits = [nn](std::size_t code, std::size_t base, std::size_t* out) {
        for (int i = 0; i < nn; ++i) {
            out[i] = code % base;
            code /= base;
        }
    };

    std::size_t useq[3], xseq[3], hseq[3];
    double total = 0.0;
    for (std::size_t uc = 0; uc < un; ++uc) {
        digits(uc, nu, useq);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t hc = 0; hc < xn; ++hc) {
            digits(hc, nx, hseq);
            double cost = 0.0;
            for (std::size_t xc = 0; xc < xn; ++xc) {
                digits(xc, nx, xseq);
                double p = 1.0, dist = 0.0;
                for (int i = 0; i < nn; ++i) {
                    p *= j(useq[i], xseq[i]);
                    dist += d(hseq[i], xseq[i]);
                }
                cost += p * dist;
            }
            best = std::min(best, cost);
        }
        total += best;
    }
    return total / static_cast<double>(n);
}

struct MaxSecurity {
    double value = 0.0;
    std::vector<double> argmax_px;  // distribution on X attaining the value
};

namespace detail {

// f(q) = min_xhat sum_x d(xhat,x) q(x); concave in q (min of linear).
inline double game_payoff(const DistortionMatrix& d, std::span<const double> q) {
    return min_weighted_risk(d, q).second;
}

}  // namespace detail

/// sigma_max = max over distributions q on X of min_xhat sum d(xhat,x)q(x)
/// (the value of the finite matrix game between the codebook designer
/// and the estimator). A joint that places the maximin posterior at
/// every u attains it, so sigma <= sigma_max for every valid joint.
/// Hamming has the closed form 1 - 1/|X|; otherwise a coarse simplex
/// grid seeds a shrinking pattern search (the payoff is concave), run
/// down to a 1e-7 pattern width for a value tolerance of 1e-6.
inline MaxSecurity max_security_detail(const DistortionMatrix& d) {
    const std::size_t k = d.size();
    if (d.is_hamming()) {
        MaxSecurity ms;
        ms.value = 1.0 - 1.0 / static_cast<double>(k);
        ms.argmax_px.assign(k, 1.0 / static_cast<double>(k));
        return ms;
    }
    if (k == 1) return {d(0, 0), {1.0}};

    std::vector<double> best_q(k, 1.0 / static_cast<double>(k));
    double best = detail::game_payoff(d, best_q);

    // coarse global grid over the simplex (composition enumeration)
    const int m0 = (k == 2) ? 512 : (k == 3 ? 80 : 32);
    std::vector<int> counts(k, 0);
    std::vector<double> q(k, 0.0);
    const auto scan = [&](auto&& self, std::size_t pos, int left) -> void {
        if (pos == k - 1) {
            counts[pos] = left;
            for (std::size_t i = 0; i < k; ++i) q[i] = counts[i] / static_cast<double>(m0);
            const double v = detail::game_payoff(d, q);
            if (v > best) {
                best = v;
                best_q = q;
            }
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[pos] = c;
            self(self, pos + 1, left - c);
        }
    };
    scan(scan, 0, m0);

    // pattern search: move mass between coordinate pairs; shrink the
    // step only when no move improves, expand never (concave payoff)
    double step = 1.0 / static_cast<double>(m0);
    std::vector<double> cand(k);
    while (step > 1e-7) {
        bool improved = false;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                if (a == b) continue;
                const double delta = std::min(step, best_q[b]);
                if (delta <= 0.0) continue;
                cand = best_q;
                cand[a] += delta;
                cand[b] -= delta;
                const double v = detail::game_payoff(d, cand);
                if (v > best) {
                    best = v;
                    best_q = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }

    return {best, std::move(best_q)};
}

inline double max_security(const DistortionMatrix& d) { return max_security_detail(d).value; }

}  // namespace macc

#endif  // MACC_SECURITY_HPP
