/*
 * prob.hpp
 *
 * Finite-alphabet probability primitives: distributions, row-stochastic
 * channels, joint pmfs, Markov-chain composition, entropy and mutual
 * information (all information quantities in bits).
 *
 * Alphabets are index sets 0..K-1. Construction validates; inputs that
 * fail normalization are rejected, never renormalized.
 */

#ifndef MACC_PROB_HPP
#define MACC_PROB_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace macc {

/// Normalization tolerance for pmf sums.
inline constexpr double kProbTol = 1e-9;

struct ValidationResult {
    bool ok = true;
    std::string detail;
};

/// Checks the pmf invariants: every entry in [0,1], entries sum to 1
/// within kProbTol. Returns a diagnosis instead of throwing.
inline ValidationResult validate_dist(std::span<const double> probs) {
    if (probs.empty()) return {false, "empty distribution"};
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0) || p > 1.0 || !std::isfinite(p)) {
            std::ostringstream os;
            os << "entry " << i << " = " << p << " outside [0,1]";
            return {false, os.str()};
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
        std::ostringstream os;
        os << "sum = " << sum << " not 1 within " << kProbTol;
        return {false, os.str()};
    }
    return {};
}

namespace detail {
inline void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}
// shave accumulated round-off from quantities that are probabilities
// in exact arithmetic
inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }
inline void require_pmf(std::span<const double> p, const char* what) {
    const auto r = validate_dist(p);
    if (!r.ok) throw std::invalid_argument(std::string(what) + ": " + r.detail);
}
}  // namespace detail

/// Probability mass function over symbols 0..size-1.
class Dist {
  public:
    explicit Dist(std::vector<double> probs) : p_(std::move(probs)) {
        detail::require_pmf(p_, "Dist");
    }

    static Dist uniform(std::size_t k) {
        detail::require(k >= 1, "Dist::uniform: empty alphabet");
        return Dist(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    static Dist point_mass(std::size_t k, std::size_t at) {
        detail::require(k >= 1 && at < k, "Dist::point_mass: bad index");
        std::vector<double> p(k, 0.0);
        p[at] = 1.0;
        return Dist(std::move(p));
    }

    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    std::span<const double> probs() const { return p_; }

  private:
    std::vector<double> p_;
};

/// Conditional pmf matrix; row r is p(output | input = r).
class Channel {
  public:
    Channel(std::size_t in_size, std::size_t out_size, std::vector<double> rows)
        : in_(in_size), out_(out_size), m_(std::move(rows)) {
        detail::require(in_ >= 1 && out_ >= 1, "Channel: empty alphabet");
        detail::require(m_.size() == in_ * out_, "Channel: shape mismatch");
        for (std::size_t r = 0; r < in_; ++r)
            detail::require_pmf(row(r), "Channel row");
    }

    static Channel identity(std::size_t k) {
        std::vector<double> m(k * k, 0.0);
        for (std::size_t i = 0; i < k; ++i) m[i * k + i] = 1.0;
        return Channel(k, k, std::move(m));
    }

    /// Binary symmetric channel with the given crossover probability.
    static Channel bsc(double crossover) {
        detail::require(crossover >= 0.0 && crossover <= 1.0, "bsc: crossover outside [0,1]");
        return Channel(2, 2, {1.0 - crossover, crossover, crossover, 1.0 - crossover});
    }

    std::size_t in_size() const { return in_; }
    std::size_t out_size() const { return out_; }
    double operator()(std::size_t in, std::size_t out) const { return m_[in * out_ + out]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(m_.data() + r * out_, out_);
    }

  private:
    std::size_t in_, out_;
    std::vector<double> m_;
};

/// Joint pmf over a pair of finite alphabets; rows index the first
/// variable. Tagged so that p(u,x) and p(u,y) tables stay distinct types.
template <class Tag>
class JointT {
  public:
    JointT(std::size_t rows, std::size_t cols, std::vector<double> cells)
        : r_(rows), c_(cols), m_(std::move(cells)) {
        detail::require(r_ >= 1 && c_ >= 1, "Joint: empty alphabet");
        detail::require(m_.size() == r_ * c_, "Joint: shape mismatch");
        detail::require_pmf(m_, "Joint");
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    double operator()(std::size_t r, std::size_t c) const { return m_[r * c_ + c]; }
    std::span<const double> cells() const { return m_; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(m_.data() + r * c_, c_);
    }

  private:
    std::size_t r_, c_;
    std::vector<double> m_;
};

using JointUX = JointT<struct TagUX>;  // entry (u,x) = p(u,x)
using JointUY = JointT<struct TagUY>;  // entry (u,y) = p(u,y)

/// p(y,u) for the chain U <-> X <-> Y:
/// entry (u,y) = sum_x px(x) p(y|x) p(u|x).
inline JointUY compose_markov(const Dist& px, const Channel& ch_yx, const Channel& ch_ux) {
    detail::require(ch_yx.in_size() == px.size() && ch_ux.in_size() == px.size(),
                    "compose_markov: dimension mismatch");
    const std::size_t nu = ch_ux.out_size(), ny = ch_yx.out_size(), nx = px.size();
    std::vector<double> cells(nu * ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        const double w = px[x];
        if (w == 0.0) continue;
        for (std::size_t u = 0; u < nu; ++u) {
            const double wu = w * ch_ux(x, u);
            if (wu == 0.0) continue;
            for (std::size_t y = 0; y < ny; ++y) cells[u * ny + y] += wu * ch_yx(x, y);
        }
    }
    for (double& c : cells) c = detail::clamp01(c);
    return JointUY(nu, ny, std::move(cells));
}

/// Joint codebook law from a content marginal and a perturbation channel:
/// entry (u,x) = px(x) p(u|x).
inline JointUX joint_ux_from(const Dist& px, const Channel& ch_ux) {
    detail::require(ch_ux.in_size() == px.size(), "joint_ux_from: dimension mismatch");
    const std::size_t nu = ch_ux.out_size(), nx = px.size();
    std::vector<double> cells(nu * nx, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t x = 0; x < nx; ++x) cells[u * nx + x] = px[x] * ch_ux(x, u);
    return JointUX(nu, nx, std::move(cells));
}

/// p(u,y) induced by a joint codebook law through the channel:
/// entry (u,y) = sum_x p(u,x) p(y|x). Equals compose_markov applied to
/// the marginal/conditional split of the joint, without the division.
inline JointUY joint_uy_from(const JointUX& j, const Channel& ch_yx) {
    detail::require(ch_yx.in_size() == j.cols(), "joint_uy_from: dimension mismatch");
    const std::size_t nu = j.rows(), nx = j.cols(), ny = ch_yx.out_size();
    std::vector<double> cells(nu * ny, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t x = 0; x < nx; ++x) {
            const double w = j(u, x);
            if (w == 0.0) continue;
            for (std::size_t y = 0; y < ny; ++y) cells[u * ny + y] += w * ch_yx(x, y);
        }
    for (double& c : cells) c = detail::clamp01(c);
    return JointUY(nu, ny, std::move(cells));
}

template <class Tag>
std::pair<Dist, Dist> marginals(const JointT<Tag>& j) {
    std::vector<double> pr(j.rows(), 0.0), pc(j.cols(), 0.0);
    for (std::size_t r = 0; r < j.rows(); ++r)
        for (std::size_t c = 0; c < j.cols(); ++c) {
            pr[r] += j(r, c);
            pc[c] += j(r, c);
        }
    for (double& v : pr) v = detail::clamp01(v);
    for (double& v : pc) v = detail::clamp01(v);
    return {Dist(std::move(pr)), Dist(std::move(pc))};
}

/// Conditional pmf matrix whose rows may be undefined (conditioning
/// symbol has zero marginal mass). Undefined rows must be excluded from
/// downstream sums; channel() converts when every row is defined.
struct Conditional {
    std::size_t in = 0, out = 0;
    std::vector<double> rows;       // in x out, row-major; undefined rows all zero
    std::vector<bool> defined;      // per input symbol

    double operator()(std::size_t i, std::size_t o) const { return rows[i * out + o]; }
    bool is_defined(std::size_t i) const { return defined[i]; }

    Channel channel() const {
        for (std::size_t i = 0; i < in; ++i)
            detail::require(defined[i], "Conditional::channel: undefined row");
        return Channel(in, out, rows);
    }
};

struct Conditionals {
    Conditional x_given_u;  // rows indexed by u
    Conditional u_given_x;  // rows indexed by x
};

/// Bayes'-rule conditionals of a joint; zero-mass symbols are flagged.
inline Conditionals conditionals(const JointUX& j) {
    const auto [pu, px] = marginals(j);
    Conditionals c;
    c.x_given_u.in = j.rows();
    c.x_given_u.out = j.cols();
    c.x_given_u.rows.assign(j.rows() * j.cols(), 0.0);
    c.x_given_u.defined.assign(j.rows(), false);
    for (std::size_t u = 0; u < j.rows(); ++u) {
        if (pu[u] == 0.0) continue;
        c.x_given_u.defined[u] = true;
        for (std::size_t x = 0; x < j.cols(); ++x)
            c.x_given_u.rows[u * j.cols() + x] = detail::clamp01(j(u, x) / pu[u]);
    }
    c.u_given_x.in = j.cols();
    c.u_given_x.out = j.rows();
    c.u_given_x.rows.assign(j.cols() * j.rows(), 0.0);
    c.u_given_x.defined.assign(j.cols(), false);
    for (std::size_t x = 0; x < j.cols(); ++x) {
        if (px[x] == 0.0) continue;
        c.u_given_x.defined[x] = true;
        for (std::size_t u = 0; u < j.rows(); ++u)
            c.u_given_x.rows[x * j.rows() + u] = detail::clamp01(j(u, x) / px[x]);
    }
    return c;
}

/// H = -sum p log2 p, with 0 log 0 = 0.
inline double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

inline double entropy(const Dist& d) { return entropy_bits(d.probs()); }

/// Binary entropy H(p) in bits.
inline double binary_entropy(double p) {
    detail::require(p >= 0.0 && p <= 1.0, "binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// I(U;Y) = sum p(u,y) log2( p(u,y) / (p(u)p(y)) ); zero-mass terms
/// contribute 0. Round-off below zero is clamped.
inline double mutual_information(const JointUY& j) {
    const auto [pu, py] = marginals(j);
    double mi = 0.0;
    for (std::size_t u = 0; u < j.rows(); ++u) {
        if (pu[u] == 0.0) continue;
        for (std::size_t y = 0; y < j.cols(); ++y) {
            const double p = j(u, y);
            if (p == 0.0 || py[y] == 0.0) continue;
            mi += p * std::log2(p / (pu[u] * py[y]));
        }
    }
    return mi < 0.0 ? 0.0 : mi;
}

}  // namespace macc

#endif  // MACC_PROB_HPP
