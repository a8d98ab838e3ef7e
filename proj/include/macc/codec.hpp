/*
 * codec.hpp
 *
 * Operational validation of the capacity theory: i.i.d. generation of
 * matched encoder/decoder codebook pairs, transmission through the
 * channel, maximum-likelihood and jointly-typical decoding, error-rate
 * estimation, and the attacker's codebook-estimation experiment.
 *
 * Experiments derive one random stream per trial from (seed, trial), so
 * reports are bit-identical for a given seed regardless of thread count
 * or scheduling. Binary-alphabet experiments run on bit-packed rows
 * scored with popcounts; the packed scorer accumulates the same grouped
 * count-times-log sums as the generic scorer, so the two paths make
 * identical decisions.
 */

#ifndef MACC_CODEC_HPP
#define MACC_CODEC_HPP

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "macc/prob.hpp"
#include "macc/rng.hpp"
#include "macc/security.hpp"

namespace macc {

using Symbol = std::uint8_t;

struct CodeParams {
    std::size_t n = 1;        // blocklength
    std::uint64_t M = 2;      // number of messages
    std::uint64_t seed = 0;

    double rate_bits() const { return std::log2(static_cast<double>(M)) / static_cast<double>(n); }
};

enum class DecoderKind { max_likelihood, typicality };

struct DecoderConfig {
    DecoderKind kind = DecoderKind::max_likelihood;
    double epsilon = 0.05;  // typicality slack, bits per symbol
};

struct SimReport {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;      // decisions != transmitted message, nulls included
    std::uint64_t collisions = 0;  // trials aborted on duplicate decoder rows
    double empirical_pe = 0.0;
    double attacker_distortion_mean = 0.0;
    double attacker_distortion_stderr = 0.0;
};

struct ExperimentOptions {
    bool fresh_codebook = true;   // regenerate the codebook every trial
    bool random_message = false;  // default: message fixed to the first index
    unsigned threads = 1;         // 0 -> hardware concurrency
    bool force_general = false;   // disable the bit-packed path (testing)
};

/// Encoder and decoder codewords drawn jointly i.i.d. from a codebook
/// law p(u,x); enc holds the content rows, dec the published rows.
struct CodebookPair {
    std::size_t n = 0;
    std::uint64_t M = 0;
    std::vector<Symbol> enc;  // M x n row-major, symbols over X
    std::vector<Symbol> dec;  // M x n row-major, symbols over U
    std::uint64_t dec_duplicates = 0;  // rows equal to an earlier row

    std::span<const Symbol> enc_row(std::uint64_t w) const {
        return {enc.data() + w * n, n};
    }
    std::span<const Symbol> dec_row(std::uint64_t w) const {
        return {dec.data() + w * n, n};
    }
};

namespace detail {

inline std::uint64_t hash_bytes(std::span<const Symbol> row) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Symbol s : row) h = mix64(h ^ s);
    return h;
}

// Count rows that duplicate an earlier row: hash, sort, then verify
// byte-wise within each equal-hash run so hash collisions cannot
// miscount in either direction.
inline std::uint64_t count_duplicate_rows(const std::vector<Symbol>& rows, std::size_t n,
                                          std::uint64_t M) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys(M);
    for (std::uint64_t w = 0; w < M; ++w)
        keys[w] = {hash_bytes({rows.data() + w * n, n}), w};
    std::sort(keys.begin(), keys.end());
    std::uint64_t dups = 0;
    for (std::uint64_t lo = 0; lo < M;) {
        std::uint64_t hi = lo + 1;
        while (hi < M && keys[hi].first == keys[lo].first) ++hi;
        for (std::uint64_t i = lo + 1; i < hi; ++i)
            for (std::uint64_t k = lo; k < i; ++k) {
                const auto* a = rows.data() + keys[i].second * n;
                const auto* b = rows.data() + keys[k].second * n;
                if (std::equal(a, a + n, b)) {
                    ++dups;
                    break;
                }
            }
        lo = hi;
    }
    return dups;
}

}  // namespace detail

/// M*n i.i.d. draws of (u,x) pairs from the joint law; deterministic in
/// the supplied stream. Duplicate decoder rows are counted and reported.
inline CodebookPair generate_codebooks(const JointUX& j, const CodeParams& cp, RngStream& rng) {
    detail::require(cp.n >= 1 && cp.M >= 1, "generate_codebooks: empty code");
    detail::require(j.rows() <= 256 && j.cols() <= 256, "generate_codebooks: alphabet > 256");
    CodebookPair cb;
    cb.n = cp.n;
    cb.M = cp.M;
    cb.enc.resize(cp.M * cp.n);
    cb.dec.resize(cp.M * cp.n);
    const std::size_t nx = j.cols();
    const auto cells = j.cells();
    for (std::uint64_t w = 0; w < cp.M; ++w)
        for (std::size_t i = 0; i < cp.n; ++i) {
            const std::size_t cell = rng.categorical(cells);
            cb.dec[w * cp.n + i] = static_cast<Symbol>(cell / nx);
            cb.enc[w * cp.n + i] = static_cast<Symbol>(cell % nx);
        }
    cb.dec_duplicates = detail::count_duplicate_rows(cb.dec, cb.n, cb.M);
    return cb;
}

/// Memoryless transmission: each output symbol drawn from the channel
/// row of the corresponding input symbol.
inline std::vector<Symbol> transmit(std::span<const Symbol> x_word, const Channel& ch_yx,
                                    RngStream& rng) {
    std::vector<Symbol> y(x_word.size());
    for (std::size_t i = 0; i < x_word.size(); ++i)
        y[i] = static_cast<Symbol>(rng.categorical(ch_yx.row(x_word[i])));
    return y;
}

/// p(y|u) induced by the codebook law through the channel. Rows for
/// zero-mass u are set uniform; such symbols never occur in codewords.
inline Channel effective_channel(const JointUX& j, const Channel& ch_yx) {
    const JointUY m = joint_uy_from(j, ch_yx);
    const auto [pu, py] = marginals(m);
    const std::size_t nu = m.rows(), ny = m.cols();
    std::vector<double> rows(nu * ny, 0.0);
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t y = 0; y < ny; ++y)
            rows[u * ny + y] =
                pu[u] > 0.0 ? detail::clamp01(m(u, y) / pu[u]) : 1.0 / static_cast<double>(ny);
    return Channel(nu, ny, std::move(rows));
}

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Grouped log-likelihood score: sum over (u,y) of count(u,y) * log2
// p(y|u), accumulated u-major. Any observed zero-probability transition
// scores -inf exactly, so all impossible rows tie.
struct MlScorer {
    std::size_t nu, ny;
    std::vector<double> logp;       // log2 p(y|u), -inf where p == 0
    std::vector<std::uint8_t> bad;  // p == 0

    explicit MlScorer(const Channel& ch_yu)
        : nu(ch_yu.in_size()), ny(ch_yu.out_size()), logp(nu * ny), bad(nu * ny) {
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t y = 0; y < ny; ++y) {
                const double p = ch_yu(u, y);
                bad[u * ny + y] = (p == 0.0);
                logp[u * ny + y] = p > 0.0 ? std::log2(p) : 0.0;
            }
    }

    double from_counts(std::span<const std::uint64_t> counts) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nu * ny; ++i) {
            if (counts[i] == 0) continue;
            if (bad[i]) return kNegInf;
            s += static_cast<double>(counts[i]) * logp[i];
        }
        return s;
    }

    double score(std::span<const Symbol> u_row, std::span<const Symbol> y) const {
        std::vector<std::uint64_t> counts(nu * ny, 0);
        for (std::size_t i = 0; i < y.size(); ++i) ++counts[u_row[i] * ny + y[i]];
        return from_counts(counts);
    }
};

// Empirical typicality statistics, also accumulated from counts.
struct TypicalityScorer {
    std::size_t nu, ny;
    double eps, hu, hy, huy;
    std::vector<double> nlog_pu, nlog_py, nlog_m;  // -log2 p, +inf where p == 0

    TypicalityScorer(const JointUY& joint_uy, double epsilon)
        : nu(joint_uy.rows()), ny(joint_uy.cols()), eps(epsilon) {
        detail::require(eps > 0.0, "typicality: epsilon must be positive");
        const auto [pu, py] = marginals(joint_uy);
        hu = entropy_bits(pu.probs());
        hy = entropy_bits(py.probs());
        huy = entropy_bits(joint_uy.cells());
        const auto neg_log = [](double p) {
            return p > 0.0 ? -std::log2(p) : std::numeric_limits<double>::infinity();
        };
        for (std::size_t u = 0; u < nu; ++u) nlog_pu.push_back(neg_log(pu[u]));
        for (std::size_t y = 0; y < ny; ++y) nlog_py.push_back(neg_log(py[y]));
        for (double c : joint_uy.cells()) nlog_m.push_back(neg_log(c));
    }

    double empirical(std::span<const std::uint64_t> counts, std::span<const double> nlog,
                     std::size_t n) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nlog.size(); ++i) {
            if (counts[i] == 0) continue;
            if (std::isinf(nlog[i])) return std::numeric_limits<double>::infinity();
            s += static_cast<double>(counts[i]) * nlog[i];
        }
        return s / static_cast<double>(n);
    }

    bool y_typical(std::span<const std::uint64_t> y_counts, std::size_t n) const {
        return std::abs(empirical(y_counts, nlog_py, n) - hy) < eps;
    }

    // joint and u-marginal conditions for one candidate row
    bool row_typical(std::span<const std::uint64_t> joint_counts,
                     std::span<const std::uint64_t> u_counts, std::size_t n) const {
        if (!(std::abs(empirical(u_counts, nlog_pu, n) - hu) < eps)) return false;
        return std::abs(empirical(joint_counts, nlog_m, n) - huy) < eps;
    }
};

}  // namespace detail

/// argmax over messages of sum_i log2 p(y_i | u_i(w)); ties to the
/// lowest index. For a binary symmetric effective channel with
/// crossover below 1/2 this is minimum-Hamming-distance decoding.
inline std::uint64_t decode_ml(std::span<const Symbol> y_word, const CodebookPair& cb,
                               const Channel& ch_yu) {
    detail::require(y_word.size() == cb.n, "decode_ml: length mismatch");
    const detail::MlScorer scorer(ch_yu);
    std::uint64_t best = 0;
    double best_score = detail::kNegInf;
    for (std::uint64_t w = 0; w < cb.M; ++w) {
        const double s = scorer.score(cb.dec_row(w), y_word);
        if (s > best_score) {
            best_score = s;
            best = w;
        }
    }
    return best;
}

/// Jointly typical decoding: returns w iff exactly one decoder row
/// satisfies the three empirical-entropy conditions together with
/// y_word; otherwise the null decision (nullopt).
inline std::optional<std::uint64_t> decode_typicality(std::span<const Symbol> y_word,
                                                      const CodebookPair& cb,
                                                      const JointUY& joint_uy, double eps) {
    detail::require(y_word.size() == cb.n, "decode_typicality: length mismatch");
    const detail::TypicalityScorer ts(joint_uy, eps);
    const std::size_t n = cb.n;

    std::vector<std::uint64_t> y_counts(ts.ny, 0);
    for (Symbol s : y_word) ++y_counts[s];
    if (!ts.y_typical(y_counts, n)) return std::nullopt;

    std::optional<std::uint64_t> hit;
    std::vector<std::uint64_t> jc(ts.nu * ts.ny), uc(ts.nu);
    for (std::uint64_t w = 0; w < cb.M; ++w) {
        std::fill(jc.begin(), jc.end(), 0);
        std::fill(uc.begin(), uc.end(), 0);
        const auto row = cb.dec_row(w);
        for (std::size_t i = 0; i < n; ++i) {
            ++jc[row[i] * ts.ny + y_word[i]];
            ++uc[row[i]];
        }
        if (ts.row_typical(jc, uc, n)) {
            if (hit) return std::nullopt;  // not unique
            hit = w;
        }
    }
    return hit;
}

// ---------------------------------------------------------------------------
// experiment internals
// ---------------------------------------------------------------------------

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

template <class Fn>
void parallel_for(std::uint64_t items, unsigned threads, Fn&& fn) {
    threads = std::min<std::uint64_t>(threads, items);
    if (threads <= 1) {
        for (std::uint64_t i = 0; i < items; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= items) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

// Bit-packed rows for |U| = |Y| = 2. Bit i of a row lives in word
// i / 64 at position i % 64; the final word is masked.
struct PackedShape {
    std::size_t n = 0, words = 0;
    std::uint64_t last_mask = ~0ULL;

    explicit PackedShape(std::size_t len) : n(len), words((len + 63) / 64) {
        const std::size_t rem = len % 64;
        if (rem) last_mask = (1ULL << rem) - 1;
    }
};

struct PackedCounts {
    std::uint64_t c00, c01, c10, c11;
};

inline PackedCounts packed_counts(const PackedShape& sh, const std::uint64_t* u,
                                  const std::uint64_t* y) {
    std::uint64_t n11 = 0, nu1 = 0, ny1 = 0;
    for (std::size_t k = 0; k < sh.words; ++k) {
        n11 += std::popcount(u[k] & y[k]);
        nu1 += std::popcount(u[k]);
        ny1 += std::popcount(y[k]);
    }
    const std::uint64_t n = sh.n;
    return {n - nu1 - ny1 + n11, ny1 - n11, nu1 - n11, n11};
}

inline double packed_ml_score(const MlScorer& sc, const PackedCounts& c) {
    const std::uint64_t counts[4] = {c.c00, c.c01, c.c10, c.c11};
    return sc.from_counts({counts, 4});
}

// Draw one decoder bit from the u-marginal exactly the way the generic
// path's two-symbol categorical does, so packed and generic runs stay
// draw-for-draw identical.
inline bool draw_u_bit(RngStream& rng, double pu0) { return !(rng.next_unit() < pu0); }

// A trial's working state for binary experiments.
struct PackedTrial {
    PackedShape sh;
    std::vector<std::uint64_t> u_star, y;  // transmitted decoder row, channel output
    std::vector<Symbol> x_star;

    explicit PackedTrial(std::size_t n) : sh(n), u_star(sh.words, 0), y(sh.words, 0), x_star(n) {}

    // joint (u,x) draw for the transmitted message, then transmission
    void draw_pair_and_transmit(const JointUX& j, const Channel& ch_yx, RngStream& rng) {
        std::fill(u_star.begin(), u_star.end(), 0);
        std::fill(y.begin(), y.end(), 0);
        const auto cells = j.cells();
        const std::size_t nx = j.cols();
        for (std::size_t i = 0; i < sh.n; ++i) {
            const std::size_t cell = rng.categorical(cells);
            if (cell / nx) u_star[i / 64] |= 1ULL << (i % 64);
            x_star[i] = static_cast<Symbol>(cell % nx);
        }
        for (std::size_t i = 0; i < sh.n; ++i)
            if (!(rng.next_unit() < ch_yx(x_star[i], 0))) y[i / 64] |= 1ULL << (i % 64);
    }

    // one competitor decoder row drawn from the u-marginal
    void draw_marginal_row(RngStream& rng, double pu0, bool uniform_fast,
                           std::uint64_t* out) const {
        if (uniform_fast) {
            for (std::size_t k = 0; k < sh.words; ++k) out[k] = rng.next_u64();
            out[sh.words - 1] &= sh.last_mask;
            return;
        }
        std::fill(out, out + sh.words, 0);
        for (std::size_t i = 0; i < sh.n; ++i)
            if (draw_u_bit(rng, pu0)) out[i / 64] |= 1ULL << (i % 64);
    }
};

struct TrialOutcome {
    std::uint8_t error = 0;
    std::uint8_t collision = 0;
};

// Epoch-tagged open-addressing set for duplicate-row detection; reused
// across trials without clearing. Hash matches are verified against the
// actual rows, so hash collisions cannot produce false duplicates.
struct DupSet {
    std::vector<std::uint64_t> hash;
    std::vector<std::uint32_t> epoch;
    std::vector<std::uint64_t> owner;
    std::uint32_t cur = 0;
    std::size_t mask = 0;

    void begin_trial(std::uint64_t items) {
        std::size_t cap = 64;
        while (cap < 2 * items) cap <<= 1;
        if (hash.size() != cap) {
            hash.assign(cap, 0);
            epoch.assign(cap, 0);
            owner.assign(cap, 0);
            cur = 1;
        } else if (++cur == 0) {
            std::fill(epoch.begin(), epoch.end(), 0);
            cur = 1;
        }
        mask = cap - 1;
    }

    template <class SameRow>
    bool insert_or_dup(std::uint64_t h, std::uint64_t row, SameRow&& same) {
        std::size_t i = h & mask;
        for (;;) {
            if (epoch[i] != cur) {
                epoch[i] = cur;
                hash[i] = h;
                owner[i] = row;
                return false;
            }
            if (hash[i] == h && same(owner[i], row)) return true;
            i = (i + 1) & mask;
        }
    }
};

}  // namespace detail

/// Fresh-codebook (or fixed-codebook) error experiment: per trial, the
/// transmitted message's (enc, dec) rows are drawn jointly, the other
/// decoder rows from the u-marginal, the codeword is sent through the
/// channel and decoded. Trials whose decoder rows collide are aborted,
/// counted in `collisions`, and scored as errors (a null decision).
inline SimReport run_error_experiment(const JointUX& j, const Channel& ch_yx,
                                      const CodeParams& cp, const DecoderConfig& dec,
                                      std::uint64_t trials, const ExperimentOptions& opts = {}) {
    detail::require(cp.M >= 2, "run_error_experiment: need at least two messages");
    detail::require(trials >= 1, "run_error_experiment: no trials");
    detail::require(j.cols() == ch_yx.in_size(), "run_error_experiment: dimension mismatch");
    detail::require(cp.M * cp.n <= (1ULL << 28),
                    "run_error_experiment: codebook too large to materialize");

    const auto [pu, px] = marginals(j);
    const Channel ch_yu = effective_channel(j, ch_yx);
    const JointUY joint_uy = joint_uy_from(j, ch_yx);
    const detail::MlScorer ml(ch_yu);
    const detail::TypicalityScorer typ(joint_uy, dec.epsilon);

    const bool packed = !opts.force_general && j.rows() == 2 && ch_yx.out_size() == 2;
    const bool uniform_fast = packed && pu[0] == 0.5;
    // likelihood strictly decreasing in Hamming distance: argmax by
    // integer distance, identical decisions to the scored path
    const bool distance_mode =
        packed && ch_yu(0, 1) == ch_yu(1, 0) && ch_yu(0, 0) == ch_yu(1, 1) && ch_yu(0, 1) < 0.5 &&
        ch_yu(0, 1) > 0.0;
    const unsigned threads = detail::resolve_threads(opts.threads);

    std::vector<detail::TrialOutcome> out(trials);

    // fixed-codebook mode: one shared codebook from a reserved stream
    std::optional<CodebookPair> fixed;
    if (!opts.fresh_codebook) {
        RngStream cb_rng(cp.seed, ~0ULL);
        fixed = generate_codebooks(j, cp, cb_rng);
    }

    const auto run_general = [&](std::uint64_t t) {
        RngStream rng(cp.seed, t);
        const std::uint64_t w_star = opts.random_message ? rng.below(cp.M) : 0;

        std::vector<Symbol> dec_rows;
        std::vector<Symbol> x_star(cp.n);
        std::vector<Symbol> u_star(cp.n);
        if (fixed) {
            x_star.assign(fixed->enc_row(w_star).begin(), fixed->enc_row(w_star).end());
            u_star.assign(fixed->dec_row(w_star).begin(), fixed->dec_row(w_star).end());
        } else {
            const auto cells = j.cells();
            for (std::size_t i = 0; i < cp.n; ++i) {
                const std::size_t cell = rng.categorical(cells);
                u_star[i] = static_cast<Symbol>(cell / j.cols());
                x_star[i] = static_cast<Symbol>(cell % j.cols());
            }
        }
        const std::vector<Symbol> y = transmit(x_star, ch_yx, rng);
        if (!fixed) {
            dec_rows.resize(cp.M * cp.n);
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                if (w == w_star) {
                    std::copy(u_star.begin(), u_star.end(), dec_rows.begin() + w * cp.n);
                    continue;
                }
                for (std::size_t i = 0; i < cp.n; ++i)
                    dec_rows[w * cp.n + i] = static_cast<Symbol>(rng.categorical(pu.probs()));
            }
        }
        const std::vector<Symbol>& rows = fixed ? fixed->dec : dec_rows;

        const std::uint64_t dups =
            fixed ? fixed->dec_duplicates : detail::count_duplicate_rows(rows, cp.n, cp.M);
        if (dups > 0) {
            out[t] = {1, 1};
            return;
        }

        bool error;
        if (dec.kind == DecoderKind::max_likelihood) {
            std::uint64_t best = 0;
            double best_score = detail::kNegInf;
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                const double s = ml.score({rows.data() + w * cp.n, cp.n}, y);
                if (s > best_score) {
                    best_score = s;
                    best = w;
                }
            }
            error = best != w_star;
        } else {
            std::vector<std::uint64_t> y_counts(typ.ny, 0);
            for (Symbol s : y) ++y_counts[s];
            if (!typ.y_typical(y_counts, cp.n)) {
                error = true;  // null
            } else {
                std::optional<std::uint64_t> hit;
                bool multiple = false;
                std::vector<std::uint64_t> jc(typ.nu * typ.ny), uc(typ.nu);
                for (std::uint64_t w = 0; w < cp.M && !multiple; ++w) {
                    std::fill(jc.begin(), jc.end(), 0);
                    std::fill(uc.begin(), uc.end(), 0);
                    for (std::size_t i = 0; i < cp.n; ++i) {
                        ++jc[rows[w * cp.n + i] * typ.ny + y[i]];
                        ++uc[rows[w * cp.n + i]];
                    }
                    if (typ.row_typical(jc, uc, cp.n)) {
                        if (hit)
                            multiple = true;
                        else
                            hit = w;
                    }
                }
                error = multiple || !hit || *hit != w_star;
            }
        }
        out[t] = {static_cast<std::uint8_t>(error), 0};
    };

    const auto run_packed = [&](std::uint64_t t) {
        RngStream rng(cp.seed, t);
        const std::uint64_t w_star = opts.random_message ? rng.below(cp.M) : 0;

        detail::PackedTrial trial(cp.n);
        trial.draw_pair_and_transmit(j, ch_yx, rng);
        const std::size_t wpr = trial.sh.words;

        thread_local std::vector<std::uint64_t> rows;
        rows.resize(cp.M * wpr);
        for (std::uint64_t w = 0; w < cp.M; ++w) {
            if (w == w_star) {
                std::copy(trial.u_star.begin(), trial.u_star.end(), rows.begin() + w * wpr);
                continue;
            }
            trial.draw_marginal_row(rng, pu[0], uniform_fast, rows.data() + w * wpr);
        }

        // duplicate scan over packed rows
        {
            thread_local detail::DupSet seen;
            seen.begin_trial(cp.M);
            const auto same = [&](std::uint64_t a, std::uint64_t b) {
                return std::equal(rows.data() + a * wpr, rows.data() + (a + 1) * wpr,
                                  rows.data() + b * wpr);
            };
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                std::uint64_t h = 0x9e3779b97f4a7c15ULL;
                for (std::size_t k = 0; k < wpr; ++k) h = mix64(h ^ rows[w * wpr + k]);
                if (seen.insert_or_dup(h, w, same)) {
                    out[t] = {1, 1};
                    return;
                }
            }
        }

        bool error;
        if (dec.kind == DecoderKind::max_likelihood && distance_mode) {
            std::uint64_t best = 0, best_dist = ~0ULL;
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                std::uint64_t dist = 0;
                const std::uint64_t* r = rows.data() + w * wpr;
                for (std::size_t k = 0; k < wpr; ++k) dist += std::popcount(r[k] ^ trial.y[k]);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = w;
                }
            }
            error = best != w_star;
        } else if (dec.kind == DecoderKind::max_likelihood) {
            std::uint64_t best = 0;
            double best_score = detail::kNegInf;
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                const auto c = detail::packed_counts(trial.sh, rows.data() + w * wpr,
                                                     trial.y.data());
                const double s = detail::packed_ml_score(ml, c);
                if (s > best_score) {
                    best_score = s;
                    best = w;
                }
            }
            error = best != w_star;
        } else {
            std::uint64_t ny1 = 0;
            for (std::size_t k = 0; k < wpr; ++k) ny1 += std::popcount(trial.y[k]);
            const std::uint64_t y_counts[2] = {cp.n - ny1, ny1};
            if (!typ.y_typical({y_counts, 2}, cp.n)) {
                error = true;
            } else {
                std::optional<std::uint64_t> hit;
                bool multiple = false;
                for (std::uint64_t w = 0; w < cp.M && !multiple; ++w) {
                    const auto c = detail::packed_counts(trial.sh, rows.data() + w * wpr,
                                                         trial.y.data());
                    const std::uint64_t jc[4] = {c.c00, c.c01, c.c10, c.c11};
                    const std::uint64_t uc[2] = {c.c00 + c.c01, c.c10 + c.c11};
                    if (typ.row_typical({jc, 4}, {uc, 2}, cp.n)) {
                        if (hit)
                            multiple = true;
                        else
                            hit = w;
                    }
                }
                error = multiple || !hit || *hit != w_star;
            }
        }
        out[t] = {static_cast<std::uint8_t>(error), 0};
    };

    if (packed && !fixed)
        detail::parallel_for(trials, threads, run_packed);
    else
        detail::parallel_for(trials, threads, run_general);

    SimReport rep;
    rep.trials = trials;
    for (const auto& o : out) {
        rep.errors += o.error;
        rep.collisions += o.collision;
    }
    rep.empirical_pe = static_cast<double>(rep.errors) / static_cast<double>(trials);
    return rep;
}

/// Streaming variant for binary codes too large to materialize:
/// competitor rows are generated, scored and discarded, with an early
/// exit once the transmitted row is beaten (the error event does not
/// depend on which competitor wins). Duplicate decoder rows are NOT
/// detected here, which can only under-count errors relative to the
/// materialized experiment.
inline SimReport run_error_experiment_streaming(const JointUX& j, const Channel& ch_yx,
                                                const CodeParams& cp, std::uint64_t trials,
                                                const ExperimentOptions& opts = {}) {
    detail::require(cp.M >= 2 && trials >= 1, "streaming experiment: bad parameters");
    detail::require(j.rows() == 2 && ch_yx.out_size() == 2,
                    "streaming experiment: binary alphabets only");

    const auto [pu, px] = marginals(j);
    const Channel ch_yu = effective_channel(j, ch_yx);
    const detail::MlScorer ml(ch_yu);
    const bool uniform_fast = pu[0] == 0.5;
    // symmetric effective channel below crossover 1/2: the likelihood is
    // strictly decreasing in Hamming distance, so the scan can compare
    // integer distances
    const bool distance_mode =
        ch_yu(0, 1) == ch_yu(1, 0) && ch_yu(0, 0) == ch_yu(1, 1) && ch_yu(0, 1) < 0.5;
    const unsigned threads = detail::resolve_threads(opts.threads);

    std::vector<detail::TrialOutcome> out(trials);
    detail::parallel_for(trials, threads, [&](std::uint64_t t) {
        RngStream rng(cp.seed, t);
        const std::uint64_t w_star = opts.random_message ? rng.below(cp.M) : 0;

        detail::PackedTrial trial(cp.n);
        trial.draw_pair_and_transmit(j, ch_yx, rng);
        const auto c_star = detail::packed_counts(trial.sh, trial.u_star.data(), trial.y.data());
        const double score_star = detail::packed_ml_score(ml, c_star);
        const std::uint64_t d_star = c_star.c01 + c_star.c10;

        const std::size_t wpr = trial.sh.words;
        std::vector<std::uint64_t> row(wpr);
        bool error = false;
        if (distance_mode && uniform_fast && wpr == 1) {
            // hot path: one u64 per competitor row, error once some row
            // lands strictly closer (or ties with a lower index)
            const std::uint64_t y0 = trial.y[0];
            const std::uint64_t mask = trial.sh.last_mask;
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                if (w == w_star) continue;
                const std::uint64_t r = rng.next_u64() & mask;
                const std::uint64_t dist = std::popcount(r ^ y0);
                if (dist < d_star || (dist == d_star && w < w_star)) {
                    error = true;
                    break;
                }
            }
        } else {
            for (std::uint64_t w = 0; w < cp.M; ++w) {
                if (w == w_star) continue;
                trial.draw_marginal_row(rng, pu[0], uniform_fast, row.data());
                bool beats;
                if (distance_mode) {
                    std::uint64_t dist = 0;
                    for (std::size_t k = 0; k < wpr; ++k)
                        dist += std::popcount(row[k] ^ trial.y[k]);
                    beats = dist < d_star || (dist == d_star && w < w_star);
                } else {
                    const auto c = detail::packed_counts(trial.sh, row.data(), trial.y.data());
                    const double s = detail::packed_ml_score(ml, c);
                    beats = s > score_star || (s == score_star && w < w_star);
                }
                if (beats) {
                    error = true;
                    break;
                }
            }
        }
        out[t] = {static_cast<std::uint8_t>(error), 0};
    });

    SimReport rep;
    rep.trials = trials;
    for (const auto& o : out) rep.errors += o.error;
    rep.empirical_pe = static_cast<double>(rep.errors) / static_cast<double>(trials);
    return rep;
}

namespace detail {

// Binomial(n, 1/2) pmf table via lgamma, in probability domain.
inline std::vector<double> binom_half_pmf(std::size_t n) {
    std::vector<double> pmf(n + 1);
    const double ln2n = static_cast<double>(n) * std::log(2.0);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double lg = lg_n1 - std::lgamma(static_cast<double>(k) + 1.0) -
                          std::lgamma(static_cast<double>(n - k) + 1.0) - ln2n;
        pmf[k] = std::exp(lg);
    }
    return pmf;
}

}  // namespace detail

/// P(correct ML decision | transmitted row at Hamming distance d_star
/// from y) for M-message codes whose competitor rows are uniform i.i.d.
/// bits: competitors' distances are Binomial(n, 1/2). With a uniform
/// random message the transmitted index is uniform among any tied rows;
/// with the message fixed to the first index it wins every tie.
inline double ml_correct_probability_given_distance(std::size_t n, double M, std::size_t d_star,
                                                    bool random_message) {
    const auto pmf = detail::binom_half_pmf(n);
    double p_lt = 0.0;
    for (std::size_t k = 0; k + 1 <= d_star && d_star > 0; ++k) p_lt += pmf[k];
    p_lt = std::min(p_lt, 1.0);
    const double p_eq = pmf[d_star];

    if (!random_message) return std::exp((M - 1.0) * std::log1p(-p_lt));
    if (p_eq <= 0.0) return std::exp((M - 1.0) * std::log1p(-p_lt));
    // [ (1-p_lt)^M - (1-p_lt-p_eq)^M ] / (M p_eq), evaluated stably
    const double t1 = M * std::log1p(-p_lt);
    const double both = p_lt + p_eq;
    if (both >= 1.0) return std::exp(t1) / (M * p_eq);
    const double t2 = M * std::log1p(-both);
    return std::exp(t1) * (-std::expm1(t2 - t1)) / (M * p_eq);
}

/// Error experiment factored over the competitor ensemble: only the
/// transmitted pair and the channel noise are sampled; the conditional
/// error probability given the resulting distance is exact, so the
/// error indicator has the same law as in the streaming experiment.
/// For codes whose message count rules out enumerating competitors.
/// Requires binary alphabets, an exactly uniform decoder marginal and a
/// symmetric effective channel. Duplicate rows are not modeled.
inline SimReport run_error_experiment_conditional(const JointUX& j, const Channel& ch_yx,
                                                  const CodeParams& cp, std::uint64_t trials,
                                                  const ExperimentOptions& opts = {}) {
    detail::require(j.rows() == 2 && j.cols() == 2 && ch_yx.out_size() == 2,
                    "conditional experiment: binary alphabets only");
    const auto [pu, px] = marginals(j);
    detail::require(pu[0] == 0.5, "conditional experiment: decoder marginal must be uniform");
    const Channel ch_yu = effective_channel(j, ch_yx);
    detail::require(ch_yu(0, 1) == ch_yu(1, 0), "conditional experiment: asymmetric p(y|u)");
    detail::require(ch_yu(0, 1) < 0.5, "conditional experiment: crossover must be below 1/2");

    const JointUY m = joint_uy_from(j, ch_yx);
    const double q = m(0, 1) + m(1, 0);  // P(U != Y) per coordinate
    const double M = static_cast<double>(cp.M);

    // conditional correctness table over d*
    std::vector<double> p_correct(cp.n + 1);
    for (std::size_t d = 0; d <= cp.n; ++d)
        p_correct[d] = ml_correct_probability_given_distance(cp.n, M, d, opts.random_message);

    const unsigned threads = detail::resolve_threads(opts.threads);
    std::vector<std::uint8_t> err(trials, 0);
    detail::parallel_for(trials, threads, [&](std::uint64_t t) {
        RngStream rng(cp.seed, t);
        std::size_t d_star = 0;
        for (std::size_t i = 0; i < cp.n; ++i) d_star += rng.bernoulli(q);
        err[t] = rng.bernoulli(1.0 - p_correct[d_star]);
    });

    SimReport rep;
    rep.trials = trials;
    for (auto e : err) rep.errors += e;
    rep.empirical_pe = static_cast<double>(rep.errors) / static_cast<double>(trials);
    return rep;
}

struct MapStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

struct AttackResult {
    SimReport report;                    // Bayes attacker statistics
    std::vector<MapStats> alternatives;  // same codebooks, supplied maps
};

/// Attacker experiment: per trial a fresh codebook pair is generated,
/// the per-letter Bayes estimator is applied to every decoder row and
/// the n-fold distortion against the matching encoder row is recorded.
/// Supplied alternative single-letter maps are evaluated on the same
/// codebooks, giving paired comparisons.
inline AttackResult run_attack_experiment(const JointUX& j, const DistortionMatrix& d,
                                          const CodeParams& cp, std::uint64_t trials,
                                          std::span<const std::vector<std::size_t>> alt_maps = {},
                                          const ExperimentOptions& opts = {}) {
    detail::require(trials >= 1, "run_attack_experiment: no trials");
    detail::require(d.size() == j.cols(), "run_attack_experiment: dimension mismatch");
    for (const auto& m : alt_maps)
        detail::require(m.size() == j.rows(), "run_attack_experiment: alternative map size");

    const auto bayes = bayes_estimator(j, d);
    const std::size_t n_maps = 1 + alt_maps.size();
    const std::uint64_t samples = trials * cp.M;
    std::vector<double> dist(n_maps * samples, 0.0);
    std::vector<std::uint64_t> coll(trials, 0);

    const unsigned threads = detail::resolve_threads(opts.threads);
    detail::parallel_for(trials, threads, [&](std::uint64_t t) {
        RngStream rng(cp.seed, t);
        const CodebookPair cb = generate_codebooks(j, cp, rng);
        coll[t] = cb.dec_duplicates;
        for (std::uint64_t w = 0; w < cp.M; ++w) {
            const auto u_row = cb.dec_row(w);
            const auto x_row = cb.enc_row(w);
            for (std::size_t mi = 0; mi < n_maps; ++mi) {
                const auto& map = (mi == 0) ? bayes.map : alt_maps[mi - 1];
                double acc = 0.0;
                for (std::size_t i = 0; i < cp.n; ++i) acc += d(map[u_row[i]], x_row[i]);
                dist[mi * samples + t * cp.M + w] = acc / static_cast<double>(cp.n);
            }
        }
    });

    const auto stats = [&](std::size_t mi) {
        double mean = 0.0;
        for (std::uint64_t s = 0; s < samples; ++s) mean += dist[mi * samples + s];
        mean /= static_cast<double>(samples);
        double var = 0.0;
        for (std::uint64_t s = 0; s < samples; ++s) {
            const double dv = dist[mi * samples + s] - mean;
            var += dv * dv;
        }
        const double se = samples > 1
                              ? std::sqrt(var / static_cast<double>(samples - 1) /
                                          static_cast<double>(samples))
                              : 0.0;
        return MapStats{mean, se};
    };

    AttackResult res;
    const auto b = stats(0);
    res.report.trials = trials;
    res.report.attacker_distortion_mean = b.mean;
    res.report.attacker_distortion_stderr = b.stderr_mean;
    for (auto c : coll) res.report.collisions += c;
    for (std::size_t mi = 1; mi < n_maps; ++mi) res.alternatives.push_back(stats(mi));
    return res;
}

}  // namespace macc

#endif  // MACC_CODEC_HPP
