/*
 * spec_io.hpp
 *
 * Problem-spec files (JSON) and CSV output helpers. The schema is
 * frozen; unknown keys are rejected so typos fail loudly. See the
 * README for the field reference.
 *
 *   {
 *     "binary":     {"p1": 0.1, "alpha": 0.1},      // BSC + Hamming shorthand
 *     "channel":    [[0.9, 0.1], [0.1, 0.9]],       // p(y|x), row-major
 *     "distortion": "hamming" | [[...], ...],       // d(xhat, x)
 *     "distortion_bound": 2.0,                      // required with a matrix
 *     "alpha":      0.1,
 *     "joint":      [[0.45, 0.05], [0.05, 0.45]],   // optional codebook law p(u,x)
 *     "u_size":     2,                              // optional, default |X|
 *     "solver":     {"restarts", "max_iters", "tol", "stall_window"},
 *     "sim":        {"n", "messages", "trials", "decoder", "epsilon",
 *                    "fixed_codebook", "random_message"},
 *     "seed":       20250808
 *   }
 */

#ifndef MACC_SPEC_IO_HPP
#define MACC_SPEC_IO_HPP

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "macc/capacity.hpp"
#include "macc/codec.hpp"

namespace macc {

/// Documented default seed: runs without --seed are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 20250808;

struct BinaryShorthand {
    double p1 = 0.0;
    double alpha = 0.0;
    bool operator==(const BinaryShorthand&) const = default;
};

struct SolverBlock {
    int restarts = 32;
    int max_iters = 4000;
    double tol = 1e-9;
    int stall_window = 50;
    bool operator==(const SolverBlock&) const = default;
};

struct SimBlock {
    std::size_t n = 100;
    std::uint64_t messages = 1024;
    std::uint64_t trials = 1000;
    std::string decoder = "ml";  // "ml" | "typicality"
    double epsilon = 0.05;
    bool fixed_codebook = false;
    bool random_message = false;
    bool operator==(const SimBlock&) const = default;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                           const char* where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument(std::string("spec: unknown key '") + key + "' in " + where);
    }
}

inline std::pair<std::size_t, std::vector<double>> parse_matrix(const json& a, const char* what) {
    if (!a.is_array() || a.empty() || !a[0].is_array())
        throw std::invalid_argument(std::string("spec: ") + what + " must be an array of arrays");
    const std::size_t cols = a[0].size();
    std::vector<double> cells;
    for (const auto& row : a) {
        if (!row.is_array() || row.size() != cols)
            throw std::invalid_argument(std::string("spec: ragged matrix in ") + what);
        for (const auto& v : row) {
            if (!v.is_number()) throw std::invalid_argument(std::string("spec: non-number in ") + what);
            cells.push_back(v.get<double>());
        }
    }
    return {cols, std::move(cells)};
}

inline json matrix_json(std::span<const double> cells, std::size_t rows, std::size_t cols) {
    json a = json::array();
    for (std::size_t r = 0; r < rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < cols; ++c) row.push_back(cells[r * cols + c]);
        a.push_back(row);
    }
    return a;
}

}  // namespace detail

/// Parsed problem-spec file with lazy resolution into solver/simulation
/// inputs. Matrices are validated on parse.
struct SpecFile {
    std::optional<BinaryShorthand> binary;
    std::optional<Channel> channel;
    bool hamming_distortion = true;
    std::optional<DistortionMatrix> distortion;
    std::optional<double> alpha_field;
    std::optional<JointUX> joint;
    std::size_t u_size = 0;
    SolverBlock solver;
    SimBlock sim;
    std::uint64_t seed = kDefaultSeed;

    Channel resolved_channel() const {
        if (binary) return Channel::bsc(binary->p1);
        if (!channel) throw std::invalid_argument("spec: needs 'binary' or 'channel'");
        return *channel;
    }

    DistortionMatrix resolved_distortion() const {
        if (!hamming_distortion) return *distortion;
        return DistortionMatrix::hamming(resolved_channel().in_size());
    }

    double resolved_alpha() const {
        if (binary) return binary->alpha;
        if (!alpha_field) throw std::invalid_argument("spec: needs 'alpha'");
        return *alpha_field;
    }

    ProblemSpec problem() const {
        return ProblemSpec(resolved_channel(), resolved_distortion(), resolved_alpha());
    }

    SolverConfig solver_config() const {
        SolverConfig cfg;
        cfg.restarts = solver.restarts;
        cfg.max_iters = solver.max_iters;
        cfg.improve_tol = solver.tol;
        cfg.stall_window = solver.stall_window;
        cfg.u_size = u_size;
        cfg.seed = seed;
        return cfg;
    }

    /// The codebook law used by the simulation commands: an explicit
    /// "joint", else the binary achieving joint (perturbation parameter
    /// alpha), else the generic solver's argmax.
    JointUX codebook_joint() const {
        if (joint) return *joint;
        if (binary) return binary_achieving_joint(binary->alpha);
        const auto res = information_capacity(problem(), solver_config());
        if (!res.feasible || !res.argmax_joint)
            throw std::invalid_argument("spec: infeasible alpha leaves no codebook law");
        return *res.argmax_joint;
    }

    bool operator==(const SpecFile& o) const {
        const auto mat_eq = [](const auto& a, const auto& b) {
            if (a.has_value() != b.has_value()) return false;
            if (!a) return true;
            return std::equal(a->cells().begin(), a->cells().end(), b->cells().begin(),
                              b->cells().end());
        };
        const auto chan_eq = [](const std::optional<Channel>& a, const std::optional<Channel>& b) {
            if (a.has_value() != b.has_value()) return false;
            if (!a) return true;
            if (a->in_size() != b->in_size() || a->out_size() != b->out_size()) return false;
            for (std::size_t r = 0; r < a->in_size(); ++r)
                for (std::size_t c = 0; c < a->out_size(); ++c)
                    if ((*a)(r, c) != (*b)(r, c)) return false;
            return true;
        };
        const auto dist_eq = [&](const std::optional<DistortionMatrix>& a,
                                 const std::optional<DistortionMatrix>& b) {
            if (a.has_value() != b.has_value()) return false;
            if (!a) return true;
            if (a->size() != b->size() || a->bound() != b->bound()) return false;
            for (std::size_t r = 0; r < a->size(); ++r)
                for (std::size_t c = 0; c < a->size(); ++c)
                    if ((*a)(r, c) != (*b)(r, c)) return false;
            return true;
        };
        return binary == o.binary && chan_eq(channel, o.channel) &&
               hamming_distortion == o.hamming_distortion && dist_eq(distortion, o.distortion) &&
               alpha_field == o.alpha_field && mat_eq(joint, o.joint) && u_size == o.u_size &&
               solver == o.solver && sim == o.sim && seed == o.seed;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (binary) j["binary"] = {{"p1", binary->p1}, {"alpha", binary->alpha}};
        if (channel)
            j["channel"] = detail::matrix_json(
                [&] {
                    std::vector<double> cells;
                    for (std::size_t r = 0; r < channel->in_size(); ++r)
                        for (std::size_t c = 0; c < channel->out_size(); ++c)
                            cells.push_back((*channel)(r, c));
                    return cells;
                }(),
                channel->in_size(), channel->out_size());
        if (hamming_distortion) {
            j["distortion"] = "hamming";
        } else {
            std::vector<double> cells;
            for (std::size_t r = 0; r < distortion->size(); ++r)
                for (std::size_t c = 0; c < distortion->size(); ++c)
                    cells.push_back((*distortion)(r, c));
            j["distortion"] = detail::matrix_json(cells, distortion->size(), distortion->size());
            j["distortion_bound"] = distortion->bound();
        }
        if (alpha_field) j["alpha"] = *alpha_field;
        if (joint) j["joint"] = detail::matrix_json(joint->cells(), joint->rows(), joint->cols());
        if (u_size) j["u_size"] = u_size;
        j["solver"] = {{"restarts", solver.restarts},
                       {"max_iters", solver.max_iters},
                       {"tol", solver.tol},
                       {"stall_window", solver.stall_window}};
        j["sim"] = {{"n", sim.n},
                    {"messages", sim.messages},
                    {"trials", sim.trials},
                    {"decoder", sim.decoder},
                    {"epsilon", sim.epsilon},
                    {"fixed_codebook", sim.fixed_codebook},
                    {"random_message", sim.random_message}};
        j["seed"] = seed;
        return j;
    }

    static SpecFile from_json(const nlohmann::json& j) {
        using detail::parse_matrix;
        if (!j.is_object()) throw std::invalid_argument("spec: top level must be an object");
        detail::reject_unknown(j,
                               {"binary", "channel", "distortion", "distortion_bound", "alpha",
                                "joint", "u_size", "solver", "sim", "seed"},
                               "top level");
        SpecFile s;
        if (j.contains("binary")) {
            const auto& b = j.at("binary");
            detail::reject_unknown(b, {"p1", "alpha"}, "binary");
            BinaryShorthand bs;
            bs.p1 = b.at("p1").get<double>();
            bs.alpha = b.at("alpha").get<double>();
            if (bs.p1 < 0.0 || bs.p1 > 0.5)
                throw std::invalid_argument("spec: binary.p1 outside [0, 0.5]");
            if (bs.alpha < 0.0) throw std::invalid_argument("spec: binary.alpha negative");
            s.binary = bs;
            if (j.contains("alpha") || j.contains("channel"))
                throw std::invalid_argument("spec: 'binary' excludes 'channel' and 'alpha'");
        }
        if (j.contains("channel")) {
            auto [cols, cells] = parse_matrix(j.at("channel"), "channel");
            const std::size_t rows = cells.size() / cols;
            s.channel = Channel(rows, cols, std::move(cells));
        }
        if (j.contains("distortion")) {
            const auto& d = j.at("distortion");
            if (d.is_string()) {
                if (d.get<std::string>() != "hamming")
                    throw std::invalid_argument("spec: unknown distortion preset");
                s.hamming_distortion = true;
            } else {
                auto [cols, cells] = parse_matrix(d, "distortion");
                if (cells.size() != cols * cols)
                    throw std::invalid_argument("spec: distortion must be square");
                if (!j.contains("distortion_bound"))
                    throw std::invalid_argument("spec: matrix distortion needs distortion_bound");
                s.hamming_distortion = false;
                s.distortion =
                    DistortionMatrix(cols, std::move(cells), j.at("distortion_bound").get<double>());
            }
        }
        if (j.contains("alpha")) s.alpha_field = j.at("alpha").get<double>();
        if (j.contains("joint")) {
            auto [cols, cells] = parse_matrix(j.at("joint"), "joint");
            const std::size_t rows = cells.size() / cols;
            s.joint = JointUX(rows, cols, std::move(cells));
        }
        if (j.contains("u_size")) s.u_size = j.at("u_size").get<std::size_t>();
        if (j.contains("solver")) {
            const auto& b = j.at("solver");
            detail::reject_unknown(b, {"restarts", "max_iters", "tol", "stall_window"}, "solver");
            if (b.contains("restarts")) s.solver.restarts = b.at("restarts").get<int>();
            if (b.contains("max_iters")) s.solver.max_iters = b.at("max_iters").get<int>();
            if (b.contains("tol")) s.solver.tol = b.at("tol").get<double>();
            if (b.contains("stall_window")) s.solver.stall_window = b.at("stall_window").get<int>();
        }
        if (j.contains("sim")) {
            const auto& b = j.at("sim");
            detail::reject_unknown(
                b, {"n", "messages", "trials", "decoder", "epsilon", "fixed_codebook", "random_message"},
                "sim");
            if (b.contains("n")) s.sim.n = b.at("n").get<std::size_t>();
            if (b.contains("messages")) s.sim.messages = b.at("messages").get<std::uint64_t>();
            if (b.contains("trials")) s.sim.trials = b.at("trials").get<std::uint64_t>();
            if (b.contains("decoder")) {
                s.sim.decoder = b.at("decoder").get<std::string>();
                if (s.sim.decoder != "ml" && s.sim.decoder != "typicality")
                    throw std::invalid_argument("spec: sim.decoder must be 'ml' or 'typicality'");
            }
            if (b.contains("epsilon")) s.sim.epsilon = b.at("epsilon").get<double>();
            if (b.contains("fixed_codebook")) s.sim.fixed_codebook = b.at("fixed_codebook").get<bool>();
            if (b.contains("random_message")) s.sim.random_message = b.at("random_message").get<bool>();
        }
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (!s.binary && !s.channel) throw std::invalid_argument("spec: needs 'binary' or 'channel'");
        if (s.distortion && s.channel && s.distortion->size() != s.channel->in_size())
            throw std::invalid_argument("spec: distortion size does not match channel input");
        if (s.joint && s.joint->cols() != s.resolved_channel().in_size())
            throw std::invalid_argument("spec: joint columns do not match channel input");
        return s;
    }

    static SpecFile from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("spec: cannot open " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("spec: JSON parse error: ") + e.what());
        }
        return from_json(j);
    }
};

/// Fixed-precision CSV number formatting; significant digits, '.'
/// decimal separator, never NaN/infinity.
inline std::string csv_num(double v, int precision = 6) {
    detail::require(std::isfinite(v), "csv: non-finite value");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline const char* csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace macc

#endif  // MACC_SPEC_IO_HPP
