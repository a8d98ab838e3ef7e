/*
 * cli.hpp
 *
 * Command implementations behind the macc executable: capacity, sweep,
 * simulate, attack. Data goes to the out stream as CSV, diagnostics to
 * the err stream. Exit codes: 0 success, 2 input error, 3 solver
 * non-convergence (result still printed).
 */

#ifndef MACC_CLI_HPP
#define MACC_CLI_HPP

#include <algorithm>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "macc/spec_io.hpp"

namespace macc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNoConverge = 3;

struct CommonOptions {
    std::string spec_path;
    bool dump_spec = false;
    int precision = 6;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;  // overrides the spec file
};

struct CapacityOptions {
    CommonOptions common;
    std::string mode = "auto";  // auto | closed-form | generic
};

struct SweepOptions {
    CommonOptions common;
    std::string alphas;   // "a,b,c" or "start:stop:step"
    std::string p1_list;  // comma list; empty -> spec channel
    std::string mode = "auto";
};

struct SimulateOptions {
    CommonOptions common;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> messages;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> decoder;
};

struct AttackOptions {
    CommonOptions common;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> trials;
};

namespace detail_cli {

inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    if (text.empty()) return values;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream is(text);
        if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw std::invalid_argument("grid: expected start:stop:step");
        for (double v = start; v <= stop + 1e-12; v += step) values.push_back(std::min(v, stop));
        return values;
    }
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        values.push_back(std::stod(item));
    }
    return values;
}

inline SpecFile load(const CommonOptions& c) {
    SpecFile s = SpecFile::from_file(c.spec_path);
    if (c.seed) s.seed = *c.seed;
    return s;
}

inline int maybe_dump(const SpecFile& s, const CommonOptions& c, std::ostream& out) {
    if (!c.dump_spec) return -1;
    out << s.to_json().dump(2) << "\n";
    return kExitOk;
}

// closed-form route applies when the spec is the binary symmetric
// Hamming model
inline bool closed_form_applicable(const SpecFile& s) {
    if (!s.hamming_distortion) return false;
    if (s.binary) return true;
    const Channel ch = s.resolved_channel();
    return ch.in_size() == 2 && ch.out_size() == 2 && std::abs(ch(0, 1) - ch(1, 0)) <= kProbTol &&
           ch(0, 1) <= 0.5;
}

inline bool use_closed_form(const SpecFile& s, const std::string& mode) {
    if (mode == "closed-form") {
        if (!closed_form_applicable(s))
            throw std::invalid_argument("closed-form mode needs a binary symmetric Hamming spec");
        return true;
    }
    if (mode == "generic") return false;
    if (mode == "auto") return closed_form_applicable(s);
    throw std::invalid_argument("mode must be auto, closed-form or generic");
}

}  // namespace detail_cli

/// capacity: one row {alpha, capacity_bits, feasible, solver_restarts,
/// constraint_active}.
inline int cmd_capacity(const CapacityOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const SpecFile spec = detail_cli::load(opt.common);
        if (const int rc = detail_cli::maybe_dump(spec, opt.common, out); rc >= 0) return rc;
        const int prec = opt.common.precision;
        const double alpha = spec.resolved_alpha();

        out << "alpha,capacity_bits,feasible,solver_restarts,constraint_active\n";
        if (detail_cli::use_closed_form(spec, opt.mode)) {
            const double p1 = spec.binary ? spec.binary->p1 : bsc_crossover(spec.resolved_channel());
            const BinaryParams bp(p1, alpha);
            const double value = binary_capacity_closed_form(bp);
            out << csv_num(alpha, prec) << ',' << csv_num(value, prec) << ','
                << csv_bool(bp.feasible()) << ",0," << csv_bool(bp.feasible()) << "\n";
            return kExitOk;
        }
        const auto res = information_capacity(spec.problem(), spec.solver_config());
        out << csv_num(alpha, prec) << ',' << csv_num(res.value, prec) << ','
            << csv_bool(res.feasible) << ',' << res.diag.restarts_used << ','
            << csv_bool(res.diag.constraint_active) << "\n";
        return res.diag.converged ? kExitOk : kExitNoConverge;
    } catch (const std::exception& e) {
        err << "macc capacity: " << e.what() << "\n";
        return kExitInput;
    }
}

/// sweep: CSV `p1,alpha,capacity_bits,mode`, rows sorted by (p1, alpha).
inline int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const SpecFile spec = detail_cli::load(opt.common);
        if (const int rc = detail_cli::maybe_dump(spec, opt.common, out); rc >= 0) return rc;
        const int prec = opt.common.precision;

        std::vector<double> alphas = detail_cli::parse_grid(opt.alphas);
        std::sort(alphas.begin(), alphas.end());
        std::vector<double> p1s = detail_cli::parse_grid(opt.p1_list);
        std::sort(p1s.begin(), p1s.end());

        const bool closed = detail_cli::use_closed_form(spec, opt.mode);
        const char* mode_name = closed ? "closed-form" : "generic";
        const SweepMode mode = closed ? SweepMode::closed_form : SweepMode::generic;

        struct Entry {
            double p1;
            Channel ch;
        };
        std::vector<Entry> channels;
        if (p1s.empty()) {
            const Channel ch = spec.resolved_channel();
            const bool is_bsc = ch.in_size() == 2 && ch.out_size() == 2 &&
                                std::abs(ch(0, 1) - ch(1, 0)) <= kProbTol;
            channels.push_back({is_bsc ? ch(0, 1) : -1.0, ch});
        } else {
            for (double p1 : p1s) channels.push_back({p1, Channel::bsc(p1)});
        }

        out << "p1,alpha,capacity_bits,mode\n";
        const DistortionMatrix d = spec.resolved_distortion();
        for (const auto& entry : channels) {
            const auto rows = capacity_sweep(entry.ch, d, alphas, mode, spec.solver_config());
            for (const auto& row : rows)
                out << csv_num(entry.p1, prec) << ',' << csv_num(row.alpha, prec) << ','
                    << csv_num(row.capacity, prec) << ',' << mode_name << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "macc sweep: " << e.what() << "\n";
        return kExitInput;
    }
}

/// simulate: CSV `n,M,R_bits,trials,errors,empirical_pe,collisions`.
inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const SpecFile spec = detail_cli::load(opt.common);
        if (const int rc = detail_cli::maybe_dump(spec, opt.common, out); rc >= 0) return rc;
        const int prec = opt.common.precision;

        CodeParams cp;
        cp.n = opt.n.value_or(spec.sim.n);
        cp.M = opt.messages.value_or(spec.sim.messages);
        cp.seed = spec.seed;
        const std::uint64_t trials = opt.trials.value_or(spec.sim.trials);
        const std::string decoder = opt.decoder.value_or(spec.sim.decoder);

        DecoderConfig dec;
        if (decoder == "ml")
            dec.kind = DecoderKind::max_likelihood;
        else if (decoder == "typicality")
            dec.kind = DecoderKind::typicality;
        else
            throw std::invalid_argument("decoder must be 'ml' or 'typicality'");
        dec.epsilon = spec.sim.epsilon;

        ExperimentOptions eopts;
        eopts.fresh_codebook = !spec.sim.fixed_codebook;
        eopts.random_message = spec.sim.random_message;
        eopts.threads = opt.common.threads;

        const JointUX j = spec.codebook_joint();
        const Channel ch = spec.resolved_channel();
        const SimReport rep = run_error_experiment(j, ch, cp, dec, trials, eopts);

        out << "n,M,R_bits,trials,errors,empirical_pe,collisions\n";
        out << cp.n << ',' << cp.M << ',' << csv_num(cp.rate_bits(), prec) << ',' << rep.trials
            << ',' << rep.errors << ',' << csv_num(rep.empirical_pe, prec) << ','
            << rep.collisions << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "macc simulate: " << e.what() << "\n";
        return kExitInput;
    }
}

/// attack: CSV `n,trials,mean_distortion,stderr,sigma_theoretical,alpha,
/// satisfied` where satisfied = (mean >= alpha - 3 stderr).
inline int cmd_attack(const AttackOptions& opt, std::ostream& out, std::ostream& err) {
    try {
        const SpecFile spec = detail_cli::load(opt.common);
        if (const int rc = detail_cli::maybe_dump(spec, opt.common, out); rc >= 0) return rc;
        const int prec = opt.common.precision;

        CodeParams cp;
        cp.n = opt.n.value_or(spec.sim.n);
        cp.M = 1;  // one codeword pair per trial; trials is the sample count
        cp.seed = spec.seed;
        const std::uint64_t trials = opt.trials.value_or(spec.sim.trials);

        const JointUX j = spec.codebook_joint();
        const DistortionMatrix d = spec.resolved_distortion();
        const double alpha = spec.resolved_alpha();
        const double sigma = security_level(j, d).sigma;

        ExperimentOptions eopts;
        eopts.threads = opt.common.threads;
        const auto res = run_attack_experiment(j, d, cp, trials, {}, eopts);
        const auto& rep = res.report;
        const bool satisfied =
            rep.attacker_distortion_mean >= alpha - 3.0 * rep.attacker_distortion_stderr;

        out << "n,trials,mean_distortion,stderr,sigma_theoretical,alpha,satisfied\n";
        out << cp.n << ',' << rep.trials << ',' << csv_num(rep.attacker_distortion_mean, prec)
            << ',' << csv_num(rep.attacker_distortion_stderr, prec) << ',' << csv_num(sigma, prec)
            << ',' << csv_num(alpha, prec) << ',' << csv_bool(satisfied) << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        err << "macc attack: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace macc::cli

#endif  // MACC_CLI_HPP
