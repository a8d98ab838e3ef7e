// macc: secure asymmetric-codebook capacity and simulation toolkit.

#include <iostream>

#include <CLI11.hpp>

#include "macc/cli.hpp"

namespace {

void add_common(CLI::App* cmd, macc::cli::CommonOptions& c) {
    cmd->add_option("spec", c.spec_path, "problem spec file (JSON)")->required();
    cmd->add_flag("--dump-spec", c.dump_spec, "print the normalized spec and exit");
    cmd->add_option("--precision", c.precision, "significant digits in CSV output")
        ->default_val(6);
    cmd->add_option("--threads", c.threads, "worker threads (0 = hardware)")->default_val(1);
    cmd->add_option("--seed", c.seed, "override the spec file seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure asymmetric-codebook capacity toolkit"};
    app.require_subcommand(1);

    macc::cli::CapacityOptions cap_opt;
    auto* cap = app.add_subcommand("capacity", "compute the secure capacity for one alpha");
    add_common(cap, cap_opt.common);
    cap->add_option("--mode", cap_opt.mode, "auto | closed-form | generic")->default_val("auto");

    macc::cli::SweepOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "capacity as a function of alpha (CSV)");
    add_common(sweep, sweep_opt.common);
    sweep->add_option("--alphas", sweep_opt.alphas, "alpha grid: 'a,b,c' or 'start:stop:step'");
    sweep->add_option("--p1", sweep_opt.p1_list, "comma list of BSC crossovers");
    sweep->add_option("--mode", sweep_opt.mode, "auto | closed-form | generic")->default_val("auto");

    macc::cli::SimulateOptions sim_opt;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo error-rate experiment (CSV)");
    add_common(sim, sim_opt.common);
    sim->add_option("--n", sim_opt.n, "blocklength");
    sim->add_option("--messages", sim_opt.messages, "number of messages");
    sim->add_option("--trials", sim_opt.trials, "Monte Carlo trials");
    sim->add_option("--decoder", sim_opt.decoder, "ml | typicality");

    macc::cli::AttackOptions atk_opt;
    auto* atk = app.add_subcommand("attack", "attacker distortion experiment (CSV)");
    add_common(atk, atk_opt.common);
    atk->add_option("--n", atk_opt.n, "blocklength");
    atk->add_option("--trials", atk_opt.trials, "Monte Carlo trials");

    CLI11_PARSE(app, argc, argv);

    if (cap->parsed()) return macc::cli::cmd_capacity(cap_opt, std::cout, std::cerr);
    if (sweep->parsed()) return macc::cli::cmd_sweep(sweep_opt, std::cout, std::cerr);
    if (sim->parsed()) return macc::cli::cmd_simulate(sim_opt, std::cout, std::cerr);
    if (atk->parsed()) return macc::cli::cmd_attack(atk_opt, std::cout, std::cerr);
    return macc::cli::kExitInput;
}
