#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <iostream>
#include <string>

#include "eoqt/io/commands.hpp"

using namespace eoqt::io;

namespace {

struct ConfigArgs {
    std::string config;
    std::string positional;
    Overrides ov;
    std::string path() const { return config.empty() ? positional : config; }
};

void add_config_flags(CLI::App* app, ConfigArgs& a) {
    app->add_option("config_file", a.positional, "JSON config or manifest");
    app->add_option("--config", a.config, "JSON config or manifest");
    app->add_option("--workers", a.ov.workers, "worker threads");
    app->add_option("--seed", a.ov.seed, "master seed");
    app->add_option("--out", a.ov.out, "output directory");
    app->add_option("--cut", a.ov.cut, "bond targeted by the EOQT policy");
    app->add_option("--chi", a.ov.chi, "maximum bond dimension");
    app->add_flag("--frozen-circuit", a.ov.frozen_circuit, "share one random circuit across trajectories");
    app->add_flag("--save-states", a.ov.save_states, "write final MPS checkpoints");
}

RunConfig load(const ConfigArgs& a) {
    if (a.path().empty()) throw ConfigError("no config file given");
    RunConfig cfg = load_config(a.path());
    apply_overrides(cfg, a.ov);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eoqt: entanglement-optimal quantum trajectories"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "eoqt " + git_revision());

    ConfigArgs run_args, oracle_args, sweep_args;
    CLI::App* run = app.add_subcommand("run", "run a trajectory ensemble from a config");
    add_config_flags(run, run_args);
    CLI::App* oracle = app.add_subcommand("oracle", "compare the ensemble with the dense master equation");
    add_config_flags(oracle, oracle_args);

    CLI::App* sweep = app.add_subcommand("sweep-phase", "long-time EAEE under homodyne detection versus phase");
    add_config_flags(sweep, sweep_args);
    std::vector<double> sweep_phases;
    int sweep_points = 9;
    sweep->add_option("--phases", sweep_phases, "phases in radians");
    sweep->add_option("--points", sweep_points, "evenly spaced phases in [0, pi/2] when --phases is absent")->check(CLI::Range(2, 1000));

    BellOptions bo;
    CLI::App* bell = app.add_subcommand("bell", "excess EAEE of a monitored Bell pair");
    bell->add_option("--gamma", bo.gamma);
    bell->add_option("--dt", bo.dt);
    bell->add_option("--T", bo.t_end);
    bell->add_option("--trajectories,-N", bo.trajectories);
    bell->add_option("--samples", bo.samples);
    bell->add_option("--seed", bo.seed);
    bell->add_option("--workers", bo.workers);
    bell->add_option("--out", bo.out);

    RbcOptions ro;
    bool no_number = false, no_eoqt = false;
    CLI::App* rbc = app.add_subcommand("rbc", "EAEE cut profiles of the random Brownian circuit");
    rbc->add_option("--size,--sizes,-n", ro.sizes, "system sizes");
    rbc->add_option("--chi", ro.chi);
    rbc->add_option("--phases", ro.phases, "homodyne phases in radians");
    rbc->add_flag("--no-number", no_number);
    rbc->add_flag("--no-eoqt", no_eoqt);
    rbc->add_option("--alpha", ro.alpha);
    rbc->add_option("--gamma", ro.gamma);
    rbc->add_option("--dt", ro.dt);
    rbc->add_option("--T", ro.t_end);
    rbc->add_option("--trajectories,-N", ro.trajectories);
    rbc->add_option("--samples", ro.samples);
    rbc->add_option("--seed", ro.seed);
    rbc->add_option("--workers", ro.workers);
    rbc->add_flag("--frozen-circuit", ro.frozen_circuit);
    rbc->add_option("--out", ro.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(load(run_args), std::cerr);
        if (*oracle) return cmd_oracle(load(oracle_args), std::cerr);
        if (*sweep) {
            if (sweep_phases.empty())
                for (int k = 0; k < sweep_points; ++k) sweep_phases.push_back(0.5 * M_PI * k / (sweep_points - 1));
            return cmd_sweep_phase(load(sweep_args), sweep_phases, std::cerr);
        }
        if (*bell) return cmd_bell(bo, std::cerr);
        if (*rbc) {
            ro.number = !no_number;
            ro.eoqt = !no_eoqt;
            return cmd_rbc(ro, std::cerr);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
