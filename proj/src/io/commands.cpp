#include "eoqt/io/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include "eoqt/dense/dense_state.hpp"
#include "eoqt/dense/lindblad.hpp"
#include "eoqt/io/csv.hpp"
#include "eoqt/models/bell.hpp"

#ifndef EOQT_GIT_REV
#define EOQT_GIT_REV "unknown"
#endif

namespace fs = std::filesystem;

namespace eoqt::io {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void make_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + dir + "' is not writable");
    const fs::path probe = fs::path(dir) / ".eoqt_write_probe";
    std::ofstream f(probe);
    if (!f) throw ConfigError("output directory '" + dir + "' is not writable");
    f.close();
    fs::remove(probe, ec);
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

Json failure_report(const EnsembleStats& st) {
    Json f = Json::array();
    for (size_t k = 0; k < st.failed_ids.size(); ++k) f.push_back({{"trajectory", st.failed_ids[k]}, {"error", st.failures[k]}});
    return f;
}

int runtime_status(const EnsembleStats& st, std::ostream& log) {
    if (st.failed_ids.empty()) return kExitOk;
    for (const std::string& e : st.failures) log << "error: " << e << "\n";
    log << st.failed_ids.size() << " trajectories failed; results cover " << st.n_ok << " trajectories\n";
    return kExitRuntime;
}

// Value of one recorded observable on a dense density matrix.
Complex dense_value(const Mat& rho, const Observable& o, int n, int d) {
    Mat op = Mat::Identity(rho.rows(), rho.cols());
    for (const auto& [site, m] : o.factors) op = dense::embed(m, site, n, d) * op;
    return (op * rho).trace();
}

}  // namespace

int worker_override(int workers) {
    if (const char* env = std::getenv("EOQT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096) throw ConfigError("EOQT_THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return workers;
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    if (o.workers) {
        if (*o.workers < 1) throw ConfigError("--workers must be positive");
        cfg.workers = *o.workers;
    }
    cfg.workers = worker_override(cfg.workers);
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.out) {
        if (o.out->empty()) throw ConfigError("--out must not be empty");
        cfg.out = *o.out;
    }
    if (o.cut) {
        if (*o.cut < 1 || *o.cut >= cfg.n) throw ConfigError("--cut must lie in [1, n-1]");
        cfg.cut = *o.cut;
    }
    if (o.chi) {
        if (*o.chi < 1) throw ConfigError("--chi must be positive");
        cfg.chi_max = *o.chi;
    }
    if (o.frozen_circuit) cfg.frozen_circuit = true;
    if (o.save_states) cfg.save_states = true;
}

std::string git_revision() { return EOQT_GIT_REV; }

void write_manifest(const std::string& path, const std::string& command, const Json& config, double wall_seconds,
                    const Json& extra) {
    Json m;
    m["command"] = command;
    m["git_revision"] = git_revision();
    m["wall_time_seconds"] = wall_seconds;
    m["config"] = config;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << m.dump(2) << "\n";
}

int cmd_run(const RunConfig& cfg, std::ostream& log) {
    const auto t0 = Clock::now();
    make_dir(cfg.out);
    EnsembleRequest req = build_request(cfg);
    req.keep_records = cfg.save_trajectories || cfg.decision_log || cfg.jump_log;
    if (cfg.save_states) {
        req.options.checkpoint_dir = path_in(cfg.out, "states");
        make_dir(req.options.checkpoint_dir);
    }
    log << "run: " << cfg.model << " n=" << cfg.n << " policy=" << req.policy.label() << " N=" << cfg.trajectories
        << " workers=" << cfg.workers << "\n";
    const EnsembleResult res = run_ensemble(req);
    write_ensemble_csv(path_in(cfg.out, "ensemble.csv"), res.stats);
    write_choices_csv(path_in(cfg.out, "choices.csv"), res.stats);
    if (cfg.save_trajectories) {
        make_dir(path_in(cfg.out, "trajectories"));
        for (const TrajectoryRecord& r : res.records)
            if (!r.failed) write_trajectory_csv(path_in(cfg.out, "trajectories/" + std::to_string(r.id) + ".csv"), r, req.record);
    }
    if (cfg.decision_log) write_decision_log(path_in(cfg.out, "decisions.csv"), res.records);
    if (cfg.jump_log) write_jump_log(path_in(cfg.out, "jumps.csv"), res.records);
    const int status = runtime_status(res.stats, log);
    write_manifest(path_in(cfg.out, "manifest.json"), "run", cfg.to_json(), seconds_since(t0),
                   {{"trajectories_ok", res.stats.n_ok}, {"failures", failure_report(res.stats)}, {"non_finite", res.stats.non_finite}});
    return status;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& log) {
    const auto t0 = Clock::now();
    if (cfg.model == "rbc") throw ConfigError("oracle: the rbc model has no fixed master equation");
    if (cfg.n * std::log2(static_cast<double>(cfg.d)) > 12.0 + 1e-9)
        throw ConfigError("oracle: dense master equation limited to n*log2(d) <= 12");
    make_dir(cfg.out);
    EnsembleRequest req = build_request(cfg);
    const ModelSpec exact = req.model;
    for (JumpChannel& c : req.model.channels) c.rate *= cfg.oracle.trajectory_rate_scale;
    log << "oracle: " << cfg.model << " n=" << cfg.n << " policy=" << req.policy.label() << " N=" << cfg.trajectories << "\n";
    const EnsembleResult res = run_ensemble(req);
    const EnsembleStats& st = res.stats;
    int status = runtime_status(st, log);
    if (st.n_ok == 0) {
        write_manifest(path_in(cfg.out, "manifest.json"), "oracle", cfg.to_json(), seconds_since(t0),
                       {{"failures", failure_report(st)}});
        return kExitRuntime;
    }

    const Vec psi0 = exact.initial_dense().vector();
    dense::MeOptions mo;
    mo.dt = cfg.oracle.me_dt > 0.0 ? cfg.oracle.me_dt : std::min(cfg.dt, 1e-3);
    const std::vector<Mat> rhos = dense::integrate_me(psi0 * psi0.adjoint(), exact.master_equation(), st.times, mo);

    const auto& obs = req.record.observables;
    auto me_value = [&](size_t i, int o) { return dense_value(rhos[i], obs[o], cfg.n, cfg.d).real(); };

    CsvWriter ref(path_in(cfg.out, "me_reference.csv"), {"t", "observable_name", "value"});
    CsvWriter cmp(path_in(cfg.out, "oracle_compare.csv"), {"t", "quantity", "cut_or_site", "me_value", "mean", "stderr", "N", "z"});
    double worst = 0.0;
    for (size_t i = 0; i < st.times.size(); ++i) {
        auto emit = [&](const std::string& name, int site, double me, const Series& s) {
            const double diff = s.mean[i] - me;
            const double den = std::hypot(s.se[i], cfg.oracle.systematic);
            double z = 0.0;
            if (den > 0.0)
                z = diff / den;
            else if (std::abs(diff) > 1e-12)
                z = std::copysign(std::numeric_limits<double>::infinity(), diff);
            worst = std::max(worst, std::abs(z));
            ref.row({fmt(st.times[i]), name + ":" + std::to_string(site), fmt(me)});
            cmp.row({fmt(st.times[i]), name, std::to_string(site), fmt(me), fmt(s.mean[i]), fmt(s.se[i]), std::to_string(s.count[i]), fmt(z)});
        };
        for (size_t o = 0; o < obs.size(); ++o) emit(obs[o].name, obs[o].site, me_value(i, static_cast<int>(o)), st.find(obs[o].name, obs[o].site));
        for (const Connected& c : req.record.connected)
            emit(c.name, c.site, me_value(i, c.ab) - me_value(i, c.a) * me_value(i, c.b), st.find(c.name, c.site));
    }
    ref.close();
    cmp.close();
    write_ensemble_csv(path_in(cfg.out, "ensemble.csv"), st);
    write_choices_csv(path_in(cfg.out, "choices.csv"), st);
    log << "oracle: max |z| = " << worst << " (threshold " << cfg.oracle.threshold << ")\n";
    const bool exceeded = worst > cfg.oracle.threshold;
    if (status == kExitOk && exceeded) status = kExitOracle;
    write_manifest(path_in(cfg.out, "manifest.json"), "oracle", cfg.to_json(), seconds_since(t0),
                   {{"max_abs_z", worst}, {"threshold_exceeded", exceeded}, {"failures", failure_report(st)}});
    return status;
}

int cmd_bell(const BellOptions& opt, std::ostream& log) {
    const auto t0 = Clock::now();
    if (!(opt.gamma > 0.0)) throw ConfigError("bell: gamma must be positive");
    if (!(opt.dt > 0.0) || opt.gamma * opt.dt > 0.1) throw ConfigError("bell: need 0 < gamma dt <= 0.1");
    if (opt.trajectories < 1) throw ConfigError("bell: need at least one trajectory");
    make_dir(opt.out);
    const std::vector<std::pair<std::string, Policy>> policies = {
        {"number", Policy::number()}, {"homodyne", Policy::homodyne({0.0})}, {"eoqt", Policy::eoqt()}};
    std::vector<EnsembleStats> stats;
    int status = kExitOk;
    for (const auto& [name, pol] : policies) {
        EnsembleRequest r;
        r.model = bell_model(opt.gamma);
        r.policy = pol;
        r.options.dt = opt.dt;
        r.options.t_end = opt.t_end;
        r.record.samples = opt.samples;
        r.trajectories = opt.trajectories;
        r.master_seed = opt.seed;
        r.workers = worker_override(opt.workers);
        log << "bell: " << name << " N=" << opt.trajectories << "\n";
        stats.push_back(run_ensemble(r).stats);
        const std::string sub = path_in(opt.out, name);
        make_dir(sub);
        write_ensemble_csv(path_in(sub, "ensemble.csv"), stats.back());
        write_choices_csv(path_in(sub, "choices.csv"), stats.back());
        status = std::max(status, runtime_status(stats.back(), log));
    }
    if (stats[0].n_ok == 0 || stats[1].n_ok == 0 || stats[2].n_ok == 0) return kExitRuntime;
    CsvWriter w(path_in(opt.out, "bell.csv"),
                {"t", "gamma_t", "number_mean", "number_stderr", "homodyne_mean", "homodyne_stderr", "eoqt_mean", "eoqt_stderr", "N",
                 "sigma_2gt", "homodyne_quadrature", "e_formation", "excess_number", "excess_homodyne", "excess_eoqt",
                 "eoqt_frac_number", "eoqt_frac_homodyne"});
    const Series& sn = stats[0].find("eaee", 1);
    const Series& sh = stats[1].find("eaee", 1);
    const Series& se = stats[2].find("eaee", 1);
    for (size_t i = 0; i < stats[0].times.size(); ++i) {
        const double t = stats[0].times[i];
        const double gt = opt.gamma * t;
        const double ef = bell::entanglement_of_formation(gt);
        double fn = 0.0, fh = 0.0;
        for (const ChoiceSeries& c : stats[2].choices) {
            fn += c.frac_number[i] / stats[2].choices.size();
            fh += c.frac_homodyne[i] / stats[2].choices.size();
        }
        const int n = std::min({sn.count[i], sh.count[i], se.count[i]});
        w.row({fmt(t), fmt(gt), fmt(sn.mean[i]), fmt(sn.se[i]), fmt(sh.mean[i]), fmt(sh.se[i]), fmt(se.mean[i]), fmt(se.se[i]),
               std::to_string(n), fmt(bell::eaee_number(gt)), fmt(bell::eaee_homodyne(bell::homodyne_tau(gt, 0.0, 0.0))), fmt(ef),
               fmt(sn.mean[i] - ef), fmt(sh.mean[i] - ef), fmt(se.mean[i] - ef), fmt(fn), fmt(fh)});
    }
    w.close();
    const Json echo = {{"gamma", opt.gamma}, {"dt", opt.dt}, {"T", opt.t_end}, {"trajectories", opt.trajectories},
                       {"samples", opt.samples}, {"master_seed", opt.seed}, {"workers", opt.workers}, {"out", opt.out}};
    write_manifest(path_in(opt.out, "manifest.json"), "bell", echo, seconds_since(t0));
    return status;
}

int cmd_rbc(const RbcOptions& opt, std::ostream& log) {
    const auto t0 = Clock::now();
    if (opt.sizes.empty()) throw ConfigError("rbc: no system sizes");
    for (int n : opt.sizes)
        if (n < 2) throw ConfigError("rbc: sizes must be at least 2");
    if (opt.chi < 1) throw ConfigError("rbc: chi must be positive");
    if (!(opt.dt > 0.0) || opt.gamma * opt.dt > 0.1) throw ConfigError("rbc: need 0 < gamma dt <= 0.1");
    if (opt.trajectories < 1) throw ConfigError("rbc: need at least one trajectory");
    make_dir(opt.out);

    struct Job {
        std::string label;
        Policy policy;
        std::string phase;
    };
    std::vector<Job> jobs;
    for (double phi : opt.phases) jobs.push_back({"homodyne", Policy::homodyne({phi}), fmt(phi)});
    if (opt.number) jobs.push_back({"number", Policy::number(), ""});
    if (opt.eoqt) jobs.push_back({"eoqt", Policy::eoqt(), ""});

    CsvWriter prof(path_in(opt.out, "rbc_profile.csv"), {"policy", "phi", "n", "cut", "mean", "stderr", "N"});
    CsvWriter ts(path_in(opt.out, "rbc_timeseries.csv"), {"policy", "phi", "n", "t", "cut", "mean", "stderr", "N"});
    int status = kExitOk;
    for (int n : opt.sizes)
        for (const Job& job : jobs) {
            EnsembleRequest r;
            r.model = rbc_model({opt.alpha, opt.gamma, true}, n);
            r.policy = job.policy;
            r.options.dt = opt.dt;
            r.options.t_end = opt.t_end;
            r.options.truncation.chi_max = opt.chi;
            r.options.frozen_circuit = opt.frozen_circuit;
            r.record.samples = opt.samples;
            for (int b = 1; b < n; ++b) r.record.cuts.push_back(b);
            r.trajectories = opt.trajectories;
            r.master_seed = opt.seed;
            r.workers = worker_override(opt.workers);
            r.keep_records = true;
            log << "rbc: n=" << n << " " << job.label << (job.phase.empty() ? "" : " phi=" + job.phase) << "\n";
            const EnsembleResult res = run_ensemble(r);
            status = std::max(status, runtime_status(res.stats, log));
            if (res.stats.n_ok == 0) continue;
            for (int b = 1; b < n; ++b) {
                const Estimate e = long_time_eaee(res.records, b - 1);
                prof.row({job.label, job.phase, std::to_string(n), std::to_string(b), fmt(e.mean), fmt(e.se), std::to_string(e.n)});
                const Series& s = res.stats.find("eaee", b);
                for (size_t i = 0; i < res.stats.times.size(); ++i)
                    ts.row({job.label, job.phase, std::to_string(n), fmt(res.stats.times[i]), std::to_string(b), fmt(s.mean[i]),
                            fmt(s.se[i]), std::to_string(s.count[i])});
            }
        }
    prof.close();
    ts.close();
    Json sizes = opt.sizes, phases = opt.phases;
    const Json echo = {{"sizes", sizes},        {"chi", opt.chi},     {"phases", phases},     {"number", opt.number},
                       {"eoqt", opt.eoqt},      {"alpha", opt.alpha}, {"gamma", opt.gamma},   {"dt", opt.dt},
                       {"T", opt.t_end},        {"trajectories", opt.trajectories},           {"samples", opt.samples},
                       {"master_seed", opt.seed}, {"workers", opt.workers}, {"frozen_circuit", opt.frozen_circuit}, {"out", opt.out}};
    write_manifest(path_in(opt.out, "manifest.json"), "rbc", echo, seconds_since(t0));
    return status;
}

int cmd_sweep_phase(const RunConfig& cfg, const std::vector<double>& phases, std::ostream& log) {
    const auto t0 = Clock::now();
    if (phases.empty()) throw ConfigError("sweep-phase: no phases");
    make_dir(cfg.out);
    CsvWriter w(path_in(cfg.out, "sweep_phase.csv"), {"phi", "cut", "mean", "stderr", "N"});
    int status = kExitOk;
    for (double phi : phases) {
        RunConfig c = cfg;
        c.policy = "homodyne";
        c.phases = {phi};
        EnsembleRequest r = build_request(c);
        r.record.observables.clear();
        r.record.connected.clear();
        r.keep_records = true;
        log << "sweep-phase: phi=" << phi << "\n";
        const EnsembleResult res = run_ensemble(r);
        status = std::max(status, runtime_status(res.stats, log));
        if (res.stats.n_ok == 0) continue;
        const std::vector<int> cuts = resolve_cuts(r.record, cfg.n);
        for (size_t k = 0; k < cuts.size(); ++k) {
            const Estimate e = long_time_eaee(res.records, static_cast<int>(k));
            w.row({fmt(phi), std::to_string(cuts[k]), fmt(e.mean), fmt(e.se), std::to_string(e.n)});
        }
    }
    w.close();
    Json echo = cfg.to_json();
    echo["sweep_phases"] = phases;
    write_manifest(path_in(cfg.out, "manifest.json"), "sweep-phase", echo, seconds_since(t0));
    return status;
}

}  // namespace eoqt::io
