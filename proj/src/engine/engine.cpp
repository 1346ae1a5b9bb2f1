#include "eoqt/engine/engine.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <cmath>
#include <numeric>
#include <thread>

#include "eoqt/propagators/propagators.hpp"

namespace eoqt {

std::string Policy::label() const {
    switch (kind) {
        case Kind::Number: return "number";
        case Kind::Homodyne: return "homodyne";
        case Kind::Eoqt: return "eoqt";
    }
    return "unknown";
}

long step_count(double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("need dt > 0 and T >= 0");
    const long k = std::lround(t_end / dt);
    if (std::abs(static_cast<double>(k) * dt - t_end) > 1e-9 * std::max(1.0, t_end))
        throw std::invalid_argument("T must be an integer multiple of dt");
    return k;
}

std::vector<long> sample_steps(long total_steps, int samples) {
    if (samples < 1) throw std::invalid_argument("need at least one sample");
    std::vector<long> out;
    if (samples == 1 || total_steps == 0) return {total_steps};
    for (int i = 0; i < samples; ++i) {
        const long s = std::lround(static_cast<double>(i) * static_cast<double>(total_steps) / (samples - 1));
        if (out.empty() || s > out.back()) out.push_back(s);
    }
    return out;
}

std::vector<int> resolve_cuts(const RecordSpec& spec, int n) {
    if (n < 2) return {};
    std::vector<int> cuts = spec.cuts.empty() ? std::vector<int>{n / 2} : spec.cuts;
    for (int c : cuts)
        if (c < 1 || c >= n) throw std::invalid_argument("recorded cut " + std::to_string(c) + " outside 1..n-1");
    return cuts;
}

std::vector<Observable> population_observables(int n, int d) {
    std::vector<Observable> out;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < d; ++k) out.push_back({"pop" + std::to_string(k), j, {{j, ops::ket_bra(d, k, k)}}});
    return out;
}

void add_default_observables(RecordSpec& spec, int n, int d) {
    for (const Observable& o : population_observables(n, d)) spec.observables.push_back(o);
    if (d != 2) return;
    const int base = static_cast<int>(spec.observables.size());
    for (int j = 0; j < n; ++j) spec.observables.push_back({"sz", j, {{j, ops::sigma_z()}}});
    for (int j = 0; j + 1 < n; ++j) {
        spec.observables.push_back({"szsz", j, {{j, ops::sigma_z()}, {j + 1, ops::sigma_z()}}});
        const int ab = static_cast<int>(spec.observables.size()) - 1;
        spec.connected.push_back({"szsz_connected", j, ab, base + j, base + j + 1});
    }
}

namespace {

bool finite_state(const MpsState& s) {
    for (int b = 1; b < s.size(); ++b)
        if (!s.lambda(b).allFinite()) return false;
    return true;
}

void record_sample(TrajectoryRecord& rec, const MpsState& state, const RecordSpec& spec, double t) {
    rec.times.push_back(t);
    for (size_t c = 0; c < rec.cuts.size(); ++c) rec.eaee[c].push_back(state.entanglement_entropy(rec.cuts[c]));
    for (size_t o = 0; o < spec.observables.size(); ++o)
        rec.observables[o].push_back(state.expectation_product(spec.observables[o].factors).real());
    rec.max_bond.push_back(state.max_bond_dim());
    rec.discarded.push_back(state.discarded_weight());
}

}  // namespace

TrajectoryRecord run_trajectory(const ModelSpec& model, const Policy& policy, const RunOptions& opt,
                                const RecordSpec& spec, std::uint64_t master_seed, std::uint64_t id) {
    TrajectoryRecord rec;
    rec.id = id;
    rec.seed = master_seed;
    rec.cuts = resolve_cuts(spec, model.n);
    rec.eaee.resize(rec.cuts.size());
    rec.observables.resize(spec.observables.size());

    const long total = step_count(opt.t_end, opt.dt);
    const std::vector<long> samples = sample_steps(total, spec.samples);

    std::vector<PreparedChannel> channels;
    for (const JumpChannel& c : model.channels) {
        if (c.site < 0 || c.site >= model.n) throw std::invalid_argument("channel site outside chain");
        channels.emplace_back(c, opt.dt);
    }
    std::stable_sort(channels.begin(), channels.end(),
                     [](const PreparedChannel& a, const PreparedChannel& b) { return a.channel.site < b.channel.site; });
    const int m = static_cast<int>(channels.size());
    rec.choices.assign(m, std::vector<ChoiceWindow>(samples.size()));

    std::vector<double> phases(m, 0.0);
    if (policy.kind == Policy::Kind::Homodyne) {
        if (policy.phases.size() == 1)
            phases.assign(m, policy.phases[0]);
        else if (static_cast<int>(policy.phases.size()) == m)
            phases = policy.phases;
        else
            throw std::invalid_argument("homodyne policy needs one phase per channel");
    }
    const int cut = policy.cut > 0 ? policy.cut : model.n / 2;
    if (policy.kind == Policy::Kind::Eoqt && (cut < 1 || cut >= model.n))
        throw std::invalid_argument("optimization cut outside 1..n-1");

    const std::vector<BondGate> fixed_gates =
        model.random_layer ? std::vector<BondGate>{} : trotter_layer(model.bond_hamiltonians, model.d, opt.dt);

    Rng rng(master_seed, id);
    Rng frozen(master_seed, kFrozenCircuitStream);
    Rng& circuit_rng = opt.frozen_circuit ? frozen : rng;

    MpsState state = model.initial_state(opt.truncation);
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);

    size_t next = 0;
    if (samples[0] == 0) {
        record_sample(rec, state, spec, 0.0);
        next = 1;
    }
    try {
        for (long k = 0; k < total; ++k) {
            const double t = static_cast<double>(k) * opt.dt;
            if (opt.shuffle_channels)
                for (int i = m - 1; i > 0; --i) std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);
            const size_t window = next < samples.size() ? next : samples.size() - 1;
            for (int idx : order) {
                const PreparedChannel& pc = channels[idx];
                PropagatorKind kind = PropagatorKind::Homodyne;
                double phase = phases[idx];
                double predicted = 0.0;
                if (policy.kind == Policy::Kind::Number) {
                    kind = PropagatorKind::Number;
                } else if (policy.kind == Policy::Kind::Eoqt) {
                    const PropagatorChoice c = choose_propagator(state, pc.channel, cut);
                    kind = c.kind;
                    phase = c.phase;
                    predicted = c.rate;
                }
                if (kind == PropagatorKind::Number) {
                    if (number_step(state, pc, rng.uniform()) && spec.jump_log) rec.jumps.push_back({t, idx});
                } else
                    homodyne_step(state, pc, phase, std::sqrt(opt.dt) * rng.normal());

                ChoiceWindow& w = rec.choices[idx][window];
                ++w.steps;
                if (kind == PropagatorKind::Number)
                    ++w.number;
                else
                    w.phase_sum += phase;
                if (k == 0 && window != 0) {
                    ChoiceWindow& w0 = rec.choices[idx][0];
                    ++w0.steps;
                    if (kind == PropagatorKind::Number)
                        ++w0.number;
                    else
                        w0.phase_sum += phase;
                }
                if (spec.decision_log) rec.decisions.push_back({t, idx, kind, phase, predicted});
            }
            state.canonicalize();
            if (!finite_state(state)) throw NumericalError("non-finite Schmidt values after stochastic layer");

            if (model.random_layer) {
                for (const BondGate& g : model.random_layer(opt.dt, circuit_rng)) state.apply_two_site_gate(g.site, g.u);
            } else {
                for (const BondGate& g : fixed_gates) state.apply_two_site_gate(g.site, g.u);
            }
            if (!finite_state(state)) throw NumericalError("non-finite Schmidt values after gate layer");

            if (next < samples.size() && k + 1 == samples[next]) {
                record_sample(rec, state, spec, static_cast<double>(k + 1) * opt.dt);
                ++next;
            }
        }
        if (!opt.checkpoint_dir.empty())
            state.write_checkpoint((std::filesystem::path(opt.checkpoint_dir) / (std::to_string(id) + ".mps")).string());
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.non_finite = dynamic_cast<const NumericalError*>(&e) != nullptr;
        rec.error = "trajectory " + std::to_string(id) + " at t=" + std::to_string(rec.times.empty() ? 0.0 : rec.times.back()) +
                    ": " + e.what();
    }
    return rec;
}

const Series& EnsembleStats::find(const std::string& quantity, int index) const {
    for (const Series& s : series)
        if (s.quantity == quantity && s.index == index) return s;
    throw std::out_of_range("no series " + quantity + "[" + std::to_string(index) + "]");
}

namespace {

std::vector<Estimate> connected_from(const std::vector<const TrajectoryRecord*>& ok, int ab, int a, int b) {
    if (ok.size() < 2) throw std::invalid_argument("connected correlator needs at least two records");
    const size_t len = ok.front()->times.size();
    const double nn = static_cast<double>(ok.size());
    std::vector<Estimate> out(len);
    for (size_t i = 0; i < len; ++i) {
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto* r : ok) mean += Eigen::Vector3d(r->observables[ab][i], r->observables[a][i], r->observables[b][i]);
        mean /= nn;
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto* r : ok) {
            const Eigen::Vector3d x = Eigen::Vector3d(r->observables[ab][i], r->observables[a][i], r->observables[b][i]) - mean;
            cov += x * x.transpose();
        }
        cov /= (nn - 1.0) * nn;  // covariance of the means
        const Eigen::Vector3d grad(1.0, -mean[2], -mean[1]);
        out[i].mean = mean[0] - mean[1] * mean[2];
        out[i].se = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
        out[i].n = static_cast<int>(ok.size());
    }
    return out;
}

Series summarize(const std::string& name, int index, const std::vector<const std::vector<double>*>& rows, size_t len) {
    Series s;
    s.quantity = name;
    s.index = index;
    s.mean.assign(len, 0.0);
    s.se.assign(len, 0.0);
    s.count.assign(len, static_cast<int>(rows.size()));
    const double nn = static_cast<double>(rows.size());
    for (size_t i = 0; i < len; ++i) {
        double sum = 0.0;
        for (const auto* r : rows) sum += (*r)[i];
        const double mean = sum / nn;
        double ss = 0.0;
        for (const auto* r : rows) ss += ((*r)[i] - mean) * ((*r)[i] - mean);
        s.mean[i] = mean;
        s.se[i] = rows.size() > 1 ? std::sqrt(ss / (nn - 1.0) / nn) : 0.0;
    }
    return s;
}

}  // namespace

EnsembleStats aggregate(const std::vector<TrajectoryRecord>& records, const RecordSpec& spec, int channels) {
    EnsembleStats st;
    std::vector<const TrajectoryRecord*> ok;
    for (const TrajectoryRecord& r : records) {
        if (r.failed) {
            st.failed_ids.push_back(r.id);
            st.failures.push_back(r.error);
            st.non_finite = st.non_finite || r.non_finite;
        } else {
            ok.push_back(&r);
        }
    }
    st.n_ok = static_cast<int>(ok.size());
    if (ok.empty()) return st;
    st.times = ok.front()->times;
    const size_t len = st.times.size();
    for (const auto* r : ok)
        if (r->times.size() != len) throw std::logic_error("trajectory time grids differ");

    std::vector<const std::vector<double>*> rows(ok.size());
    const std::vector<int>& cuts = ok.front()->cuts;
    for (size_t c = 0; c < cuts.size(); ++c) {
        for (size_t k = 0; k < ok.size(); ++k) rows[k] = &ok[k]->eaee[c];
        st.series.push_back(summarize("eaee", cuts[c], rows, len));
    }
    for (size_t o = 0; o < spec.observables.size(); ++o) {
        for (size_t k = 0; k < ok.size(); ++k) rows[k] = &ok[k]->observables[o];
        st.series.push_back(summarize(spec.observables[o].name, spec.observables[o].site, rows, len));
    }
    if (!spec.connected.empty()) {
        for (const Connected& c : spec.connected) {
            Series s;
            s.quantity = c.name;
            s.index = c.site;
            if (ok.size() >= 2) {
                for (const Estimate& e : connected_from(ok, c.ab, c.a, c.b)) {
                    s.mean.push_back(e.mean);
                    s.se.push_back(e.se);
                    s.count.push_back(e.n);
                }
            } else {
                for (size_t i = 0; i < len; ++i) {
                    const auto& o = ok.front()->observables;
                    s.mean.push_back(o[c.ab][i] - o[c.a][i] * o[c.b][i]);
                    s.se.push_back(0.0);
                    s.count.push_back(1);
                }
            }
            st.series.push_back(std::move(s));
        }
    }
    std::vector<std::vector<double>> bonds(ok.size());
    for (size_t k = 0; k < ok.size(); ++k) {
        bonds[k].assign(ok[k]->max_bond.begin(), ok[k]->max_bond.end());
        rows[k] = &bonds[k];
    }
    st.series.push_back(summarize("max_bond_dim", -1, rows, len));
    for (size_t k = 0; k < ok.size(); ++k) rows[k] = &ok[k]->discarded;
    st.series.push_back(summarize("discarded_weight", -1, rows, len));

    for (int c = 0; c < channels; ++c) {
        ChoiceSeries cs;
        cs.channel = c;
        for (size_t i = 0; i < len; ++i) {
            long steps = 0, number = 0;
            double phase = 0.0;
            for (const auto* r : ok) {
                const ChoiceWindow& w = r->choices[c][i];
                steps += w.steps;
                number += w.number;
                phase += w.phase_sum;
            }
            const double fn = steps > 0 ? static_cast<double>(number) / static_cast<double>(steps) : 0.0;
            cs.frac_number.push_back(fn);
            cs.frac_homodyne.push_back(steps > 0 ? 1.0 - fn : 0.0);
            cs.mean_phase.push_back(steps > number ? phase / static_cast<double>(steps - number) : 0.0);
        }
        st.choices.push_back(std::move(cs));
    }
    return st;
}

EnsembleResult run_ensemble(const EnsembleRequest& req) {
    if (req.trajectories < 1) throw std::invalid_argument("need at least one trajectory");
    const int workers = std::max(1, std::min(req.workers, req.trajectories));
    std::vector<TrajectoryRecord> records(req.trajectories);
    std::atomic<int> counter{0};
    auto work = [&] {
        for (int k = counter.fetch_add(1); k < req.trajectories; k = counter.fetch_add(1)) {
            try {
                records[k] = run_trajectory(req.model, req.policy, req.options, req.record, req.master_seed,
                                            static_cast<std::uint64_t>(k));
            } catch (const std::exception& e) {
                records[k].id = static_cast<std::uint64_t>(k);
                records[k].failed = true;
                records[k].error = "trajectory " + std::to_string(k) + ": " + e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& th : pool) th.join();
    }
    EnsembleResult out;
    out.stats = aggregate(records, req.record, static_cast<int>(req.model.channels.size()));
    if (req.keep_records) out.records = std::move(records);
    return out;
}

std::vector<std::vector<double>> variance_report(const std::vector<TrajectoryRecord>& records) {
    if (records.size() < 2) throw std::invalid_argument("variance needs at least two records");
    const TrajectoryRecord& first = records.front();
    for (const TrajectoryRecord& r : records)
        if (r.times != first.times || r.observables.size() != first.observables.size())
            throw std::invalid_argument("records have mismatched grids");
    std::vector<std::vector<double>> out(first.observables.size(), std::vector<double>(first.times.size()));
    const double nn = static_cast<double>(records.size());
    for (size_t o = 0; o < first.observables.size(); ++o)
        for (size_t i = 0; i < first.times.size(); ++i) {
            double sum = 0.0;
            for (const TrajectoryRecord& r : records) sum += r.observables[o][i];
            const double mean = sum / nn;
            double ss = 0.0;
            for (const TrajectoryRecord& r : records) ss += (r.observables[o][i] - mean) * (r.observables[o][i] - mean);
            out[o][i] = ss / (nn - 1.0);
        }
    return out;
}

Estimate long_time_eaee(const std::vector<TrajectoryRecord>& records, int cut_slot, double fraction) {
    std::vector<double> vals;
    for (const TrajectoryRecord& r : records) {
        if (r.failed) continue;
        const double t0 = (1.0 - fraction) * r.times.back();
        double sum = 0.0;
        int cnt = 0;
        for (size_t i = 0; i < r.times.size(); ++i)
            if (r.times[i] >= t0 - 1e-12) {
                sum += r.eaee[cut_slot][i];
                ++cnt;
            }
        vals.push_back(sum / cnt);
    }
    Estimate e;
    e.n = static_cast<int>(vals.size());
    if (vals.empty()) return e;
    e.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / e.n;
    double ss = 0.0;
    for (double v : vals) ss += (v - e.mean) * (v - e.mean);
    e.se = e.n > 1 ? std::sqrt(ss / (e.n - 1.0) / e.n) : 0.0;
    return e;
}

std::vector<Estimate> connected_correlator(const std::vector<TrajectoryRecord>& records, int ab, int a, int b) {
    std::vector<const TrajectoryRecord*> ok;
    for (const TrajectoryRecord& r : records)
        if (!r.failed) ok.push_back(&r);
    return connected_from(ok, ab, a, b);
}

}  // namespace eoqt
