#include <doctest.h>

#include "eoqt/engine/engine.hpp"
#include "eoqt/models/bell.hpp"

using namespace eoqt;

namespace {

EnsembleRequest bell_request(Policy p, int n, int workers) {
    EnsembleRequest r;
    r.model = bell_model(1.0);
    r.policy = p;
    r.options.dt = 0.01;
    r.options.t_end = 1.0;
    r.record.samples = 11;
    r.trajectories = n;
    r.master_seed = 77;
    r.workers = workers;
    r.keep_records = true;
    return r;
}

}  // namespace

TEST_CASE("sample grid") {
    CHECK(sample_steps(100, 11) == std::vector<long>{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
    CHECK(sample_steps(3, 10) == std::vector<long>{0, 1, 2, 3});
    CHECK(sample_steps(7, 1) == std::vector<long>{7});
    CHECK(step_count(3.0, 1e-3) == 3000);
    CHECK_THROWS(step_count(1.0, 0.3));
    CHECK_THROWS(step_count(1.0, 0.0));
}

TEST_CASE("trajectory records are reproducible and bounded") {
    const auto r = bell_request(Policy::eoqt(), 1, 1);
    const TrajectoryRecord a = run_trajectory(r.model, r.policy, r.options, r.record, 5, 3);
    const TrajectoryRecord b = run_trajectory(r.model, r.policy, r.options, r.record, 5, 3);
    const TrajectoryRecord c = run_trajectory(r.model, r.policy, r.options, r.record, 5, 4);
    REQUIRE(!a.failed);
    CHECK(a.eaee == b.eaee);
    CHECK(a.eaee != c.eaee);
    CHECK(a.times.size() == 11);
    CHECK(a.eaee[0][0] == doctest::Approx(1.0));
    for (size_t i = 0; i < a.times.size(); ++i) {
        if (i > 0) CHECK(a.times[i] > a.times[i - 1]);
        CHECK(a.eaee[0][i] >= -1e-12);
        CHECK(a.eaee[0][i] <= 1.0 + 1e-12);
    }
    // Window i > 0 covers the steps since the previous sample; window 0 repeats the first step.
    int steps = 0;
    for (size_t i = 1; i < a.choices[0].size(); ++i) steps += a.choices[0][i].steps;
    CHECK(steps == 100);
    CHECK(a.choices[0][0].steps == 1);
}

TEST_CASE("ensemble results do not depend on worker count") {
    const EnsembleResult one = run_ensemble(bell_request(Policy::number(), 24, 1));
    const EnsembleResult many = run_ensemble(bell_request(Policy::number(), 24, 8));
    REQUIRE(one.stats.series.size() == many.stats.series.size());
    for (size_t s = 0; s < one.stats.series.size(); ++s) {
        CHECK(one.stats.series[s].mean == many.stats.series[s].mean);
        CHECK(one.stats.series[s].se == many.stats.series[s].se);
    }
    CHECK(one.stats.n_ok == 24);
}

TEST_CASE("single trajectory ensemble equals its record") {
    const EnsembleResult r = run_ensemble(bell_request(Policy::homodyne({0.0}), 1, 1));
    CHECK(r.stats.find("eaee", 1).mean == r.records[0].eaee[0]);
    for (double se : r.stats.find("eaee", 1).se) CHECK(se == 0.0);
}

TEST_CASE("zero rate gives deterministic coherent evolution") {
    EnsembleRequest r;
    r.model = ising_model({-0.5, 2.5, 0.5, 0.0}, 4);
    r.policy = Policy::number();
    r.options.dt = 0.01;
    r.options.t_end = 0.5;
    r.record.samples = 6;
    r.record.observables = population_observables(4, 2);
    r.trajectories = 5;
    r.keep_records = true;
    const EnsembleResult res = run_ensemble(r);
    for (const auto& row : variance_report(res.records))
        for (double v : row) CHECK(v < 1e-24);
    for (size_t k = 1; k < res.records.size(); ++k) CHECK(res.records[k].observables == res.records[0].observables);
}

TEST_CASE("homodyne policy validates the phase list") {
    auto r = bell_request(Policy::homodyne({0.0, 0.1, 0.2}), 1, 1);
    CHECK_THROWS(run_trajectory(r.model, r.policy, r.options, r.record, 1, 0));
}

TEST_CASE("failures are reported per trajectory") {
    auto r = bell_request(Policy::number(), 3, 1);
    r.options.dt = 0.5;
    r.options.t_end = 1.0;
    r.model.channels[0].rate = 10.0;  // p = rate dt <n> >= 1
    const EnsembleResult res = run_ensemble(r);
    CHECK(res.stats.n_ok == 0);
    CHECK(res.stats.failed_ids.size() == 3);
    CHECK(res.stats.failures[0].find("trajectory 0") != std::string::npos);
}

TEST_CASE("connected correlator and long time average") {
    std::vector<TrajectoryRecord> recs(3);
    const double vals[3][3] = {{1.0, 1.0, 1.0}, {0.0, 0.0, 1.0}, {0.5, 1.0, 0.0}};
    for (int k = 0; k < 3; ++k) {
        recs[k].times = {0.0, 1.0};
        recs[k].eaee = {{0.0, vals[k][0]}};
        recs[k].observables = {{vals[k][0], vals[k][0]}, {vals[k][1], vals[k][1]}, {vals[k][2], vals[k][2]}};
    }
    const auto cc = connected_correlator(recs, 0, 1, 2);
    const double mab = 0.5, ma = 2.0 / 3, mb = 2.0 / 3;
    CHECK(cc[1].mean == doctest::Approx(mab - ma * mb));
    CHECK(cc[1].se > 0.0);
    const Estimate e = long_time_eaee(recs, 0, 0.25);
    CHECK(e.mean == doctest::Approx(0.5));
    CHECK(e.n == 3);
    CHECK(e.se == doctest::Approx(0.5 / std::sqrt(3.0)));
}

TEST_CASE("rbc frozen circuit shares realizations") {
    EnsembleRequest r;
    r.model = rbc_model({1.0, 0.0, true}, 4);
    r.policy = Policy::number();
    r.options.dt = 0.01;
    r.options.t_end = 0.2;
    r.options.frozen_circuit = true;
    r.record.samples = 3;
    r.trajectories = 3;
    r.keep_records = true;
    const EnsembleResult frozen = run_ensemble(r);
    CHECK(frozen.records[0].eaee == frozen.records[2].eaee);
    r.options.frozen_circuit = false;
    const EnsembleResult fresh = run_ensemble(r);
    CHECK(fresh.records[0].eaee != fresh.records[2].eaee);
}
