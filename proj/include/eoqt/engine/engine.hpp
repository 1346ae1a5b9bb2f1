#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "eoqt/models/models.hpp"
#include "eoqt/rates/rates.hpp"

namespace eoqt {

struct Policy {
    enum class Kind { Number, Homodyne, Eoqt };
    Kind kind = Kind::Eoqt;
    std::vector<double> phases;  // Homodyne: one per channel, or a single phase for all
    int cut = 0;                 // Eoqt: target bond, 0 selects n/2

    static Policy number() { return {Kind::Number, {}, 0}; }
    static Policy homodyne(std::vector<double> phases) { return {Kind::Homodyne, std::move(phases), 0}; }
    static Policy eoqt(int cut = 0) { return {Kind::Eoqt, {}, cut}; }
    std::string label() const;
};

// Product of single-site operators on distinct sites.
struct Observable {
    std::string name;
    int site = 0;  // reported position
    std::vector<std::pair<int, Mat>> factors;
};

// <AB> - <A><B> of ensemble means; indices refer to RecordSpec::observables.
struct Connected {
    std::string name;
    int site = 0;
    int ab = 0;
    int a = 0;
    int b = 0;
};

struct RecordSpec {
    int samples = 50;
    std::vector<int> cuts;  // empty selects the half-chain bond
    std::vector<Observable> observables;
    std::vector<Connected> connected;
    bool decision_log = false;
    bool jump_log = false;
};

struct RunOptions {
    double dt = 1e-3;
    double t_end = 1.0;
    Truncation truncation;
    bool frozen_circuit = false;
    bool shuffle_channels = false;
    std::string checkpoint_dir;  // final state of trajectory k is written to <dir>/<k>.mps
};

struct ChoiceWindow {
    int steps = 0;
    int number = 0;
    double phase_sum = 0.0;
};

struct Decision {
    double t = 0.0;
    int channel = 0;
    PropagatorKind kind = PropagatorKind::Homodyne;
    double phase = 0.0;
    double predicted_rate = 0.0;
};

struct JumpEvent {
    double t = 0.0;  // start of the step
    int channel = 0;
};

struct TrajectoryRecord {
    std::uint64_t id = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<int> cuts;
    std::vector<std::vector<double>> eaee;         // [cut][sample]
    std::vector<std::vector<double>> observables;  // [observable][sample]
    std::vector<int> max_bond;
    std::vector<double> discarded;
    // Sample i aggregates the decisions taken in steps [s_{i-1}, s_i); sample 0 holds the first step.
    std::vector<std::vector<ChoiceWindow>> choices;  // [channel][sample]
    std::vector<Decision> decisions;
    std::vector<JumpEvent> jumps;
    bool failed = false;
    bool non_finite = false;
    std::string error;
};

// Step indices of the recorded samples: round(i K / (S-1)), deduplicated.
std::vector<long> sample_steps(long total_steps, int samples);
long step_count(double t_end, double dt);
std::vector<int> resolve_cuts(const RecordSpec& spec, int n);

// Seed stream reserved for the shared circuit in frozen-circuit mode.
inline constexpr std::uint64_t kFrozenCircuitStream = ~std::uint64_t{0};

TrajectoryRecord run_trajectory(const ModelSpec& model, const Policy& policy, const RunOptions& opt,
                                const RecordSpec& spec, std::uint64_t master_seed, std::uint64_t id);

struct Series {
    std::string quantity;
    int index = 0;  // cut for eaee, site for observables, -1 for chain-wide quantities
    std::vector<double> mean;
    std::vector<double> se;
    std::vector<int> count;
};

struct ChoiceSeries {
    int channel = 0;
    std::vector<double> frac_number;
    std::vector<double> frac_homodyne;
    std::vector<double> mean_phase;
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<Series> series;
    std::vector<ChoiceSeries> choices;
    int n_ok = 0;
    std::vector<std::uint64_t> failed_ids;
    std::vector<std::string> failures;
    bool non_finite = false;

    const Series& find(const std::string& quantity, int index) const;
};

struct EnsembleResult {
    EnsembleStats stats;
    std::vector<TrajectoryRecord> records;
};

struct EnsembleRequest {
    ModelSpec model;
    Policy policy;
    RunOptions options;
    RecordSpec record;
    int trajectories = 1;
    std::uint64_t master_seed = 1;
    int workers = 1;
    bool keep_records = false;
};

EnsembleResult run_ensemble(const EnsembleRequest& req);
EnsembleStats aggregate(const std::vector<TrajectoryRecord>& records, const RecordSpec& spec, int channels);

// Sample variance across trajectories of each observable, [observable][sample].
std::vector<std::vector<double>> variance_report(const std::vector<TrajectoryRecord>& records);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    int n = 0;
};

// Per-trajectory average over samples with t >= (1 - fraction) T, then mean and standard error.
Estimate long_time_eaee(const std::vector<TrajectoryRecord>& records, int cut_slot, double fraction = 0.25);

// <AB> - <A><B> from per-trajectory values, standard error by the delta method.
std::vector<Estimate> connected_correlator(const std::vector<TrajectoryRecord>& records, int ab, int a, int b);

// Single-site projector populations |k><k| for every site and level, named "pop<k>".
std::vector<Observable> population_observables(int n, int d);
// Populations, plus sz on every site and sz sz with its connected part on every bond for qubits.
void add_default_observables(RecordSpec& spec, int n, int d);

}  // namespace eoqt
