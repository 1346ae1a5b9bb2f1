#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoqt/engine/engine.hpp"

namespace eoqt::io {

using Json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ObservableConfig {
    std::string name;
    int site = 0;
    std::vector<std::pair<int, std::string>> factors;  // (site, operator name)
};

struct OracleConfig {
    double threshold = 5.0;
    double trajectory_rate_scale = 1.0;  // negative control: scales every channel rate in the trajectories only
    double me_dt = 0.0;                  // 0 selects min(dt, 1e-3)
    double systematic = 0.0;             // absolute allowance added in quadrature to the standard error
};

struct RunConfig {
    std::string model = "bell";
    Json params = Json::object();  // model parameter table, defaults filled in
    int n = 2;
    int d = 2;
    std::string policy = "eoqt";  // number | homodyne | eoqt
    std::vector<double> phases;
    int cut = 0;
    double dt = 1e-3;
    double t_end = 1.0;
    int trajectories = 1;
    int chi_max = 64;
    double trunc_threshold = 1e-14;
    double max_discarded_weight = 0.0;
    std::vector<int> cuts;
    int samples = 50;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::string out = "out";
    bool frozen_circuit = false;
    bool shuffle_channels = false;
    bool save_trajectories = false;
    bool decision_log = false;
    bool jump_log = false;
    bool save_states = false;
    std::string observables_mode = "default";  // default | none | list
    std::vector<ObservableConfig> observables;
    OracleConfig oracle;

    Json to_json() const;
};

// Parses and validates a configuration. Syntax errors report line:column, schema errors the
// field path and its line. A manifest written by a previous run is accepted as well.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

// Names accepted for single-site operators in observable factors: sx sy sz sp sm pop<k>.
Mat named_operator(const std::string& name, int d);

ModelSpec build_model(const RunConfig& cfg);
EnsembleRequest build_request(const RunConfig& cfg);

// Line and column (1-based) of the value at a JSON pointer, or {0, 0} when absent.
std::pair<int, int> locate(const std::string& text, const std::string& pointer);

}  // namespace eoqt::io
