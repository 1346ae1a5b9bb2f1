#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eoqt/io/config.hpp"

namespace eoqt::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitOracle = 3;

struct Overrides {
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> cut;
    std::optional<int> chi;
    bool frozen_circuit = false;
    bool save_states = false;
};

// Applies command-line overrides; EOQT_THREADS, when set, replaces the worker count.
void apply_overrides(RunConfig& cfg, const Overrides& o);
int worker_override(int workers);

std::string git_revision();
void write_manifest(const std::string& path, const std::string& command, const Json& config, double wall_seconds,
                    const Json& extra = Json::object());

int cmd_run(const RunConfig& cfg, std::ostream& log);
// Dense master equation against the trajectory ensemble; exit 3 when some |z| exceeds the threshold.
int cmd_oracle(const RunConfig& cfg, std::ostream& log);

struct BellOptions {
    double gamma = 1.0;
    double dt = 1e-3;
    double t_end = 3.0;
    int trajectories = 10000;
    int samples = 31;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out = "bell_out";
};
int cmd_bell(const BellOptions& opt, std::ostream& log);

struct RbcOptions {
    std::vector<int> sizes{12};
    int chi = 64;
    std::vector<double> phases{0.0, 0.25 * M_PI, 0.375 * M_PI, 0.5 * M_PI};
    bool number = true;
    bool eoqt = true;
    double alpha = 1.0;
    double gamma = 10.0;
    double dt = 5e-3;
    double t_end = 2.0;
    int trajectories = 50;
    int samples = 41;
    std::uint64_t seed = 1;
    int workers = 1;
    bool frozen_circuit = false;
    std::string out = "rbc_out";
};
int cmd_rbc(const RbcOptions& opt, std::ostream& log);

// Long-time EAEE of a configured model under homodyne detection at each phase.
int cmd_sweep_phase(const RunConfig& cfg, const std::vector<double>& phases, std::ostream& log);

}  // namespace eoqt::io
