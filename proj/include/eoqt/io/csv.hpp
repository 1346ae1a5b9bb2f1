#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "eoqt/engine/engine.hpp"

namespace eoqt::io {

// Shortest round-trip text is not required; every float is printed with 17 significant digits.
std::string fmt(double x);

// RFC-4180 writer: CRLF line ends, fields quoted when they contain a comma, quote or line break.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::ofstream out_;
    std::string path_;
    size_t width_;
};

using CsvTable = std::vector<std::vector<std::string>>;
// Strict RFC-4180 reader; the first row is the header. Throws on malformed input.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

// t, quantity, cut_or_site, mean, stderr, N
void write_ensemble_csv(const std::string& path, const EnsembleStats& st);
// t, channel, frac_number, frac_homodyne, mean_phase
void write_choices_csv(const std::string& path, const EnsembleStats& st);
// t, quantity, cut_or_site, value
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec, const RecordSpec& spec);
// t, trajectory_id, channel, choice, phase, predicted_rate
void write_decision_log(const std::string& path, const std::vector<TrajectoryRecord>& records);

// t, trajectory_id, channel, branch; one row per jump of a number step
void write_jump_log(const std::string& path, const std::vector<TrajectoryRecord>& records);

}  // namespace eoqt::io
