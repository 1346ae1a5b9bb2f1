#include "eoqt/io/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace eoqt::io {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string escape(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fmt_int(long long v) { return std::to_string(v); }

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("csv row width mismatch in " + path_);
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << escape(fields[i]);
    }
    out_ << "\r\n";
    if (!out_) throw std::runtime_error("write failed: " + path_);
}

void CsvWriter::close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("write failed: " + path_);
}

CsvTable parse_csv(const std::string& text) {
    CsvTable rows;
    std::vector<std::string> row;
    std::string field;
    size_t i = 0;
    const size_t n = text.size();
    bool any = false;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
    };
    while (i < n) {
        char c = text[i];
        if (c == '"' && field.empty()) {
            ++i;
            while (true) {
                if (i >= n) throw std::runtime_error("csv: unterminated quoted field in row " + std::to_string(rows.size() + 1));
                if (text[i] == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field += text[i++];
            }
            any = true;
            if (i < n && text[i] != ',' && text[i] != '\r' && text[i] != '\n')
                throw std::runtime_error("csv: characters after closing quote in row " + std::to_string(rows.size() + 1));
            continue;
        }
        if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
            ++i;
        } else if (c == '\r' || c == '\n') {
            end_row();
            i += (c == '\r' && i + 1 < n && text[i + 1] == '\n') ? 2 : 1;
        } else {
            if (c == '"') throw std::runtime_error("csv: stray quote in row " + std::to_string(rows.size() + 1));
            field += c;
            any = true;
            ++i;
        }
    }
    if (any || !field.empty()) end_row();
    if (rows.empty()) throw std::runtime_error("csv: missing header row");
    for (size_t r = 1; r < rows.size(); ++r)
        if (rows[r].size() != rows[0].size())
            throw std::runtime_error("csv: row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                                     " fields, header has " + std::to_string(rows[0].size()));
    return rows;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

void write_ensemble_csv(const std::string& path, const EnsembleStats& st) {
    CsvWriter w(path, {"t", "quantity", "cut_or_site", "mean", "stderr", "N"});
    for (size_t i = 0; i < st.times.size(); ++i)
        for (const Series& s : st.series)
            w.row({fmt(st.times[i]), s.quantity, fmt_int(s.index), fmt(s.mean[i]), fmt(s.se[i]), fmt_int(s.count[i])});
    w.close();
}

void write_choices_csv(const std::string& path, const EnsembleStats& st) {
    CsvWriter w(path, {"t", "channel", "frac_number", "frac_homodyne", "mean_phase"});
    for (size_t i = 0; i < st.times.size(); ++i)
        for (const ChoiceSeries& c : st.choices)
            w.row({fmt(st.times[i]), fmt_int(c.channel), fmt(c.frac_number[i]), fmt(c.frac_homodyne[i]), fmt(c.mean_phase[i])});
    w.close();
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec, const RecordSpec& spec) {
    CsvWriter w(path, {"t", "quantity", "cut_or_site", "value"});
    for (size_t i = 0; i < rec.times.size(); ++i) {
        const std::string t = fmt(rec.times[i]);
        for (size_t c = 0; c < rec.cuts.size(); ++c) w.row({t, "eaee", fmt_int(rec.cuts[c]), fmt(rec.eaee[c][i])});
        for (size_t o = 0; o < spec.observables.size(); ++o)
            w.row({t, spec.observables[o].name, fmt_int(spec.observables[o].site), fmt(rec.observables[o][i])});
        w.row({t, "max_bond_dim", "-1", fmt_int(rec.max_bond[i])});
        w.row({t, "discarded_weight", "-1", fmt(rec.discarded[i])});
    }
    w.close();
}

void write_decision_log(const std::string& path, const std::vector<TrajectoryRecord>& records) {
    CsvWriter w(path, {"t", "trajectory_id", "channel", "choice", "phase", "predicted_rate"});
    for (const TrajectoryRecord& r : records)
        for (const Decision& d : r.decisions)
            w.row({fmt(d.t), std::to_string(r.id), fmt_int(d.channel),
                   d.kind == PropagatorKind::Number ? "number" : "homodyne", fmt(d.phase), fmt(d.predicted_rate)});
    w.close();
}

void write_jump_log(const std::string& path, const std::vector<TrajectoryRecord>& records) {
    CsvWriter w(path, {"t", "trajectory_id", "channel", "branch"});
    for (const TrajectoryRecord& r : records)
        for (const JumpEvent& j : r.jumps) w.row({fmt(j.t), std::to_string(r.id), fmt_int(j.channel), "jump"});
    w.close();
}

}  // namespace eoqt::io
