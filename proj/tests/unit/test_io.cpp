#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "eoqt/io/commands.hpp"
#include "eoqt/io/csv.hpp"

using namespace eoqt;
using namespace eoqt::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("eoqt_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text, "c.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kIsing = R"({
  "model": {"name": "ising"},
  "n": 3,
  "policy": {"kind": "eoqt"},
  "dt": 0.01,
  "T": 0.5,
  "trajectories": 40,
  "samples": 6
})";

int run_cli(const std::string& args) {
    const std::string cmd = std::string(EOQT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::set<std::string> keys(const Json& obj) {
    std::set<std::string> out;
    for (auto it = obj.begin(); it != obj.end(); ++it) out.insert(it.key());
    return out;
}

}  // namespace

TEST_CASE("fmt keeps every double exactly") {
    for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.1}) CHECK(std::strtod(fmt(x).c_str(), nullptr) == x);
    CHECK(fmt(0.5) == "0.5");
    CHECK(fmt(std::nan("")) == "nan");
}

TEST_CASE("csv writer output parses back under RFC-4180") {
    const fs::path dir = scratch("csv");
    const fs::path p = dir / "a.csv";
    {
        CsvWriter w(p.string(), {"a", "b,c", "d"});
        w.row({"plain", "with \"quote\"", "two\nlines"});
        w.row({"", "x", "1e-3"});
        CHECK_THROWS(w.row({"too", "few"}));
        w.close();
    }
    const std::string raw = slurp(p);
    CHECK(raw.substr(0, 11) == "a,\"b,c\",d\r\n");
    const CsvTable t = read_csv(p.string());
    REQUIRE(t.size() == 3);
    CHECK(t[0] == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(t[1] == std::vector<std::string>{"plain", "with \"quote\"", "two\nlines"});
    CHECK(t[2] == std::vector<std::string>{"", "x", "1e-3"});
}

TEST_CASE("csv reader rejects malformed input") {
    CHECK_THROWS(parse_csv(""));
    CHECK_THROWS(parse_csv("a,b\r\n1\r\n"));
    CHECK_THROWS(parse_csv("a,b\r\n\"open,1\r\n"));
    CHECK_THROWS(parse_csv("a,b\r\nx\"y,1\r\n"));
    CHECK_THROWS(parse_csv("a,b\r\n\"q\"z,1\r\n"));
    CHECK(parse_csv("a,b\n1,2\n").size() == 2);
    CHECK(parse_csv("a,b\r\n1,2").size() == 2);
}

TEST_CASE("config defaults and echo") {
    const RunConfig c = parse_config(kIsing);
    CHECK(c.model == "ising");
    CHECK(c.params.at("g").get<double>() == 2.5);
    CHECK(c.params.at("h").get<double>() == -0.5);
    CHECK(c.d == 2);
    CHECK(c.chi_max == 64);
    CHECK(c.master_seed == 1);
    const RunConfig again = parse_config(c.to_json().dump());
    CHECK(again.to_json() == c.to_json());
}

TEST_CASE("config errors name the field and its line") {
    std::string text = kIsing;
    text.replace(text.find("  \"dt\": 0.01,\n"), 14, "");
    std::string e = config_error(text);
    CHECK(e.find("dt: missing required field") != std::string::npos);
    CHECK(e.find("c.json:1:1") == 0);

    e = config_error(R"({"model": {"name": "ising", "params": {"g": 2.5,
  "gama": 1}}, "dt": 0.01, "T": 1, "trajectories": 1})");
    CHECK(e.find("c.json:2:11: model.params.gama: unknown field") == 0);

    e = config_error(R"({"model": {"name": "ising"}, "dt": 0.01, "T": 1, "trajectories": 1,
 "policy": {"kind": "homodyne", "phases": [0, 1]}})");
    CHECK(e.find("c.json:2:") == 0);
    CHECK(e.find("policy.phases: needs one phase or one per channel (4)") != std::string::npos);

    e = config_error(R"({"model": {"name": "ising"}, "dt": 0.01, "T": 1, "trajectories": 1,
 "observables": [{"name": "x", "factors": [{"site": 0, "op": "sz"}, {"site": 0, "op": "bogus"}]}]})");
    CHECK(e.find("observables[0].factors[1].op") != std::string::npos);

    e = config_error("{\"model\": {\"name\": \"ising\"},\n  \"dt\": 0.01,, \"T\": 1}");
    CHECK(e.find("c.json:2:14: syntax error") == 0);

    CHECK(config_error(R"({"model": {"name": "ising", "params": {"gamma": 20}}, "dt": 0.01, "T": 1, "trajectories": 1})")
              .find("dt times the largest rate") != std::string::npos);
    CHECK(config_error(R"({"model": {"name": "ising"}, "dt": 0.03, "T": 1, "trajectories": 1})").find("T: must be an integer multiple") !=
          std::string::npos);
    CHECK(config_error(R"({"model": {"name": "bell"}, "n": 3, "dt": 0.01, "T": 1, "trajectories": 1})").find("n: the bell model") !=
          std::string::npos);
    CHECK(config_error(R"({"model": {"name": "heisenberg"}, "dt": 0.01, "T": 1, "trajectories": 1})").find("model.name") !=
          std::string::npos);
}

TEST_CASE("published schema lists exactly the accepted fields") {
    const Json schema = Json::parse(slurp(fs::path(EOQT_SOURCE_DIR) / "schema/config.schema.json"));
    const Json& props = schema.at("properties");

    RunConfig c = parse_config(R"({"model": {"name": "rbc", "params": {"include_identity": false}}, "n": 4, "dt": 0.005, "T": 0.01,
      "trajectories": 1, "policy": {"kind": "homodyne", "phases": [0.5]}, "cuts": [1, 2],
      "observables": [{"name": "x", "factors": [{"site": 1, "op": "sx"}]}]})");
    const Json echo = c.to_json();
    CHECK(keys(echo) == keys(props));
    CHECK(keys(echo.at("policy")) == keys(props.at("policy").at("properties")));
    CHECK(keys(echo.at("oracle")) == keys(props.at("oracle").at("properties")));
    const Json& obs = props.at("observables").at("oneOf").at(1).at("items");
    CHECK(keys(echo.at("observables").at(0)) == keys(obs.at("properties")));
    CHECK(keys(echo.at("observables").at(0).at("factors").at(0)) == keys(obs.at("properties").at("factors").at("items").at("properties")));

    std::set<std::string> params;
    for (const char* m : {"bell", "ising", "eit", "rbc"}) {
        const RunConfig mc = parse_config(std::string(R"({"model": {"name": ")") + m + R"("}, "dt": 0.005, "T": 0.01, "trajectories": 1})");
        for (const std::string& k : keys(mc.params)) params.insert(k);
    }
    CHECK(params == keys(props.at("model").at("properties").at("params").at("properties")));
    std::set<std::string> required;
    for (const Json& r : schema.at("required")) required.insert(r.get<std::string>());
    CHECK(required == std::set<std::string>{"model", "dt", "T", "trajectories"});
}

TEST_CASE("named operators") {
    CHECK((named_operator("sz", 2) - ops::sigma_z()).norm() == 0.0);
    CHECK((named_operator("sp", 2) - ops::ket_bra(2, 1, 0)).norm() == 0.0);
    CHECK((named_operator("pop2", 3) - ops::ket_bra(3, 2, 2)).norm() == 0.0);
    CHECK_THROWS(named_operator("sz", 3));
    CHECK_THROWS(named_operator("pop3", 3));
}

TEST_CASE("cmd_run is independent of the worker count and reproducible from its manifest") {
    const fs::path dir = scratch("run");
    RunConfig c = parse_config(kIsing);
    c.decision_log = true;
    c.jump_log = true;
    c.save_trajectories = true;
    std::ostringstream log;
    c.workers = 1;
    c.out = (dir / "w1").string();
    REQUIRE(cmd_run(c, log) == kExitOk);
    c.workers = 8;
    c.out = (dir / "w8").string();
    REQUIRE(cmd_run(c, log) == kExitOk);
    for (const char* f : {"ensemble.csv", "choices.csv", "decisions.csv", "jumps.csv", "trajectories/7.csv"})
        CHECK(slurp(dir / "w1" / f) == slurp(dir / "w8" / f));

    RunConfig m = load_config((dir / "w8/manifest.json").string());
    m.out = (dir / "again").string();
    REQUIRE(cmd_run(m, log) == kExitOk);
    CHECK(slurp(dir / "again/ensemble.csv") == slurp(dir / "w1/ensemble.csv"));

    const CsvTable t = read_csv((dir / "w1/ensemble.csv").string());
    CHECK(t[0] == std::vector<std::string>{"t", "quantity", "cut_or_site", "mean", "stderr", "N"});
    CHECK(t[1][1] == "eaee");
    const CsvTable ch = read_csv((dir / "w1/choices.csv").string());
    CHECK(ch[0] == std::vector<std::string>{"t", "channel", "frac_number", "frac_homodyne", "mean_phase"});
    CHECK(ch.size() == 1 + 6 * 3);
    const CsvTable dec = read_csv((dir / "w1/decisions.csv").string());
    CHECK(dec.size() == 1 + 40 * 50 * 3);
    const CsvTable jumps = read_csv((dir / "w1/jumps.csv").string());
    CHECK(jumps[0] == std::vector<std::string>{"t", "trajectory_id", "channel", "branch"});
    long number_steps = 0;
    for (size_t i = 1; i < dec.size(); ++i) number_steps += dec[i][3] == "number";
    CHECK(static_cast<long>(jumps.size()) - 1 <= number_steps);

    const Json man = Json::parse(slurp(dir / "w1/manifest.json"));
    CHECK(man.at("git_revision").get<std::string>() == git_revision());
    CHECK(man.at("wall_time_seconds").get<double>() >= 0.0);
    CHECK(man.at("config").at("n") == 3);
}

TEST_CASE("oracle: coherent evolution gives vanishing z and a rate mismatch exits 3") {
    const fs::path dir = scratch("oracle");
    std::ostringstream log;
    RunConfig c = parse_config(R"({"model": {"name": "ising", "params": {"gamma": 0}}, "n": 3, "dt": 0.001, "T": 0.5,
      "trajectories": 4, "samples": 6, "oracle": {"systematic": 0.002}})");
    c.out = (dir / "coherent").string();
    CHECK(cmd_oracle(c, log) == kExitOk);
    const CsvTable t = read_csv((dir / "coherent/oracle_compare.csv").string());
    CHECK(t[0] == std::vector<std::string>{"t", "quantity", "cut_or_site", "me_value", "mean", "stderr", "N", "z"});
    for (size_t i = 1; i < t.size(); ++i) {
        CHECK(std::stod(t[i][5]) < 1e-12);
        CHECK(std::abs(std::stod(t[i][7])) < 1.0);
    }

    RunConfig w = parse_config(R"({"model": {"name": "ising"}, "n": 2, "dt": 0.005, "T": 1, "trajectories": 400, "samples": 6,
      "oracle": {"trajectory_rate_scale": 2}})");
    w.out = (dir / "wrong").string();
    CHECK(cmd_oracle(w, log) == kExitOracle);
    w.oracle.trajectory_rate_scale = 1.0;
    w.out = (dir / "right").string();
    CHECK(cmd_oracle(w, log) == kExitOk);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("cli");
    std::string text = kIsing;
    spit(dir / "ok.json", text);
    text.replace(text.find("  \"dt\": 0.01,\n"), 14, "");
    spit(dir / "missing.json", text);
    CHECK(run_cli("run " + (dir / "missing.json").string()) == kExitConfig);
    CHECK(run_cli("run --config " + (dir / "nowhere.json").string()) == kExitConfig);
    CHECK(run_cli("run " + (dir / "ok.json").string() + " --cut 9") == kExitConfig);
    CHECK(run_cli("frobnicate") == kExitConfig);
    CHECK(run_cli("run " + (dir / "ok.json").string() + " --workers 2 --out " + (dir / "out").string()) == kExitOk);
    CHECK(fs::exists(dir / "out/manifest.json"));
}
