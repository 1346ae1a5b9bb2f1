#include "eoqt/io/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace eoqt::io {

namespace {

std::string pointer_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

// Records the start position of every value while walking already-validated JSON text.
class Locator {
public:
    explicit Locator(const std::string& text) : t_(text) {}

    std::map<std::string, std::pair<int, int>> run() {
        try {
            value("");
        } catch (const std::out_of_range&) {
        }
        return std::move(pos_);
    }

private:
    char peek() const { return t_.at(i_); }
    void adv() {
        if (t_.at(i_) == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    void ws() {
        while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) adv();
    }
    std::string str() {
        adv();
        std::string s;
        while (peek() != '"') {
            if (peek() == '\\') {
                adv();
                const char e = peek();
                switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case 'r': s += '\r'; break;
                    case 'b': s += '\b'; break;
                    case 'f': s += '\f'; break;
                    case 'u':
                        for (int k = 0; k < 4; ++k) adv();
                        s += '?';
                        break;
                    default: s += e;
                }
                adv();
                continue;
            }
            s += peek();
            adv();
        }
        adv();
        return s;
    }
    void value(const std::string& ptr) {
        ws();
        pos_[ptr] = {line_, col_};
        const char c = peek();
        if (c == '{') {
            adv();
            ws();
            if (peek() == '}') {
                adv();
                return;
            }
            while (true) {
                ws();
                const std::string key = str();
                ws();
                adv();  // ':'
                value(ptr + "/" + pointer_token(key));
                ws();
                if (peek() == ',') {
                    adv();
                    continue;
                }
                adv();  // '}'
                return;
            }
        }
        if (c == '[') {
            adv();
            ws();
            if (peek() == ']') {
                adv();
                return;
            }
            for (int idx = 0;; ++idx) {
                value(ptr + "/" + std::to_string(idx));
                ws();
                if (peek() == ',') {
                    adv();
                    continue;
                }
                adv();  // ']'
                return;
            }
        }
        if (c == '"') {
            str();
            return;
        }
        while (i_ < t_.size() && t_[i_] != ',' && t_[i_] != '}' && t_[i_] != ']' &&
               !std::isspace(static_cast<unsigned char>(t_[i_])))
            adv();
    }

    const std::string& t_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
    std::map<std::string, std::pair<int, int>> pos_;
};

// "/policy/phases/1" -> "policy.phases[1]"
std::string display_path(const std::string& ptr) {
    if (ptr.empty()) return "(root)";
    std::string out;
    size_t i = 1;
    while (i <= ptr.size()) {
        size_t j = ptr.find('/', i);
        if (j == std::string::npos) j = ptr.size();
        std::string tok = ptr.substr(i, j - i);
        const bool index = !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        if (index)
            out += "[" + tok + "]";
        else
            out += (out.empty() ? "" : ".") + tok;
        i = j + 1;
    }
    return out;
}

class Validator {
public:
    Validator(const std::string& text, std::string source) : source_(std::move(source)), pos_(Locator(text).run()) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        std::string where = source_;
        std::string p = ptr;
        while (true) {
            auto it = pos_.find(p);
            if (it != pos_.end()) {
                where += ":" + std::to_string(it->second.first) + ":" + std::to_string(it->second.second);
                break;
            }
            if (p.empty()) break;
            p = p.substr(0, p.rfind('/'));
        }
        throw ConfigError(where + ": " + display_path(ptr) + ": " + msg);
    }

    void only_keys(const Json& obj, const std::string& ptr, const std::set<std::string>& allowed) const {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key())) fail(ptr + "/" + pointer_token(it.key()), "unknown field");
    }

    const Json& object(const Json& parent, const std::string& ptr, const std::string& key, bool required) const {
        static const Json empty = Json::object();
        const std::string p = ptr + "/" + pointer_token(key);
        if (!parent.contains(key)) {
            if (required) fail(p, "missing required field");
            return empty;
        }
        const Json& v = parent.at(key);
        if (!v.is_object()) fail(p, "expected an object");
        return v;
    }

    double number(const Json& parent, const std::string& ptr, const std::string& key, const double* def) const {
        const std::string p = ptr + "/" + pointer_token(key);
        if (!parent.contains(key)) {
            if (!def) fail(p, "missing required field");
            return *def;
        }
        const Json& v = parent.at(key);
        if (!v.is_number()) fail(p, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(p, "must be finite");
        return x;
    }

    double number(const Json& parent, const std::string& ptr, const std::string& key, double def) const {
        return number(parent, ptr, key, &def);
    }

    long long integer(const Json& parent, const std::string& ptr, const std::string& key, const long long* def,
                      long long lo, long long hi) const {
        const std::string p = ptr + "/" + pointer_token(key);
        if (!parent.contains(key)) {
            if (!def) fail(p, "missing required field");
            return *def;
        }
        const Json& v = parent.at(key);
        if (!v.is_number_integer()) fail(p, "expected an integer");
        long long x = 0;
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(hi)) fail(p, "must be at most " + std::to_string(hi));
            x = static_cast<long long>(u);
        } else {
            x = v.get<long long>();
        }
        if (x < lo || x > hi) fail(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }

    long long integer(const Json& parent, const std::string& ptr, const std::string& key, long long def, long long lo,
                      long long hi) const {
        return integer(parent, ptr, key, &def, lo, hi);
    }

    bool boolean(const Json& parent, const std::string& ptr, const std::string& key, bool def) const {
        if (!parent.contains(key)) return def;
        const Json& v = parent.at(key);
        if (!v.is_boolean()) fail(ptr + "/" + pointer_token(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const Json& parent, const std::string& ptr, const std::string& key, const std::string* def) const {
        const std::string p = ptr + "/" + pointer_token(key);
        if (!parent.contains(key)) {
            if (!def) fail(p, "missing required field");
            return *def;
        }
        const Json& v = parent.at(key);
        if (!v.is_string()) fail(p, "expected a string");
        return v.get<std::string>();
    }

private:
    std::string source_;
    std::map<std::string, std::pair<int, int>> pos_;
};

const std::map<std::string, std::vector<std::pair<std::string, double>>>& model_defaults() {
    static const std::map<std::string, std::vector<std::pair<std::string, double>>> m = {
        {"bell", {{"gamma", 1.0}}},
        {"ising", {{"h", -0.5}, {"g", 2.5}, {"J", 0.5}, {"gamma", 1.0}}},
        {"eit", {{"omega1", 0.5}, {"omega2", 0.5}, {"V", 1.0}, {"gamma", 1.0}}},
        {"rbc", {{"alpha", 1.0}, {"gamma", 10.0}}},
    };
    return m;
}

int default_size(const std::string& model) {
    if (model == "bell") return 2;
    if (model == "rbc") return 12;
    return 4;
}

std::vector<double> channel_rates(const RunConfig& c) {
    return {c.params.at("gamma").get<double>()};
}

RunConfig validate(const Json& root, const std::string& text, const std::string& source) {
    const Validator v(text, source);
    if (!root.is_object()) v.fail("", "expected a JSON object");
    v.only_keys(root, "", {"model", "n", "d", "policy", "dt", "T", "trajectories", "chi_max", "trunc_threshold",
                           "max_discarded_weight", "cuts", "samples", "master_seed", "workers", "out", "frozen_circuit",
                           "shuffle_channels", "save_trajectories", "decision_log", "jump_log", "save_states", "observables", "oracle"});
    RunConfig c;

    const Json& model = v.object(root, "", "model", true);
    v.only_keys(model, "/model", {"name", "params"});
    c.model = v.string(model, "/model", "name", nullptr);
    const auto& defs = model_defaults();
    if (!defs.count(c.model)) v.fail("/model/name", "unknown model '" + c.model + "' (bell, ising, eit, rbc)");
    const Json& params = v.object(model, "/model", "params", false);
    std::set<std::string> allowed;
    for (const auto& kv : defs.at(c.model)) allowed.insert(kv.first);
    if (c.model == "rbc") allowed.insert("include_identity");
    v.only_keys(params, "/model/params", allowed);
    c.params = Json::object();
    for (const auto& [key, def] : defs.at(c.model)) {
        const double x = v.number(params, "/model/params", key, def);
        if ((key == "gamma" || key == "alpha") && x < 0.0) v.fail("/model/params/" + key, "must be non-negative");
        c.params[key] = x;
    }
    if (c.model == "rbc") c.params["include_identity"] = v.boolean(params, "/model/params", "include_identity", true);

    const long long def_n = default_size(c.model);
    c.n = static_cast<int>(v.integer(root, "", "n", def_n, 2, 4096));
    if (c.model == "bell" && c.n != 2) v.fail("/n", "the bell model has exactly two sites");
    const long long def_d = c.model == "eit" ? 3 : 2;
    c.d = static_cast<int>(v.integer(root, "", "d", def_d, def_d, def_d));

    const Json& policy = v.object(root, "", "policy", false);
    v.only_keys(policy, "/policy", {"kind", "phases", "cut"});
    const std::string def_kind = "eoqt";
    c.policy = v.string(policy, "/policy", "kind", &def_kind);
    if (c.policy != "number" && c.policy != "homodyne" && c.policy != "eoqt")
        v.fail("/policy/kind", "expected number, homodyne or eoqt");
    if (policy.contains("phases")) {
        if (c.policy != "homodyne") v.fail("/policy/phases", "phases apply to the homodyne policy only");
        const Json& ph = policy.at("phases");
        if (!ph.is_array()) v.fail("/policy/phases", "expected an array of numbers");
        for (size_t k = 0; k < ph.size(); ++k) {
            if (!ph[k].is_number()) v.fail("/policy/phases/" + std::to_string(k), "expected a number");
            const double x = ph[k].get<double>();
            if (!std::isfinite(x)) v.fail("/policy/phases/" + std::to_string(k), "must be finite");
            c.phases.push_back(x);
        }
    }
    if (c.policy == "homodyne") {
        if (c.phases.empty()) v.fail("/policy/phases", "missing required field");
        const size_t m = static_cast<size_t>(c.n);
        if (c.phases.size() != 1 && c.phases.size() != m)
            v.fail("/policy/phases", "needs one phase or one per channel (" + std::to_string(m) + ")");
    }
    c.cut = static_cast<int>(v.integer(policy, "/policy", "cut", 0LL, 0, c.n - 1));

    c.dt = v.number(root, "", "dt", nullptr);
    if (!(c.dt > 0.0)) v.fail("/dt", "must be positive");
    c.t_end = v.number(root, "", "T", nullptr);
    if (!(c.t_end > 0.0)) v.fail("/T", "must be positive");
    try {
        step_count(c.t_end, c.dt);
    } catch (const std::invalid_argument&) {
        v.fail("/T", "must be an integer multiple of dt");
    }
    for (double g : channel_rates(c))
        if (g * c.dt > 0.1 + 1e-12) v.fail("/dt", "dt times the largest rate must not exceed 0.1");
    c.trajectories = static_cast<int>(v.integer(root, "", "trajectories", nullptr, 1, 100000000));
    c.chi_max = static_cast<int>(v.integer(root, "", "chi_max", 64LL, 1, 1 << 16));
    c.trunc_threshold = v.number(root, "", "trunc_threshold", 1e-14);
    if (!(c.trunc_threshold >= 0.0 && c.trunc_threshold < 1.0)) v.fail("/trunc_threshold", "must lie in [0, 1)");
    c.max_discarded_weight = v.number(root, "", "max_discarded_weight", 0.0);
    if (!(c.max_discarded_weight >= 0.0 && c.max_discarded_weight < 1.0)) v.fail("/max_discarded_weight", "must lie in [0, 1)");
    if (root.contains("cuts")) {
        const Json& cuts = root.at("cuts");
        if (!cuts.is_array() || cuts.empty()) v.fail("/cuts", "expected a non-empty array of bond indices");
        for (size_t k = 0; k < cuts.size(); ++k) {
            const std::string p = "/cuts/" + std::to_string(k);
            if (!cuts[k].is_number_integer()) v.fail(p, "expected an integer");
            const long long b = cuts[k].get<long long>();
            if (b < 1 || b >= c.n) v.fail(p, "bond must lie in [1, n-1]");
            c.cuts.push_back(static_cast<int>(b));
        }
    }
    c.samples = static_cast<int>(v.integer(root, "", "samples", 50LL, 1, 1000000));
    if (root.contains("master_seed")) {
        const Json& s = root.at("master_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            v.fail("/master_seed", "expected a non-negative integer");
        c.master_seed = s.get<std::uint64_t>();
    }
    c.workers = static_cast<int>(v.integer(root, "", "workers", 1LL, 1, 4096));
    const std::string def_out = "out";
    c.out = v.string(root, "", "out", &def_out);
    if (c.out.empty()) v.fail("/out", "must not be empty");
    c.frozen_circuit = v.boolean(root, "", "frozen_circuit", false);
    c.shuffle_channels = v.boolean(root, "", "shuffle_channels", false);
    c.save_trajectories = v.boolean(root, "", "save_trajectories", false);
    c.decision_log = v.boolean(root, "", "decision_log", false);
    c.jump_log = v.boolean(root, "", "jump_log", false);
    c.save_states = v.boolean(root, "", "save_states", false);

    if (root.contains("observables")) {
        const Json& obs = root.at("observables");
        if (obs.is_string()) {
            c.observables_mode = obs.get<std::string>();
            if (c.observables_mode != "default" && c.observables_mode != "none")
                v.fail("/observables", "expected \"default\", \"none\" or a list");
        } else if (obs.is_array()) {
            c.observables_mode = "list";
            for (size_t k = 0; k < obs.size(); ++k) {
                const std::string p = "/observables/" + std::to_string(k);
                if (!obs[k].is_object()) v.fail(p, "expected an object");
                v.only_keys(obs[k], p, {"name", "site", "factors"});
                ObservableConfig oc;
                oc.name = v.string(obs[k], p, "name", nullptr);
                if (oc.name.empty()) v.fail(p + "/name", "must not be empty");
                const Json& fs = obs[k].contains("factors") ? obs[k].at("factors") : Json();
                if (!fs.is_array() || fs.empty()) v.fail(p + "/factors", "expected a non-empty array");
                std::set<int> sites;
                for (size_t f = 0; f < fs.size(); ++f) {
                    const std::string fp = p + "/factors/" + std::to_string(f);
                    if (!fs[f].is_object()) v.fail(fp, "expected an object");
                    v.only_keys(fs[f], fp, {"site", "op"});
                    const int site = static_cast<int>(v.integer(fs[f], fp, "site", nullptr, 0, c.n - 1));
                    const std::string op = v.string(fs[f], fp, "op", nullptr);
                    try {
                        named_operator(op, c.d);
                    } catch (const std::invalid_argument& e) {
                        v.fail(fp + "/op", e.what());
                    }
                    if (!sites.insert(site).second) v.fail(fp + "/site", "repeated site within one observable");
                    oc.factors.emplace_back(site, op);
                }
                const long long first = oc.factors.front().first;
                oc.site = static_cast<int>(v.integer(obs[k], p, "site", first, 0, c.n - 1));
                c.observables.push_back(std::move(oc));
            }
        } else {
            v.fail("/observables", "expected \"default\", \"none\" or a list");
        }
    }

    const Json& oracle = v.object(root, "", "oracle", false);
    v.only_keys(oracle, "/oracle", {"threshold", "trajectory_rate_scale", "me_dt", "systematic"});
    c.oracle.threshold = v.number(oracle, "/oracle", "threshold", 5.0);
    if (!(c.oracle.threshold > 0.0)) v.fail("/oracle/threshold", "must be positive");
    c.oracle.trajectory_rate_scale = v.number(oracle, "/oracle", "trajectory_rate_scale", 1.0);
    if (!(c.oracle.trajectory_rate_scale >= 0.0)) v.fail("/oracle/trajectory_rate_scale", "must be non-negative");
    c.oracle.me_dt = v.number(oracle, "/oracle", "me_dt", 0.0);
    if (!(c.oracle.me_dt >= 0.0)) v.fail("/oracle/me_dt", "must be non-negative");
    c.oracle.systematic = v.number(oracle, "/oracle", "systematic", 0.0);
    if (!(c.oracle.systematic >= 0.0)) v.fail("/oracle/systematic", "must be non-negative");
    return c;
}

}  // namespace

std::pair<int, int> locate(const std::string& text, const std::string& pointer) {
    const auto pos = Locator(text).run();
    auto it = pos.find(pointer);
    return it == pos.end() ? std::pair<int, int>{0, 0} : it->second;
}

Json RunConfig::to_json() const {
    Json j;
    j["model"] = {{"name", model}, {"params", params}};
    j["n"] = n;
    j["d"] = d;
    Json p = {{"kind", policy}};
    if (policy == "homodyne") p["phases"] = phases;
    p["cut"] = cut;
    j["policy"] = p;
    j["dt"] = dt;
    j["T"] = t_end;
    j["trajectories"] = trajectories;
    j["chi_max"] = chi_max;
    j["trunc_threshold"] = trunc_threshold;
    j["max_discarded_weight"] = max_discarded_weight;
    if (!cuts.empty()) j["cuts"] = cuts;
    j["samples"] = samples;
    j["master_seed"] = master_seed;
    j["workers"] = workers;
    j["out"] = out;
    j["frozen_circuit"] = frozen_circuit;
    j["shuffle_channels"] = shuffle_channels;
    j["save_trajectories"] = save_trajectories;
    j["decision_log"] = decision_log;
    j["jump_log"] = jump_log;
    j["save_states"] = save_states;
    if (observables_mode == "list") {
        Json list = Json::array();
        for (const auto& o : observables) {
            Json fs = Json::array();
            for (const auto& [site, op] : o.factors) fs.push_back({{"site", site}, {"op", op}});
            list.push_back({{"name", o.name}, {"site", o.site}, {"factors", fs}});
        }
        j["observables"] = list;
    } else {
        j["observables"] = observables_mode;
    }
    j["oracle"] = {{"threshold", oracle.threshold},
                   {"trajectory_rate_scale", oracle.trajectory_rate_scale},
                   {"me_dt", oracle.me_dt},
                   {"systematic", oracle.systematic}};
    return j;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        int line = 1, col = 1;
        const size_t end = std::min<size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error: " + e.what());
    }
    // A manifest carries the effective configuration under "config".
    if (root.is_object() && root.contains("config") && root.contains("git_revision") && root.at("config").is_object()) {
        const std::string inner = root.at("config").dump(2);
        return validate(root.at("config"), inner, source + " (config)");
    }
    return validate(root, text, source);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open configuration");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

Mat named_operator(const std::string& name, int d) {
    if (name == "sx" || name == "sy" || name == "sz" || name == "sp" || name == "sm") {
        if (d != 2) throw std::invalid_argument("operator '" + name + "' needs d = 2");
        if (name == "sx") return ops::sigma_x();
        if (name == "sy") return ops::sigma_y();
        if (name == "sz") return ops::sigma_z();
        if (name == "sp") return ops::ket_bra(2, 1, 0);
        return ops::ket_bra(2, 0, 1);
    }
    if (name.rfind("pop", 0) == 0 && name.size() > 3 &&
        std::all_of(name.begin() + 3, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        const int k = std::stoi(name.substr(3));
        if (k >= d) throw std::invalid_argument("operator '" + name + "' exceeds the local dimension");
        return ops::ket_bra(d, k, k);
    }
    throw std::invalid_argument("unknown operator '" + name + "' (sx sy sz sp sm pop<k>)");
}

ModelSpec build_model(const RunConfig& c) {
    const Json& p = c.params;
    if (c.model == "bell") return bell_model(p.at("gamma").get<double>());
    if (c.model == "ising")
        return ising_model({p.at("h").get<double>(), p.at("g").get<double>(), p.at("J").get<double>(), p.at("gamma").get<double>()},
                           c.n);
    if (c.model == "eit")
        return eit_model({p.at("omega1").get<double>(), p.at("omega2").get<double>(), p.at("V").get<double>(),
                          p.at("gamma").get<double>()},
                         c.n);
    if (c.model == "rbc")
        return rbc_model({p.at("alpha").get<double>(), p.at("gamma").get<double>(), p.at("include_identity").get<bool>()}, c.n);
    throw ConfigError("unknown model " + c.model);
}

EnsembleRequest build_request(const RunConfig& c) {
    EnsembleRequest r;
    r.model = build_model(c);
    if (c.policy == "number")
        r.policy = Policy::number();
    else if (c.policy == "homodyne")
        r.policy = Policy::homodyne(c.phases);
    else
        r.policy = Policy::eoqt(c.cut);
    r.policy.cut = c.cut;
    r.options.dt = c.dt;
    r.options.t_end = c.t_end;
    r.options.truncation = {c.chi_max, c.trunc_threshold, c.max_discarded_weight};
    r.options.frozen_circuit = c.frozen_circuit;
    r.options.shuffle_channels = c.shuffle_channels;
    r.record.samples = c.samples;
    r.record.cuts = c.cuts;
    r.record.decision_log = c.decision_log;
    r.record.jump_log = c.jump_log;
    if (c.observables_mode == "default") {
        add_default_observables(r.record, c.n, c.d);
    } else if (c.observables_mode == "list") {
        for (const auto& o : c.observables) {
            Observable ob{o.name, o.site, {}};
            for (const auto& [site, op] : o.factors) ob.factors.emplace_back(site, named_operator(op, c.d));
            r.record.observables.push_back(std::move(ob));
        }
    }
    r.trajectories = c.trajectories;
    r.master_seed = c.master_seed;
    r.workers = c.workers;
    return r;
}

}  // namespace eoqt::io
