#include "mecbandit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace mecbandit::cli {

namespace {

using policies::PolicyKind;
using Category = ConfigError::Category;

[[noreturn]] void schema_error(const std::string& key, const std::string& why) {
    throw ConfigError(Category::schema, key, "invalid value for '" + key + "': " + why);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) parts.push_back(s.substr(i, j - i));
        i = j;
    }
    return parts;
}

double to_double(const std::string& key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        schema_error(key, "expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t to_unsigned(const std::string& key, std::string_view text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        schema_error(key, "expected a non-negative integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::size_t to_count(const std::string& key, std::string_view text) {
    const auto value = to_unsigned(key, text);
    if (value < 1) schema_error(key, "must be >= 1");
    return static_cast<std::size_t>(value);
}

double to_positive(const std::string& key, std::string_view text) {
    const double v = to_double(key, text);
    if (!(v > 0.0)) schema_error(key, "must be > 0");
    return v;
}

double to_probability(const std::string& key, std::string_view text) {
    const double v = to_double(key, text);
    if (v < 0.0 || v > 1.0) schema_error(key, "must lie in [0,1]");
    return v;
}

double to_retention(const std::string& key, std::string_view text) {
    const double v = to_double(key, text);
    if (v < 0.0 || v >= 1.0) schema_error(key, "must lie in [0,1)");
    return v;
}

double to_discount(const std::string& key, std::string_view text) {
    const double v = to_double(key, text);
    if (!(v > 0.0) || v > 1.0) schema_error(key, "must lie in (0,1]");
    return v;
}

PolicyKind to_policy(const std::string& key, std::string_view text) {
    try {
        return policies::parse_policy_kind(text);
    } catch (const std::invalid_argument&) {
        schema_error(key, "unknown policy '" + std::string(text) +
                              "' (expected ssph, ts, dts, dots, ducb, random or oracle)");
    }
}

ExperimentKind to_kind(const std::string& key, std::string_view text) {
    for (auto kind : {ExperimentKind::single, ExperimentKind::compare,
                      ExperimentKind::alpha_sweep, ExperimentKind::arm_sweep}) {
        if (text == to_string(kind)) return kind;
    }
    schema_error(key, "unknown experiment kind '" + std::string(text) +
                          "' (expected single, compare, alpha-sweep or arm-sweep)");
}

env::ServerConfig to_server(const std::string& key, std::string_view text) {
    env::ServerConfig s;
    std::map<std::string, std::string_view, std::less<>> fields;
    for (auto token : split_ws(text)) {
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) {
            schema_error(key, "expected name=value pairs, got '" + std::string(token) + "'");
        }
        auto [it, fresh] = fields.emplace(std::string(token.substr(0, eq)), token.substr(eq + 1));
        if (!fresh) schema_error(key, "field '" + it->first + "' given twice");
    }
    const auto take = [&](const char* name) {
        const auto it = fields.find(name);
        if (it == fields.end()) schema_error(key, std::string("missing field '") + name + "'");
        const auto value = it->second;
        fields.erase(it);
        return value;
    };
    const std::string k = key;
    s.psi0 = to_probability(k + ".psi0", take("psi0"));
    s.psi1 = to_probability(k + ".psi1", take("psi1"));
    s.w = static_cast<int>(to_count(k + ".w", take("w")));
    s.n = static_cast<int>(to_count(k + ".n", take("n")));
    s.lambda = to_double(k + ".lambda", take("lambda"));
    if (s.lambda < 1.0) schema_error(k + ".lambda", "must be >= 1");
    s.r = to_positive(k + ".r", take("r"));
    s.p_b = to_probability(k + ".p_b", take("p_b"));
    s.c = to_positive(k + ".c", take("c"));
    if (!fields.empty()) schema_error(key, "unknown field '" + fields.begin()->first + "'");
    return s;
}

struct Entry {
    std::string value;
    int line = 0;
};

// Keys that take a single value.
const std::vector<std::string>& scalar_keys() {
    static const std::vector<std::string> keys = {
        "kind", "preset", "horizon", "runs", "seed", "arms", "policy", "policies",
        "alpha", "sigma", "dts_discount", "dots_discount", "ducb_discount", "ducb_xi",
        "latency_cap", "alpha_grid", "arm_grid", "out",
        "task.l_u", "task.omega", "task.kappa", "task.b_u", "task.b_d", "task.p_u_db",
        "task.p_d_db", "task.gamma_los", "task.gamma_nlos", "task.d_max", "task.delta"};
    return keys;
}

bool valid_key_syntax(std::string_view key) {
    if (key.empty()) return false;
    return std::all_of(key.begin(), key.end(), [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '.';
    });
}

void apply(ExperimentSpec& spec, const std::string& key, std::string_view value) {
    auto& run = spec.run;
    auto& task = run.profile;
    auto& hp = spec.hyper;
    if (key == "kind") spec.kind = to_kind(key, value);
    else if (key == "preset") {
        if (value != kPaperPreset && value != "inline") {
            schema_error(key, "unknown preset '" + std::string(value) + "' (expected paper-5 or inline)");
        }
        spec.preset = std::string(value);
    }
    else if (key == "horizon") run.horizon = to_count(key, value);
    else if (key == "runs") run.num_runs = to_count(key, value);
    else if (key == "seed") run.base_seed = to_unsigned(key, value);
    else if (key == "arms") run.num_arms = to_count(key, value);
    else if (key == "policy") spec.policy = to_policy(key, value);
    else if (key == "policies") {
        spec.policies.clear();
        for (auto token : split(value, ',')) {
            const auto kind = to_policy(key, token);
            if (std::find(spec.policies.begin(), spec.policies.end(), kind) != spec.policies.end()) {
                schema_error(key, "policy '" + std::string(token) + "' listed twice");
            }
            spec.policies.push_back(kind);
        }
    }
    else if (key == "alpha") hp.alpha = to_retention(key, value);
    else if (key == "sigma") hp.sigma = to_positive(key, value);
    else if (key == "dts_discount") hp.dts_discount = to_discount(key, value);
    else if (key == "dots_discount") hp.dots_discount = to_discount(key, value);
    else if (key == "ducb_discount") hp.ducb_discount = to_discount(key, value);
    else if (key == "ducb_xi") hp.ducb_xi = to_positive(key, value);
    else if (key == "latency_cap") run.latency_cap = to_positive(key, value);
    else if (key == "alpha_grid") {
        spec.alpha_grid.clear();
        for (auto token : split(value, ',')) spec.alpha_grid.push_back(to_retention(key, token));
    }
    else if (key == "arm_grid") {
        spec.arm_grid.clear();
        for (auto token : split(value, ',')) spec.arm_grid.push_back(to_count(key, token));
    }
    else if (key == "out") spec.out = std::filesystem::path(std::string(value));
    else if (key == "task.l_u") task.l_u = to_positive(key, value);
    else if (key == "task.omega") task.omega = to_positive(key, value);
    else if (key == "task.kappa") task.kappa = to_positive(key, value);
    else if (key == "task.b_u") task.b_u = to_positive(key, value);
    else if (key == "task.b_d") task.b_d = to_positive(key, value);
    else if (key == "task.p_u_db") task.p_u_db = to_double(key, value);
    else if (key == "task.p_d_db") task.p_d_db = to_double(key, value);
    else if (key == "task.gamma_los") task.gamma_los = to_positive(key, value);
    else if (key == "task.gamma_nlos") task.gamma_nlos = to_positive(key, value);
    else if (key == "task.d_max") task.d_max = to_positive(key, value);
    else if (key == "task.delta") task.delta = to_positive(key, value);
    else throw ConfigError(Category::schema, key, "unknown key '" + key + "'");
}

void finish(ExperimentSpec& spec, bool has_servers, bool preset_given) {
    if (has_servers) {
        if (preset_given && spec.preset != "inline") {
            schema_error("preset", "inline server definitions require preset = inline");
        }
        spec.preset = "inline";
    } else if (spec.preset == "inline") {
        schema_error("preset", "preset = inline needs at least one 'server' line");
    } else {
        spec.run.server_classes = env::reference_classes();
    }
    if (spec.run.profile.gamma_los > spec.run.profile.gamma_nlos) {
        schema_error("task.gamma_los", "must not exceed task.gamma_nlos");
    }
    if (spec.policies.empty()) schema_error("policies", "at least one policy is required");
    if (spec.alpha_grid.empty()) schema_error("alpha_grid", "at least one value is required");
    if (spec.arm_grid.empty()) schema_error("arm_grid", "at least one value is required");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::single: return "single";
        case ExperimentKind::compare: return "compare";
        case ExperimentKind::alpha_sweep: return "alpha-sweep";
        case ExperimentKind::arm_sweep: return "arm-sweep";
    }
    return "?";
}

policies::PolicySpec ExperimentSpec::policy_spec(PolicyKind kind) const {
    auto spec = policies::PolicySpec::defaults_for(kind);
    spec.alpha = hyper.alpha;
    spec.sigma = hyper.sigma;
    spec.xi = hyper.ducb_xi;
    switch (kind) {
        case PolicyKind::dts: spec.discount = hyper.dts_discount; break;
        case PolicyKind::dots: spec.discount = hyper.dots_discount; break;
        case PolicyKind::ducb: spec.discount = hyper.ducb_discount; break;
        default: break;
    }
    return spec;
}

std::vector<PolicyKind> ExperimentSpec::active_policies() const {
    switch (kind) {
        case ExperimentKind::single: return {policy};
        case ExperimentKind::alpha_sweep: return {PolicyKind::ssph};
        default: return policies;
    }
}

ExperimentSpec parse_spec_text(std::string_view text, const Overrides& overrides) {
    std::map<std::string, Entry> scalars;
    std::vector<Entry> servers;

    int line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = trim(line.substr(0, hash));
        }
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const auto where = "line " + std::to_string(line_no);
        if (eq == std::string_view::npos) {
            throw ConfigError(Category::syntax, "",
                              where + ": expected 'key = value', got '" + std::string(line) + "'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (!valid_key_syntax(key)) {
            throw ConfigError(Category::syntax, key, where + ": malformed key '" + key + "'");
        }
        if (value.empty()) {
            throw ConfigError(Category::syntax, key, where + ": key '" + key + "' has no value");
        }
        if (key == "server") {
            servers.push_back({std::string(value), line_no});
            continue;
        }
        const auto& known = scalar_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(Category::schema, key, where + ": unknown key '" + key + "'");
        }
        if (!scalars.emplace(key, Entry{std::string(value), line_no}).second) {
            throw ConfigError(Category::schema, key, where + ": key '" + key + "' given twice");
        }
    }

    ExperimentSpec spec;
    for (const auto& [key, entry] : scalars) apply(spec, key, entry.value);
    if (!servers.empty()) {
        spec.run.server_classes.clear();
        for (const auto& entry : servers) spec.run.server_classes.push_back(to_server("server", entry.value));
    }

    if (overrides.kind) spec.kind = *overrides.kind;
    if (overrides.seed) spec.run.base_seed = *overrides.seed;
    if (overrides.horizon) apply(spec, "horizon", std::to_string(*overrides.horizon));
    if (overrides.runs) apply(spec, "runs", std::to_string(*overrides.runs));
    if (overrides.arms) apply(spec, "arms", std::to_string(*overrides.arms));
    if (overrides.out) spec.out = *overrides.out;
    if (overrides.policy) {
        apply(spec, "policy", *overrides.policy);
        spec.policies = {spec.policy};
    }

    finish(spec, !servers.empty(), scalars.count("preset") > 0);
    return spec;
}

ExperimentSpec parse_spec(const std::filesystem::path& path, const Overrides& overrides) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw ConfigError(Category::missing_file, "",
                          "configuration file not found: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(Category::missing_file, "",
                          "cannot open configuration file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_spec_text(buffer.str(), overrides);
}

std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::string to_config_text(const ExperimentSpec& spec) {
    const auto join_kinds = [](const std::vector<PolicyKind>& kinds) {
        std::string out;
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            if (i) out += ", ";
            out += policies::to_string(kinds[i]);
        }
        return out;
    };
    std::ostringstream os;
    const auto& run = spec.run;
    const auto& task = run.profile;
    const auto& hp = spec.hyper;
    os << "kind = " << to_string(spec.kind) << '\n'
       << "preset = " << spec.preset << '\n'
       << "horizon = " << run.horizon << '\n'
       << "runs = " << run.num_runs << '\n'
       << "seed = " << run.base_seed << '\n'
       << "arms = " << run.num_arms << '\n'
       << "policy = " << policies::to_string(spec.policy) << '\n'
       << "policies = " << join_kinds(spec.policies) << '\n'
       << "alpha = " << format_number(hp.alpha) << '\n'
       << "sigma = " << format_number(hp.sigma) << '\n'
       << "dts_discount = " << format_number(hp.dts_discount) << '\n'
       << "dots_discount = " << format_number(hp.dots_discount) << '\n'
       << "ducb_discount = " << format_number(hp.ducb_discount) << '\n'
       << "ducb_xi = " << format_number(hp.ducb_xi) << '\n'
       << "latency_cap = " << format_number(run.latency_cap) << '\n';
    os << "alpha_grid = ";
    for (std::size_t i = 0; i < spec.alpha_grid.size(); ++i) {
        os << (i ? ", " : "") << format_number(spec.alpha_grid[i]);
    }
    os << "\narm_grid = ";
    for (std::size_t i = 0; i < spec.arm_grid.size(); ++i) {
        os << (i ? ", " : "") << spec.arm_grid[i];
    }
    os << "\nout = " << spec.out.string() << '\n'
       << "task.l_u = " << format_number(task.l_u) << '\n'
       << "task.omega = " << format_number(task.omega) << '\n'
       << "task.kappa = " << format_number(task.kappa) << '\n'
       << "task.b_u = " << format_number(task.b_u) << '\n'
       << "task.b_d = " << format_number(task.b_d) << '\n'
       << "task.p_u_db = " << format_number(task.p_u_db) << '\n'
       << "task.p_d_db = " << format_number(task.p_d_db) << '\n'
       << "task.gamma_los = " << format_number(task.gamma_los) << '\n'
       << "task.gamma_nlos = " << format_number(task.gamma_nlos) << '\n'
       << "task.d_max = " << format_number(task.d_max) << '\n'
       << "task.delta = " << format_number(task.delta) << '\n';
    if (spec.preset == "inline") {
        for (const auto& s : run.server_classes) {
            os << "server = psi0=" << format_number(s.psi0) << " psi1=" << format_number(s.psi1)
               << " w=" << s.w << " n=" << s.n << " lambda=" << format_number(s.lambda)
               << " r=" << format_number(s.r) << " p_b=" << format_number(s.p_b)
               << " c=" << format_number(s.c) << '\n';
        }
    }
    return os.str();
}

}  // namespace mecbandit::cli
