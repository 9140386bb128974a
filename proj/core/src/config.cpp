/*
   Copyright 2026 The spdekit Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "spdekit/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace spdekit {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr std::array<const char*, 6> kSections = {"problem", "space",       "noise",
                                                  "time",    "monte_carlo", "output"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string to_upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
    std::ostringstream os;
    if (line > 0)
        os << "config line " << line << ": ";
    else
        os << "config: ";
    os << msg;
    throw ConfigError(os.str());
}

bool known_section(const std::string& s) {
    return std::find(kSections.begin(), kSections.end(), s) != kSections.end();
}

struct RawEntry {
    std::string value;
    int line = 0;
    ConfigSource source = ConfigSource::file;
};

std::map<std::string, RawEntry> parse_raw(const std::string& text) {
    std::map<std::string, RawEntry> out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(ln, "malformed section header '" + line + "'");
            section = to_lower(trim(line.substr(1, line.size() - 2)));
            if (!known_section(section)) fail(ln, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ln, "expected 'key = value', got '" + line + "'");
        if (section.empty()) fail(ln, "key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(ln, "empty key");
        // Keys are case-insensitive; the canonical spelling is restored when
        // the schema consumes the entry.
        const std::string path = section + "." + to_lower(key);
        if (out.count(path)) fail(ln, "duplicate key " + path);
        out.emplace(path, RawEntry{value, ln, ConfigSource::file});
    }
    return out;
}

double parse_number(const std::string& token, int line, const std::string& path) {
    const std::string t = trim(token);
    if (t.empty()) fail(line, path + ": empty numeric value");
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
        const double num = parse_number(t.substr(0, slash), line, path);
        const double den = parse_number(t.substr(slash + 1), line, path);
        if (den == 0.0) fail(line, path + ": division by zero in fraction '" + t + "'");
        return num / den;
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) fail(line, path + ": not a number: '" + t + "'");
    if (!std::isfinite(v)) fail(line, path + ": value must be finite");
    return v;
}

long long parse_integer(const std::string& token, int line, const std::string& path) {
    const std::string t = trim(token);
    if (t.empty()) fail(line, path + ": empty integer value");
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) fail(line, path + ": not an integer: '" + t + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& token, int line, const std::string& path) {
    const std::string t = trim(token);
    if (t.empty() || t[0] == '-') fail(line, path + ": expected an unsigned integer, got '" + t + "'");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) fail(line, path + ": not an integer: '" + t + "'");
    return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& token, int line, const std::string& path) {
    const std::string t = to_lower(trim(token));
    if (t == "true") return true;
    if (t == "false") return false;
    fail(line, path + ": expected true or false, got '" + token + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

// Pulls typed values out of the raw map, recording provenance in schema
// order; leftover keys are unknown-key errors.
struct Extractor {
    std::map<std::string, RawEntry> raw;
    std::vector<ConfigEntry> prov;

    struct Taken {
        bool present = false;
        std::string value;
        int line = 0;
        ConfigSource source = ConfigSource::defaults;
    };

    Taken take(const std::string& sec, const std::string& key) {
        Taken t;
        const auto it = raw.find(sec + "." + to_lower(key));
        if (it == raw.end()) return t;
        t.present = true;
        t.value = it->second.value;
        t.line = it->second.line;
        t.source = it->second.source;
        raw.erase(it);
        return t;
    }

    void record(const std::string& sec, const std::string& key, const std::string& canonical,
                ConfigSource source) {
        prov.push_back(ConfigEntry{sec, key, canonical, source});
    }

    double number(const std::string& sec, const std::string& key, double def) {
        const Taken t = take(sec, key);
        const double v = t.present ? parse_number(t.value, t.line, sec + "." + key) : def;
        record(sec, key, format_double(v), t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return v;
    }

    long long integer(const std::string& sec, const std::string& key, long long def) {
        const Taken t = take(sec, key);
        const long long v = t.present ? parse_integer(t.value, t.line, sec + "." + key) : def;
        record(sec, key, std::to_string(v), t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return v;
    }

    std::uint64_t unsigned64(const std::string& sec, const std::string& key, std::uint64_t def) {
        const Taken t = take(sec, key);
        const std::uint64_t v = t.present ? parse_u64(t.value, t.line, sec + "." + key) : def;
        record(sec, key, std::to_string(v), t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return v;
    }

    bool boolean(const std::string& sec, const std::string& key, bool def) {
        const Taken t = take(sec, key);
        const bool v = t.present ? parse_bool(t.value, t.line, sec + "." + key) : def;
        record(sec, key, v ? "true" : "false", t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return v;
    }

    std::string text(const std::string& sec, const std::string& key, const std::string& def) {
        const Taken t = take(sec, key);
        const std::string v = t.present ? t.value : def;
        record(sec, key, v, t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return v;
    }

    std::vector<double> numbers(const std::string& sec, const std::string& key,
                                const std::string& def) {
        const Taken t = take(sec, key);
        const std::string value = t.present ? t.value : def;
        const std::string path = sec + "." + key;
        std::vector<double> out;
        std::string canonical;
        for (const std::string& tok : split_list(value)) {
            if (tok.empty()) fail(t.line, path + ": empty list element");
            out.push_back(parse_number(tok, t.line, path));
            if (!canonical.empty()) canonical += ",";
            canonical += format_double(out.back());
        }
        record(sec, key, canonical, t.present ? t.source : ConfigSource::defaults);
        last_line = t.line;
        return out;
    }

    void check(bool ok, const std::string& msg) const {
        if (!ok) fail(last_line, msg);
    }

    void finish() const {
        if (raw.empty()) return;
        // Report the earliest unknown key for a stable message.
        const RawEntry* worst = nullptr;
        std::string path;
        for (const auto& [p, e] : raw) {
            if (worst == nullptr || (e.line > 0 && (worst->line == 0 || e.line < worst->line))) {
                worst = &e;
                path = p;
            }
        }
        std::string hint;
        if (worst->source == ConfigSource::environment) {
            std::string env = path;
            std::replace(env.begin(), env.end(), '.', '_');
            hint = " (environment override SPDEKIT_" + to_upper(env) + ")";
        }
        fail(worst->line, "unknown key " + path + hint);
    }

    int last_line = 0;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& extra) {
    Extractor ex;
    ex.raw = parse_raw(text);
    for (const auto& [path, value] : extra) ex.raw[path] = RawEntry{value, 0, ConfigSource::environment};

    RunConfig cfg;
    ExperimentPlan& plan = cfg.plan;

    // [problem]
    const std::string kind = ex.text("problem", "kind", "linear_rd");
    ex.check(kind == "linear_rd" || kind == "adr_darcy",
             "problem.kind must be one of {linear_rd, adr_darcy}, got '" + kind + "'");
    plan.problem = kind == "linear_rd" ? ProblemKind::linear_rd : ProblemKind::adr_darcy;
    const bool adr = plan.problem == ProblemKind::adr_darcy;

    plan.diffusion = ex.number("problem", "diffusion", adr ? 0.01 : 1.0);
    ex.check(plan.diffusion > 0.0, "problem.diffusion must be > 0");
    plan.reaction_c = ex.number("problem", "reaction_c", 0.5);
    ex.check(plan.reaction_c >= 0.0, "problem.reaction_c must be >= 0");
    plan.fold_reaction = ex.boolean("problem", "fold_reaction", false);
    plan.inflow_value = ex.number("problem", "inflow_value", 1.0);
    plan.x0_value = ex.number("problem", "x0", 0.0);
    plan.darcy.k_base = ex.number("problem", "darcy_k_base", 0.01);
    ex.check(plan.darcy.k_base > 0.0, "problem.darcy_k_base must be > 0");
    plan.darcy.contrast = ex.number("problem", "darcy_contrast", 100.0);
    ex.check(plan.darcy.contrast > 0.0, "problem.darcy_contrast must be > 0");
    plan.darcy.viscosity = ex.number("problem", "darcy_viscosity", 1.0);
    ex.check(plan.darcy.viscosity > 0.0, "problem.darcy_viscosity must be > 0");
    plan.darcy.p_in = ex.number("problem", "darcy_p_in", 1.0);
    plan.darcy.p_out = ex.number("problem", "darcy_p_out", 0.0);
    plan.darcy.streaks.height_frac = ex.number("problem", "darcy_streak_height", 0.1);
    ex.check(plan.darcy.streaks.height_frac > 0.0 && plan.darcy.streaks.height_frac <= 1.0,
             "problem.darcy_streak_height must lie in (0, 1]");
    plan.darcy.streaks.centers = ex.numbers("problem", "darcy_streak_centers", "0.25,0.5,0.75");
    for (double c : plan.darcy.streaks.centers)
        ex.check(c >= 0.0 && c <= 1.0, "problem.darcy_streak_centers entries must lie in [0, 1]");

    // [space]
    const std::string method = ex.text("space", "method", adr ? "fvm" : "fem");
    ex.check(method == "fem" || method == "fvm",
             "space.method must be one of {fem, fvm}, got '" + method + "'");
    plan.space = method == "fem" ? SpaceMethod::fem : SpaceMethod::fvm;
    plan.nx = static_cast<int>(ex.integer("space", "nx", 50));
    ex.check(plan.nx >= 2, "space.nx must be >= 2");
    plan.ny = static_cast<int>(ex.integer("space", "ny", 50));
    ex.check(plan.ny >= 2, "space.ny must be >= 2");
    plan.L1 = ex.number("space", "L1", 1.0);
    ex.check(plan.L1 > 0.0, "space.L1 must be > 0");
    plan.L2 = ex.number("space", "L2", 1.0);
    ex.check(plan.L2 > 0.0, "space.L2 must be > 0");

    // [noise]
    plan.noise.r = static_cast<int>(ex.integer("noise", "r", 2));
    ex.check(plan.noise.r == 1 || plan.noise.r == 2,
             "noise.r must be one of {1, 2}, got " + std::to_string(plan.noise.r));
    plan.noise.delta = ex.number("noise", "delta", 0.05);
    ex.check(plan.noise.delta > 0.0, "noise.delta must be > 0");
    {
        const Extractor::Taken t = ex.take("noise", "modes");
        int modes = std::min(plan.nx, plan.ny);
        if (t.present) modes = static_cast<int>(parse_integer(t.value, t.line, "noise.modes"));
        ex.record("noise", "modes", std::to_string(modes),
                  t.present ? t.source : ConfigSource::defaults);
        ex.last_line = t.line;
        ex.check(modes >= 1, "noise.modes must be >= 1");
        plan.modes = modes;
    }
    plan.noise.zero_mode_one = ex.boolean("noise", "zero_mode_one", true);
    plan.noise.amplitude = ex.number("noise", "amplitude", 1.0);
    ex.check(plan.noise.amplitude >= 0.0, "noise.amplitude must be >= 0");

    // [time]
    plan.T = ex.number("time", "T", 1.0);
    ex.check(plan.T > 0.0, "time.T must be > 0");
    plan.dt_ladder = ex.numbers("time", "dt_ladder",
                                adr ? "1/64,1/128,1/256,1/512" : "1/32,1/64,1/128,1/256,1/512");
    plan.dt_reference = ex.number("time", "dt_reference", 0.0);
    ex.check(plan.dt_reference >= 0.0, "time.dt_reference must be >= 0 (0 = automatic)");

    // [monte_carlo]
    plan.realizations = static_cast<int>(ex.integer("monte_carlo", "realizations", adr ? 100 : 30));
    ex.check(plan.realizations >= 2, "monte_carlo.realizations must be >= 2");
    plan.seed = ex.unsigned64("monte_carlo", "seed", 12345);
    {
        const std::string schemes = ex.text("monte_carlo", "schemes", "modified,standard");
        plan.run_modified = false;
        plan.run_standard = false;
        const auto items = split_list(schemes);
        ex.check(!items.empty(), "monte_carlo.schemes must name at least one scheme");
        for (const std::string& s : items) {
            if (s == "modified")
                plan.run_modified = true;
            else if (s == "standard")
                plan.run_standard = true;
            else
                ex.check(false, "monte_carlo.schemes entries must be one of {modified, standard}, got '" +
                                    s + "'");
        }
    }
    const std::string coupling = ex.text("monte_carlo", "coupling", "coupled");
    ex.check(coupling == "coupled" || coupling == "independent",
             "monte_carlo.coupling must be one of {coupled, independent}, got '" + coupling + "'");
    plan.coupling = coupling == "coupled" ? CouplingMode::coupled : CouplingMode::independent;
    plan.threads = static_cast<int>(ex.integer("monte_carlo", "threads", 1));
    ex.check(plan.threads >= 1, "monte_carlo.threads must be >= 1");

    // [output]
    cfg.name = ex.text("output", "name", "experiment");
    ex.check(!cfg.name.empty(), "output.name must not be empty");
    cfg.out_dir = ex.text("output", "dir", "out");
    ex.check(!cfg.out_dir.empty(), "output.dir must not be empty");
    cfg.verbosity = static_cast<int>(ex.integer("output", "verbosity", 1));
    ex.check(cfg.verbosity >= 0 && cfg.verbosity <= 3, "output.verbosity must lie in [0, 3]");
    cfg.write_csv = ex.boolean("output", "write_csv", true);
    cfg.write_json = ex.boolean("output", "write_json", true);
    cfg.dump_mesh = ex.boolean("output", "dump_mesh", false);
    cfg.dump_noise = ex.boolean("output", "dump_noise", false);
    cfg.dump_velocity = ex.boolean("output", "dump_velocity", false);
    cfg.snapshot_times = ex.numbers("output", "snapshot_times", "");
    for (double t : cfg.snapshot_times)
        ex.check(t >= 0.0 && t <= plan.T, "output.snapshot_times must lie in [0, T]");

    ex.finish();

    try {
        validate_plan(plan);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    cfg.provenance = std::move(ex.prov);
    return cfg;
}

std::map<std::string, std::string> spdekit_env_overrides() {
    std::map<std::string, std::string> out;
    if (environ == nullptr) return out;
    for (char** e = environ; *e != nullptr; ++e) {
        const std::string entry(*e);
        if (entry.rfind("SPDEKIT_", 0) != 0) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const std::string name = entry.substr(8, eq - 8);
        const std::string value = entry.substr(eq + 1);
        std::string matched;
        for (const char* sec : kSections) {
            const std::string prefix = to_upper(std::string(sec)) + "_";
            if (name.rfind(prefix, 0) == 0 && prefix.size() > matched.size()) matched = std::string(sec);
        }
        if (matched.empty())
            throw ConfigError("config: unrecognized environment variable SPDEKIT_" + name);
        const std::string key = to_lower(name.substr(matched.size() + 1));
        if (key.empty()) throw ConfigError("config: empty key in SPDEKIT_" + name);
        out[matched + "." + key] = value;
    }
    return out;
}

RunConfig parse_config_file(const std::string& path, bool use_process_env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), use_process_env ? spdekit_env_overrides()
                                                   : std::map<std::string, std::string>{});
}

std::string print_config(const RunConfig& cfg) {
    std::ostringstream os;
    std::string section;
    for (const ConfigEntry& e : cfg.provenance) {
        if (e.section != section) {
            if (!section.empty()) os << "\n";
            os << "[" << e.section << "]\n";
            section = e.section;
        }
        os << e.key << " = " << e.value << "\n";
    }
    return os.str();
}

namespace {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::uint64_t plan_hash(const RunConfig& cfg) {
    std::ostringstream os;
    for (const ConfigEntry& e : cfg.provenance) {
        if (e.section == "output") continue;
        if (e.section == "monte_carlo" && (e.key == "seed" || e.key == "threads")) continue;
        os << e.section << "." << e.key << "=" << e.value << "\n";
    }
    return fnv1a64(os.str());
}

std::string report_basename(const RunConfig& cfg) {
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(plan_hash(cfg)));
    return std::string("report_") + hex + "_seed" + std::to_string(cfg.plan.seed);
}

namespace {

void set_provenance(RunConfig& cfg, const std::string& sec, const std::string& key,
                    const std::string& value, ConfigSource source) {
    for (ConfigEntry& e : cfg.provenance) {
        if (e.section == sec && e.key == key) {
            e.value = value;
            e.source = source;
            return;
        }
    }
    cfg.provenance.push_back(ConfigEntry{sec, key, value, source});
}

}  // namespace

void override_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.plan.seed = seed;
    set_provenance(cfg, "monte_carlo", "seed", std::to_string(seed), ConfigSource::cli);
}

void override_threads(RunConfig& cfg, int threads) {
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    cfg.plan.threads = threads;
    set_provenance(cfg, "monte_carlo", "threads", std::to_string(threads), ConfigSource::cli);
}

void override_out_dir(RunConfig& cfg, const std::string& dir) {
    if (dir.empty()) throw ConfigError("config: output directory must not be empty");
    cfg.out_dir = dir;
    set_provenance(cfg, "output", "dir", dir, ConfigSource::cli);
}

}  // namespace spdekit
