// config.hpp — Line-oriented key=value configs and the CLI run configuration
//
// Grammar: one `key=value` pair per line, `#` starts a comment, blank lines
// ignored, lists comma-separated. Chain/bath keys:
//   n_sites=10              site count (needed with bath.* unless couplings given)
//   couplings=1,1,1         N-1 nearest-neighbor couplings
//   bath.3=0.5,0.5          bath couplings g_k of site 3 (1-based)
//   bath_eff=4.0            homogeneous effective coupling shorthand
//   bath_eff=1,2,3          per-site effective couplings G_l
// Run keys (tmax, dt, g, from, to, formula, seed, out) mirror the CLI flags;
// flags override file values.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spintrans/model.hpp"

namespace spintrans::config {

// ------------------------------- formatting ---------------------------------

// Fixed 17-significant-digit scientific notation for CSV payload values.
inline std::string sci(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

// Shortest round-trip form for metadata values.
inline std::string compact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string join_compact(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += compact(values[i]);
    }
    return out;
}

// --------------------------------- parsing ----------------------------------

struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;

    std::optional<std::string> get(const std::string& key) const {
        // last occurrence wins, so later lines (or appended overrides) shadow
        for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
            if (it->first == key) return it->second;
        }
        return std::nullopt;
    }

    bool has(const std::string& key) const { return get(key).has_value(); }
    void set(std::string key, std::string value) {
        entries.emplace_back(std::move(key), std::move(value));
    }
};

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        }
        kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

inline KeyValues parse_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

inline double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(what + ": bad number '" + text + "'");
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    if (trim(text).empty()) return values;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        values.push_back(parse_double(trim(item), what));
    }
    return values;
}

inline long parse_long(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(what + ": bad integer '" + text + "'");
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (trim(text.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(what + ": bad integer '" + text + "'");
}

// --------------------------- chain/bath from config --------------------------

inline model::ChainSpec chain_from_entries(const KeyValues& kv) {
    const auto couplings = kv.get("couplings");
    const auto n_sites = kv.get("n_sites");
    if (!couplings && !n_sites) {
        throw std::invalid_argument("config: need n_sites or couplings");
    }
    if (couplings) {
        auto j = parse_list(*couplings, "couplings");
        if (n_sites) {
            const long n = parse_long(*n_sites, "n_sites");
            if (n != static_cast<long>(j.size()) + 1) {
                throw std::invalid_argument("config: couplings length must be n_sites - 1");
            }
        }
        return model::ChainSpec::nearest_neighbor(std::move(j));
    }
    const long n = parse_long(*n_sites, "n_sites");
    if (n < 1) throw std::invalid_argument("config: n_sites must be >= 1");
    return model::ChainSpec::uniform(static_cast<int>(n));
}

inline model::BathSpec bath_from_entries(const KeyValues& kv, int n_sites) {
    std::vector<std::vector<double>> per_site(n_sites);
    bool any_site_key = false;
    for (const auto& [key, value] : kv.entries) {
        if (key.rfind("bath.", 0) != 0) continue;
        const long site = parse_long(key.substr(5), key);
        if (site < 1 || site > n_sites) {
            throw std::invalid_argument("config: " + key + " out of range");
        }
        per_site[site - 1] = parse_list(value, key);
        any_site_key = true;
    }
    const auto eff = kv.get("bath_eff");
    if (eff && any_site_key) {
        throw std::invalid_argument("config: bath_eff conflicts with bath.<site> keys");
    }
    if (eff) {
        auto g = parse_list(*eff, "bath_eff");
        if (g.size() == 1) g.assign(n_sites, g.front());
        if (static_cast<int>(g.size()) != n_sites) {
            throw std::invalid_argument("config: bath_eff needs 1 or n_sites values");
        }
        return model::BathSpec::from_effective(g);
    }
    return model::BathSpec::from_couplings(std::move(per_site));
}

// --------------------------------- RunConfig --------------------------------

// Full state of one CLI invocation. Zero/empty fields mean "not set"; the
// command decides its own defaults.
struct RunConfig {
    std::string command;

    int uniform_n = 0;
    int engineered_n = 0;
    std::vector<double> couplings;
    std::string config_path;

    std::vector<double> g_list;
    std::string bath_spec_path;

    double t_max = 0.0;
    double dt = 0.0;
    int from_site = 0;
    int to_site = 0;
    std::string formula;
    std::uint64_t seed = 0;
    std::string out_path;

    int opt_n = 0;
    int budget = 5000;
    int restarts = 10;
    std::string objective;

    bool operator==(const RunConfig&) const = default;

    std::string serialize() const {
        std::ostringstream out;
        out << "command=" << command << '\n';
        out << "uniform=" << uniform_n << '\n';
        out << "engineered=" << engineered_n << '\n';
        out << "couplings=" << join_compact(couplings) << '\n';
        out << "config=" << config_path << '\n';
        out << "g=" << join_compact(g_list) << '\n';
        out << "bath_spec=" << bath_spec_path << '\n';
        out << "tmax=" << compact(t_max) << '\n';
        out << "dt=" << compact(dt) << '\n';
        out << "from=" << from_site << '\n';
        out << "to=" << to_site << '\n';
        out << "formula=" << formula << '\n';
        out << "seed=" << seed << '\n';
        out << "out=" << out_path << '\n';
        out << "n=" << opt_n << '\n';
        out << "budget=" << budget << '\n';
        out << "restarts=" << restarts << '\n';
        out << "objective=" << objective << '\n';
        return out.str();
    }

    static RunConfig deserialize(const std::string& text) {
        const KeyValues kv = parse_key_values(text);
        RunConfig cfg;
        const auto str = [&](const char* key, std::string& field) {
            if (auto v = kv.get(key)) field = *v;
        };
        const auto num = [&](const char* key, double& field) {
            if (auto v = kv.get(key)) field = parse_double(*v, key);
        };
        const auto integer = [&](const char* key, int& field) {
            if (auto v = kv.get(key)) field = static_cast<int>(parse_long(*v, key));
        };
        str("command", cfg.command);
        integer("uniform", cfg.uniform_n);
        integer("engineered", cfg.engineered_n);
        if (auto v = kv.get("couplings")) cfg.couplings = parse_list(*v, "couplings");
        str("config", cfg.config_path);
        if (auto v = kv.get("g")) cfg.g_list = parse_list(*v, "g");
        str("bath_spec", cfg.bath_spec_path);
        num("tmax", cfg.t_max);
        num("dt", cfg.dt);
        integer("from", cfg.from_site);
        integer("to", cfg.to_site);
        str("formula", cfg.formula);
        if (auto v = kv.get("seed")) cfg.seed = parse_u64(*v, "seed");
        str("out", cfg.out_path);
        integer("n", cfg.opt_n);
        integer("budget", cfg.budget);
        integer("restarts", cfg.restarts);
        str("objective", cfg.objective);
        return cfg;
    }
};

}  // namespace spintrans::config
