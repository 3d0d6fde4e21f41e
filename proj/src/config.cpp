#include "srlaser/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "srlaser/errors.hpp"

namespace srlaser {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a number");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9)
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    return static_cast<int>(x);
}

const std::vector<std::string> kOutputNames = {
    "steady", "power_map", "linewidth_map", "spectrum", "trajectory",
    "oracle_report"};

std::vector<std::string> parse_outputs(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (std::find(kOutputNames.begin(), kOutputNames.end(), item) ==
            kOutputNames.end())
            throw ConfigError("unknown output '" + item + "'");
        out.push_back(item);
    }
    if (out.empty()) throw ConfigError("outputs list is empty");
    return out;
}

bool is_geometry_key(const std::string& k) { return k.rfind("geometry.", 0) == 0; }

CavityGeometry& geometry_of(RunConfig& cfg) {
    if (!cfg.geometry) cfg.geometry.emplace();
    return *cfg.geometry;
}

void apply_one(RunConfig& cfg, const std::string& key, const std::string& value) {
    using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
    auto num = [](double RunConfig::* field) {
        return [field](RunConfig& c, const std::string& k, const std::string& v) {
            c.*field = parse_double(k, v);
        };
    };
    auto prm = [](double SystemParams::* field) {
        return [field](RunConfig& c, const std::string& k, const std::string& v) {
            c.params.*field = parse_double(k, v);
        };
    };
    auto geo = [](double CavityGeometry::* field) {
        return [field](RunConfig& c, const std::string& k, const std::string& v) {
            geometry_of(c).*field = parse_double(k, v);
        };
    };
    auto swp = [](double SweepGrid::* field) {
        return [field](RunConfig& c, const std::string& k, const std::string& v) {
            c.sweep.*field = parse_double(k, v);
        };
    };
    auto swpi = [](int SweepGrid::* field) {
        return [field](RunConfig& c, const std::string& k, const std::string& v) {
            c.sweep.*field = parse_int(k, v);
        };
    };

    static const std::map<std::string, Setter> table = {
        {"n_atoms", prm(&SystemParams::n_atoms)},
        {"gamma", prm(&SystemParams::gamma)},
        {"pump", prm(&SystemParams::pump)},
        {"t2_inv", prm(&SystemParams::t2_inv)},
        {"kappa", prm(&SystemParams::kappa)},
        {"rabi", prm(&SystemParams::rabi)},
        {"detuning", prm(&SystemParams::detuning)},
        {"omega_a", prm(&SystemParams::omega_a)},
        {"geometry.mode_volume", geo(&CavityGeometry::mode_volume)},
        {"geometry.finesse", geo(&CavityGeometry::finesse)},
        {"geometry.cavity_length", geo(&CavityGeometry::cavity_length)},
        {"geometry.dipole_moment", geo(&CavityGeometry::dipole_moment)},
        {"geometry.wavelength", geo(&CavityGeometry::wavelength)},
        {"sweep.w_min", swp(&SweepGrid::w_min)},
        {"sweep.w_max", swp(&SweepGrid::w_max)},
        {"sweep.w_points", swpi(&SweepGrid::w_points)},
        {"sweep.n_min", swp(&SweepGrid::n_min)},
        {"sweep.n_max", swp(&SweepGrid::n_max)},
        {"sweep.n_points", swpi(&SweepGrid::n_points)},
        {"outputs",
         [](RunConfig& c, const std::string&, const std::string& v) {
             c.outputs = parse_outputs(v);
         }},
        {"output_dir",
         [](RunConfig& c, const std::string&, const std::string& v) {
             c.output_dir = v;
         }},
        {"workers",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.workers = parse_int(k, v);
         }},
        {"tolerance.ode_rel", num(&RunConfig::ode_rel_tol)},
        {"tolerance.ode_abs", num(&RunConfig::ode_abs_tol)},
        {"tolerance.settle", num(&RunConfig::settle_tol)},
        {"dynamics.t_end", num(&RunConfig::t_end)},
        {"dynamics.initial",
         [](RunConfig& c, const std::string&, const std::string& v) {
             if (v != "repumped" && v != "ground")
                 throw ConfigError("dynamics.initial must be repumped or ground");
             c.initial = v;
         }},
        {"spectrum.points",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.spectrum_points = parse_int(k, v);
         }},
        {"oracle.n_atoms",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.oracle_atoms = parse_int(k, v);
         }},
        {"oracle.n_max",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             c.oracle_n_max = parse_int(k, v);
         }},
    };

    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
}

// Coupling constants may come from the geometry block or be given directly,
// never both; a partial geometry block is an error too.
void finalize(RunConfig& cfg, const std::vector<std::string>& seen) {
    const bool any_geometry =
        std::any_of(seen.begin(), seen.end(), is_geometry_key);
    if (any_geometry || cfg.geometry) {
        for (const char* clash : {"rabi", "kappa", "omega_a"})
            if (std::find(seen.begin(), seen.end(), clash) != seen.end())
                throw ConfigError(std::string("'") + clash +
                                  "' conflicts with the geometry block; give one "
                                  "or the other");
        const CavityGeometry& g = *cfg.geometry;
        g.validate();  // zero-initialized fields flag the missing keys
        cfg.params.rabi = rabi_from_geometry(g);
        cfg.params.kappa = kappa_from_geometry(g);
        cfg.params.omega_a = omega_from_wavelength(g.wavelength);
    }
    cfg.params.validate();
    if (!(cfg.sweep.w_min > 0.0) || !(cfg.sweep.w_max >= cfg.sweep.w_min))
        throw ConfigError("sweep pump range must satisfy 0 < w_min <= w_max");
    if (!(cfg.sweep.n_min >= 1.0) || !(cfg.sweep.n_max >= cfg.sweep.n_min))
        throw ConfigError("sweep atom range must satisfy 1 <= n_min <= n_max");
    if (cfg.sweep.w_points < 1 || cfg.sweep.n_points < 1)
        throw ConfigError("sweep grids need at least one point");
    if (cfg.workers < 0) throw ConfigError("workers must be >= 0");
    if (!(cfg.ode_rel_tol > 0.0) || !(cfg.ode_abs_tol > 0.0) ||
        !(cfg.settle_tol > 0.0))
        throw ConfigError("tolerances must be positive");
    if (!(cfg.t_end > 0.0)) throw ConfigError("dynamics.t_end must be positive");
    if (cfg.spectrum_points < 2) throw ConfigError("spectrum.points must be >= 2");
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::vector<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) +
                              ": empty key or value");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError("duplicate key '" + key + "'");
        seen.push_back(key);
        apply_one(cfg, key, value);
    }
    finalize(cfg, seen);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets) {
    std::vector<std::string> seen;
    // Direct coupling keys already resolved from a geometry block must keep
    // conflicting, so re-seed the seen list accordingly.
    if (cfg.geometry) seen.push_back("geometry.mode_volume");
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override '" + s + "': expected key=value");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("override '" + s + "': empty key or value");
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError("duplicate override '" + key + "'");
        seen.push_back(key);
        apply_one(cfg, key, value);
    }
    finalize(cfg, seen);
}

}  // namespace srlaser
