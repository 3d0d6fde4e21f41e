#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srlaser/params.hpp"

namespace srlaser {

struct SweepGrid {
    double w_min = 1e-3;   // s^-1
    double w_max = 1e5;    // s^-1
    int w_points = 100;
    double n_min = 1e3;    // atoms
    double n_max = 1e7;    // atoms
    int n_points = 100;
};

// Everything a run needs, resolved from a key = value file plus overrides.
struct RunConfig {
    SystemParams params;
    std::optional<CavityGeometry> geometry;  // set when geometry.* keys appear
    SweepGrid sweep;
    std::vector<std::string> outputs = {"power_map", "linewidth_map"};
    std::string output_dir = ".";
    int workers = 0;            // 0 picks the hardware concurrency
    double ode_rel_tol = 1e-10;
    double ode_abs_tol = 1e-12;
    double settle_tol = 1e-10;
    double t_end = 1.0;         // s, dynamics horizon
    std::string initial = "repumped";  // or "ground"
    int spectrum_points = 401;
    int oracle_atoms = 2;
    int oracle_n_max = 4;
};

// Flat `key = value` format, one pair per line, `#` comments. Unknown or
// duplicate keys are hard errors. Geometry keys are all-or-none and replace
// rabi, kappa and omega_a, which then must not be set explicitly.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

// Applies `key=value` strings on top of a parsed config, same key set and
// the same geometry consistency rules.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets);

}  // namespace srlaser
