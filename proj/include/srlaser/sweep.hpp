#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "srlaser/config.hpp"
#include "srlaser/steady.hpp"

namespace srlaser {

// One grid cell of a pump/atom-number sweep. Failures are recorded in band
// instead of aborting the scan; value is NaN when error_code != 0.
struct SweepCell {
    double pump;      // s^-1
    double n_atoms;
    double value;     // power (W) or linewidth FWHM (s^-1)
    Branch branch = Branch::below_threshold;
    int error_code = 0;  // 0 ok, 1 domain, 2 solver, 3 other
};

// n >= 2 log-spaced points from lo to hi inclusive; n == 1 gives {lo}.
std::vector<double> log_grid(double lo, double hi, int n);

// Output power on the sweep grid, row-major with the pump index fastest.
// Cells are computed by a worker pool but stored by index, so the result is
// independent of scheduling.
std::vector<SweepCell> run_power_map(const RunConfig& cfg);

// Emission linewidth FWHM (s^-1) on the same grid.
std::vector<SweepCell> run_linewidth_map(const RunConfig& cfg);

// CSV with a parameter preamble; reference_* lines mark the rate scales a
// linewidth map is usually compared against.
void write_sweep_csv(std::ostream& os, const RunConfig& cfg, const char* quantity,
                     const std::vector<SweepCell>& cells);

}  // namespace srlaser
