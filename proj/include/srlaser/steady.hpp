#pragma once

#include <array>
#include <complex>
#include <string>

#include "srlaser/cumulant.hpp"
#include "srlaser/params.hpp"

namespace srlaser {

// Operating regime by the sign of the collective gain balance
// d0 N C gamma - gamma_perp: negative on both sides of the pump window
// (weak pump below threshold, inversion quenched above it).
enum class Branch { below_threshold, collective, quenched };

const char* branch_name(Branch b);

struct SteadyReport {
    CumulantState state;
    double power = 0.0;       // emitted power hbar omega_a kappa <a^dag a> (W)
    Branch branch = Branch::below_threshold;
    bool collective = false;  // branch == collective
    bool stable = true;       // all Jacobian eigenvalues in the closed left half plane
    bool multistable = false; // more than one dynamically stable root
    std::array<std::complex<double>, 5> jacobian_eigs{};  // s^-1
    double residual = 0.0;    // rate-scaled stationarity residual of `state`
};

// Algebraic steady state of the cumulant equations at zero detuning.
// Bracket scan plus Brent refinement on the reduced scalar balance; roots
// with negative photon number are discarded, dynamically unstable roots are
// filtered with the Jacobian spectrum, ties resolve to the largest photon
// number with the multistable flag set.
SteadyReport steady_exact(const SystemParams& p);

// Closed-form spin-spin correlation
// (d0 N C gamma - gamma_perp)(w + gamma) / (2 N^2 C^2 gamma^2).
// Positive exactly inside the collective pump window.
double spin_spin_closed_form(const SystemParams& p);

struct ThresholdPair {
    double w_lower;  // s^-1
    double w_upper;  // s^-1
};

// Pump rates bracketing the collective window, located by bisection on the
// sign of spin_spin_closed_form. Ignores p.pump. Throws NoCollectiveRegion
// when no window exists for this atom number.
ThresholdPair thresholds_empirical(const SystemParams& p);

// Jacobian eigenvalues of the cumulant flow at `s`, sorted by real part.
std::array<std::complex<double>, 5> stability_eigs(const SystemParams& p,
                                                   const CumulantState& s);

// True when every eigenvalue satisfies Re(lambda) <= margin.
bool is_stable(const std::array<std::complex<double>, 5>& eigs, double margin = 1e-12);

// Power leaving the cavity: hbar omega_a kappa <a^dag a>.
double output_power(const SystemParams& p, const CumulantState& s);

// Report serialized as JSON; every dimensioned quantity carries its unit.
std::string steady_report_json(const SystemParams& p, const SteadyReport& r);

}  // namespace srlaser
