#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srlaser/cumulant.hpp"
#include "srlaser/params.hpp"

namespace srlaser {

// First-order coherence dynamics <a^dag(t) a(0)>, <sigma^+(t) a(0)> closed
// under the regression hypothesis with the inversion frozen at its
// steady-state value. Frequencies are offsets from omega_a.
struct QrtSystem {
    Eigen::Matrix2cd m;        // regression generator (s^-1)
    Eigen::Vector2cd initial;  // (<a^dag a>, conj(<a^dag sigma^->)) at t = 0
};

struct SpectrumResult {
    std::complex<double> eig_slow;     // pole closest to the axis (s^-1)
    std::complex<double> eig_fast;     // companion pole (s^-1)
    std::complex<double> weight_slow;  // residue of the slow pole
    std::complex<double> weight_fast;
    bool degenerate = false;           // defective generator, (a + b t) e^{lambda t}
    std::complex<double> lin_coeff{};  // b in the degenerate case
    double linewidth_fwhm = 0.0;       // -2 Re(eig_slow) (s^-1)
    double linewidth_hz = 0.0;         // linewidth_fwhm / 2 pi
    double center_offset = 0.0;        // Im(eig_slow), lab frequency minus omega_a (s^-1)
    double photons = 0.0;              // correlation at t = 0, fixes the sum rule
};

// Regression system at the given operating point. The steady state is
// normally taken at zero detuning; a detuned cavity enters only through the
// field pole, which is the standard frozen-moment pulling approximation.
QrtSystem build_qrt(const SystemParams& p, const CumulantState& steady);

// Poles, residues and linewidth of the emission spectrum. The eigenproblem
// is solved via the stabilized quadratic formula so the slow pole survives
// the kappa >> gamma_perp cancellation.
SpectrumResult linewidth(const QrtSystem& q);

// Shorthand: linewidth at the algebraic steady state of p (zero detuning).
SpectrumResult linewidth(const SystemParams& p);

// S(omega) = 2 Re sum_m v_m / (i omega - lambda_m), with omega relative to
// omega_a. Integrates to 2 pi <a^dag a>.
std::vector<double> spectrum_samples(const SpectrumResult& r,
                                     std::span<const double> omega);

struct PullingPoint {
    double detuning;       // s^-1
    double center_offset;  // s^-1
    double fwhm;           // s^-1
};

// Re-anchors the field pole at each detuning while keeping the atomic
// moments frozen at the zero-detuning steady state.
std::vector<PullingPoint> pulling_curve(const SystemParams& p,
                                        const CumulantState& steady_zero_detuning,
                                        std::span<const double> detunings);

// CSV: preamble with the linewidth summary in s^-1 and Hz, then omega, s.
void write_spectrum_csv(std::ostream& os, const SystemParams& p,
                        const SpectrumResult& r, std::span<const double> omega);

}  // namespace srlaser
