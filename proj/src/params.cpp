#include "srlaser/params.hpp"

#include <cmath>
#include <limits>

#include "srlaser/errors.hpp"

namespace srlaser {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("invalid parameter: ") + what);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void SystemParams::validate() const {
    require(finite(n_atoms) && n_atoms >= 1.0, "n_atoms must be >= 1");
    require(finite(gamma) && gamma > 0.0, "gamma must be > 0");
    require(finite(pump) && pump >= 0.0, "pump must be >= 0");
    require(finite(t2_inv) && t2_inv >= 0.0, "t2_inv must be >= 0");
    require(finite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(finite(rabi) && rabi >= 0.0, "rabi must be >= 0");
    require(finite(detuning), "detuning must be finite");
    require(finite(omega_a) && omega_a > 0.0, "omega_a must be > 0");
}

void CavityGeometry::validate() const {
    require(finite(mode_volume) && mode_volume > 0.0, "mode_volume must be > 0");
    require(finite(finesse) && finesse > 0.0, "finesse must be > 0");
    require(finite(cavity_length) && cavity_length > 0.0, "cavity_length must be > 0");
    require(finite(dipole_moment) && dipole_moment > 0.0, "dipole_moment must be > 0");
    require(finite(wavelength) && wavelength > 0.0, "wavelength must be > 0");
}

double cooperativity(double rabi, double kappa, double gamma) {
    require(finite(rabi) && rabi > 0.0, "rabi must be > 0");
    require(finite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(finite(gamma) && gamma > 0.0, "gamma must be > 0");
    return rabi * rabi / (kappa * gamma);
}

double gamma_perp(const SystemParams& p) {
    return p.gamma + p.pump + 2.0 * p.t2_inv;
}

double omega_from_wavelength(double wavelength) {
    require(finite(wavelength) && wavelength > 0.0, "wavelength must be > 0");
    return 2.0 * constants::pi * constants::c_light / wavelength;
}

double rabi_from_geometry(const CavityGeometry& g) {
    g.validate();
    const double omega_c = omega_from_wavelength(g.wavelength);
    return g.dipole_moment *
           std::sqrt(omega_c / (2.0 * constants::hbar * constants::eps0 * g.mode_volume));
}

double kappa_from_geometry(const CavityGeometry& g) {
    g.validate();
    return constants::pi * constants::c_light / (g.cavity_length * g.finesse);
}

DerivedParams derive(const SystemParams& p) {
    p.validate();
    DerivedParams d;
    // Inline ratio rather than cooperativity(): derive() must also cover the
    // decoupled rabi = 0 case, which the strict operation rejects.
    d.cooperativity = p.rabi * p.rabi / (p.kappa * p.gamma);
    d.d0 = (p.pump - p.gamma) / (p.pump + p.gamma);
    d.gamma_perp = gamma_perp(p);
    d.w_max = p.n_atoms * d.cooperativity * p.gamma;
    d.w_opt = 0.5 * d.w_max;
    // Collective window needs C gamma T2 N > 2 up to order-one corrections;
    // n_crit is the conventional estimate, infinite when T2 never dephases.
    d.n_crit = (p.t2_inv > 0.0 && d.cooperativity > 0.0)
                   ? 2.0 * p.t2_inv / (d.cooperativity * p.gamma)
                   : std::numeric_limits<double>::infinity();
    d.linewidth_floor = d.cooperativity * p.gamma;
    d.p_max = constants::hbar * p.omega_a * p.n_atoms * p.n_atoms *
              d.cooperativity * p.gamma / 8.0;
    return d;
}

}  // namespace srlaser
