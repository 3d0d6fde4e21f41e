#pragma once

#include "srlaser/constants.hpp"

namespace srlaser {

// All rates are angular frequencies (s^-1) in the atomic rotating frame.
// Conversion to ordinary frequency (Hz) happens only at output boundaries.
struct SystemParams {
    double n_atoms  = 1e6;     // intracavity atom number N
    double gamma    = 0.01;    // free-space spontaneous emission rate (s^-1)
    double pump     = 0.0;     // incoherent repump rate w (s^-1)
    double t2_inv   = 1.0;     // inhomogeneous dephasing rate 1/T2 (s^-1)
    double kappa    = 9.4e5;   // cavity field energy decay rate (s^-1)
    double rabi     = 37.0;    // single-atom vacuum Rabi frequency (s^-1)
    double detuning = 0.0;     // cavity-atom detuning omega_c - omega_a (s^-1)
    double omega_a  = constants::default_omega_a;  // transition frequency (rad s^-1)

    // Throws DomainError if any field is outside its admissible range.
    void validate() const;

    // Diagnostic only, never enforced: the model assumes the cavity decays
    // faster than every atomic rate. False means results probe the regime
    // boundary and the adiabatic picture may not apply.
    bool bad_cavity() const { return kappa > gamma && kappa > pump && kappa > t2_inv; }
};

// Mirror and dipole data from which the coupling constants derive.
struct CavityGeometry {
    double mode_volume   = 0.0;  // effective mode volume V (m^3)
    double finesse       = 0.0;  // cavity finesse
    double cavity_length = 0.0;  // mirror separation L (m)
    double dipole_moment = 0.0;  // transition dipole matrix element (C m)
    double wavelength    = 0.0;  // transition wavelength (m)

    void validate() const;
};

// Quantities fixed by a parameter set, evaluated once up front.
struct DerivedParams {
    double cooperativity;    // single-atom cooperativity C = rabi^2 / (kappa gamma)
    double d0;               // bare pump equilibrium inversion (w - gamma)/(w + gamma)
    double gamma_perp;       // dipole decoherence rate gamma + w + 2/T2 (s^-1)
    double w_max;            // collective emission cutoff N C gamma (s^-1)
    double w_opt;            // pump maximising output, w_max / 2 (s^-1)
    double n_crit;           // atom number scale for a collective window, 2/(C gamma T2)
    double linewidth_floor;  // C gamma (s^-1)
    double p_max;            // peak output power hbar omega_a N^2 C gamma / 8 (W)
};

double cooperativity(double rabi, double kappa, double gamma);

// Total transverse decoherence rate Gamma = gamma + pump + 2/T2.
double gamma_perp(const SystemParams& p);

// Single-photon Rabi frequency Omega = d sqrt(omega_c / (2 hbar eps0 V)) for
// a dipole d sitting at an antinode of a mode with effective volume V.
double rabi_from_geometry(const CavityGeometry& g);

// Field energy decay rate pi c / (L F): free spectral range over finesse.
double kappa_from_geometry(const CavityGeometry& g);

// Angular transition frequency for a vacuum wavelength.
double omega_from_wavelength(double wavelength);

DerivedParams derive(const SystemParams& p);

}  // namespace srlaser
