#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "srlaser/params.hpp"

namespace srlaser {

using SparseCd = Eigen::SparseMatrix<std::complex<double>>;

// Truncated Hilbert space: n_max + 1 Fock states times 2^n_atoms spin
// configurations. Kets are indexed fock + (n_max + 1) * spins with spin bit
// j set when atom j is excited.
struct HilbertSpec {
    int n_atoms = 2;
    int n_max = 4;

    int dim() const { return (n_max + 1) * (1 << n_atoms); }
    // Throws DomainError for n_atoms outside [1, 3], SizeError above the cap.
    void validate() const;
};

// Hard cap on the Hilbert dimension; the Liouvillian has dim^2 rows.
inline constexpr int kMaxHilbertDim = 64;

struct OracleMoments {
    double inversion = 0.0;                // <sigma^z_1>
    std::complex<double> coherence{};      // <a^dag sigma^-_1>
    double spin_spin = 0.0;                // Re <sigma^+_1 sigma^-_2>, 0 for one atom
    double photons = 0.0;                  // <a^dag a>
};

struct DensityMatrix {
    Eigen::MatrixXcd rho;

    // Hermiticity to 1e-12, unit trace to 1e-10, eigenvalues >= -1e-10.
    void check_valid() const;
};

// Elementary operators on the composite space, dense for moment taking.
Eigen::MatrixXcd op_annihilation(const HilbertSpec& h);
Eigen::MatrixXcd op_sigma_minus(const HilbertSpec& h, int atom);
Eigen::MatrixXcd op_sigma_z(const HilbertSpec& h, int atom);

// vec(A rho B) = (B^T kron A) vec(rho) with column-major vec.
SparseCd superop_sandwich(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Full Lindblad generator: coherent Tavis-Cummings coupling at detuning
// delta plus cavity decay, atomic decay, incoherent repumping and dephasing.
SparseCd build_liouvillian(const HilbertSpec& h, const SystemParams& p);

struct OracleSteady {
    DensityMatrix rho;
    OracleMoments moments;
    HilbertSpec spec_used;        // n_max after any automatic enlargement
    double method_disagreement;   // max scaled moment gap between the two solvers
};

// Null vector of the Liouvillian by two independent routes (shift-inverted
// power iteration and a trace-replaced direct solve) which must agree to
// 1e-8 on every moment. n_max grows until the top Fock level holds less
// than 1e-8 population, stopping at the dimension cap.
OracleSteady steady_oracle(HilbertSpec h, const SystemParams& p);

struct OracleMode {
    std::complex<double> pole;     // s^-1
    std::complex<double> residue;  // contribution to <a^dag(t) a(0)> at t = 0
};

struct OracleSpectrum {
    std::vector<OracleMode> modes;
    double linewidth_fwhm = 0.0;   // s^-1, from the composite line shape
    double center_offset = 0.0;    // s^-1, peak location relative to omega_a
    double photons = 0.0;          // sum of residues
    std::vector<double> s;         // samples on the requested grid
};

// Exact emission spectrum from the eigendecomposition of the Liouvillian
// restricted to the single-quantum coherence sector. An explicit density
// matrix can replace the steady state, e.g. a seeded cavity at rabi = 0.
OracleSpectrum spectrum_oracle(HilbertSpec h, const SystemParams& p,
                               std::span<const double> omega,
                               const std::optional<DensityMatrix>& rho0 = {});

struct ErrorReportRow {
    std::string quantity;
    double oracle_value;
    double cumulant_value;
    double rel_error;  // |oracle - cumulant| / max(|oracle|, |cumulant|, 1e-6)
};

// Side-by-side moments and linewidth for the exact solver and the cumulant
// description at identical parameters. Requires p.n_atoms == h.n_atoms.
std::vector<ErrorReportRow> cumulant_error_report(HilbertSpec h, const SystemParams& p);

void write_error_report_csv(std::ostream& os, std::span<const ErrorReportRow> rows);

}  // namespace srlaser
