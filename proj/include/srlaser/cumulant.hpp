#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srlaser/errors.hpp"
#include "srlaser/params.hpp"

namespace srlaser {

// Second-order cumulant variables. Atom permutation symmetry reduces the
// hierarchy to five real numbers; coherence is <a^dag sigma^-_1>, spin_spin
// is <sigma^+_1 sigma^-_2> (real for real initial data at zero detuning).
struct CumulantState {
    double inversion    = 0.0;  // <sigma^z_1>
    double coherence_re = 0.0;  // Re <a^dag sigma^-_1>
    double coherence_im = 0.0;  // Im <a^dag sigma^-_1>
    double spin_spin    = 0.0;  // <sigma^+_1 sigma^-_2>
    double photons      = 0.0;  // <a^dag a>
};

// Equilibrium of the single-atom pump/decay balance with an empty cavity.
CumulantState repumped_initial(const SystemParams& p);

// Time derivative of the cumulant equations at fixed parameters.
void rhs(const SystemParams& p, const CumulantState& s, CumulantState& ds);

// Jacobian of rhs in the field order (inversion, coherence_re, coherence_im,
// spin_spin, photons).
Eigen::Matrix<double, 5, 5> rhs_jacobian(const SystemParams& p, const CumulantState& s);

enum class IntegratorMode {
    automatic,  // adiabatic when kappa > 100 gamma_perp, otherwise full
    full,       // all five variables, cavity timescale resolved
    adiabatic,  // field and coherence slaved to (inversion, spin_spin)
};

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    IntegratorMode mode = IntegratorMode::automatic;
    std::size_t max_steps = 20'000'000;
};

struct Trajectory {
    std::vector<double> t;             // s
    std::vector<CumulantState> state;  // one entry per accepted step
    IntegratorMode mode_used = IntegratorMode::full;
    std::size_t steps = 0;
};

// True when the adiabatic reduction is admissible for these parameters.
bool adiabatic_applicable(const SystemParams& p);

Trajectory integrate(const SystemParams& p, const CumulantState& initial,
                     double t_end, const IntegrateOptions& opt = {});

struct SettleResult {
    CumulantState state;
    double t_settled = 0.0;  // s
    std::size_t steps = 0;
    IntegratorMode mode_used = IntegratorMode::full;
};

// Carries the best state reached when settling hits the step budget.
struct SettleTimeout : SolverError {
    SettleTimeout(const std::string& msg, CumulantState last, double t)
        : SolverError(msg), state(last), t_reached(t) {}
    CumulantState state;
    double t_reached;
};

// Integrates from `initial` until every component of the time derivative,
// scaled by its natural relaxation rate and state magnitude, drops below
// settle_tol. t_max <= 0 picks a horizon from the slowest rate.
SettleResult settle(const SystemParams& p, const CumulantState& initial,
                    const IntegrateOptions& opt = {}, double settle_tol = 1e-10,
                    double t_max = 0.0);

// CSV with a `# key = value` preamble, then t plus the five state columns.
void write_trajectory_csv(std::ostream& os, const SystemParams& p, const Trajectory& tr);

const char* mode_name(IntegratorMode m);

}  // namespace srlaser
