#include "srlaser/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "srlaser/format.hpp"
#include "srlaser/ode.hpp"

namespace srlaser {

namespace {

constexpr const char* kFieldNames[5] = {"inversion", "coherence_re", "coherence_im",
                                        "spin_spin", "photons"};

// Fast degrees of freedom slaved to (inversion, spin_spin). nu*d -> 1 marks
// the point where cavity gain balances loss at frozen inversion and the
// reduction stops being contractive.
struct Slaved {
    double b;       // source bracket n*d + (d+1)/2 + (N-1)*s
    double c_re;
    double c_im;
    double photons;
};

struct AdiabaticCoeffs {
    double mu;  // coherence response: c_im = mu * B
    double nu;  // photon response: n = nu * B
};

AdiabaticCoeffs adiabatic_coeffs(const SystemParams& p) {
    const double big_d = 0.5 * (gamma_perp(p) + p.kappa);
    const double dc2 = big_d * big_d + p.detuning * p.detuning;
    AdiabaticCoeffs co;
    co.mu = 0.5 * p.rabi * big_d / dc2;
    co.nu = p.n_atoms * p.rabi * co.mu / p.kappa;
    return co;
}

// Trial stages of an adventurous step can extrapolate d far past the guard;
// returning NaN lets the error controller reject the step instead of aborting.
// Only a state the controller cannot back away from is a real breakdown, and
// that surfaces as a step-size underflow with guard_hit still set.
Slaved slave_field(const SystemParams& p, const AdiabaticCoeffs& co, double d, double s,
                   bool& guard_hit) {
    Slaved out;
    const double denom = 1.0 - co.nu * d;
    if (!(denom >= 0.05)) {
        guard_hit = true;
        out.b = out.c_re = out.c_im = out.photons =
            std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.b = (0.5 * (d + 1.0) + (p.n_atoms - 1.0) * s) / denom;
    const double big_d = 0.5 * (gamma_perp(p) + p.kappa);
    const double dc2 = big_d * big_d + p.detuning * p.detuning;
    out.c_re = -0.5 * p.rabi * out.b * p.detuning / dc2;
    out.c_im = co.mu * out.b;
    out.photons = co.nu * out.b;
    return out;
}

IntegratorMode resolve_mode(const SystemParams& p, IntegratorMode requested) {
    if (requested != IntegratorMode::automatic) return requested;
    if (!adiabatic_applicable(p)) return IntegratorMode::full;
    // Worst-case slaved gain over |d| <= 1 must stay clear of the guard.
    return adiabatic_coeffs(p).nu < 0.5 ? IntegratorMode::adiabatic : IntegratorMode::full;
}

CumulantState from_array(const detail::OdeVec<5>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
}

detail::OdeVec<5> to_array(const CumulantState& s) {
    return {s.inversion, s.coherence_re, s.coherence_im, s.spin_spin, s.photons};
}

}  // namespace

const char* mode_name(IntegratorMode m) {
    switch (m) {
        case IntegratorMode::automatic: return "automatic";
        case IntegratorMode::full: return "full";
        case IntegratorMode::adiabatic: return "adiabatic";
    }
    return "unknown";
}

bool adiabatic_applicable(const SystemParams& p) {
    return p.kappa > 100.0 * gamma_perp(p);
}

CumulantState repumped_initial(const SystemParams& p) {
    p.validate();
    CumulantState s;
    s.inversion = (p.pump - p.gamma) / (p.pump + p.gamma);
    return s;
}

void rhs(const SystemParams& p, const CumulantState& s, CumulantState& ds) {
    const double w = p.pump, g = p.gamma, n_at = p.n_atoms;
    const double gp = gamma_perp(p);
    const double big_d = 0.5 * (gp + p.kappa);
    const double d0 = (w - g) / (w + g);
    const double b = s.photons * s.inversion + 0.5 * (s.inversion + 1.0) +
                     (n_at - 1.0) * s.spin_spin;
    ds.inversion = -(w + g) * (s.inversion - d0) - 2.0 * p.rabi * s.coherence_im;
    ds.coherence_re = -big_d * s.coherence_re - p.detuning * s.coherence_im;
    ds.coherence_im = p.detuning * s.coherence_re - big_d * s.coherence_im +
                      0.5 * p.rabi * b;
    ds.spin_spin = -gp * s.spin_spin + p.rabi * s.inversion * s.coherence_im;
    ds.photons = -p.kappa * s.photons + n_at * p.rabi * s.coherence_im;
}

Eigen::Matrix<double, 5, 5> rhs_jacobian(const SystemParams& p, const CumulantState& s) {
    const double w = p.pump, g = p.gamma, n_at = p.n_atoms;
    const double gp = gamma_perp(p);
    const double big_d = 0.5 * (gp + p.kappa);
    Eigen::Matrix<double, 5, 5> j = Eigen::Matrix<double, 5, 5>::Zero();
    j(0, 0) = -(w + g);
    j(0, 2) = -2.0 * p.rabi;
    j(1, 1) = -big_d;
    j(1, 2) = -p.detuning;
    j(2, 0) = 0.5 * p.rabi * (s.photons + 0.5);
    j(2, 1) = p.detuning;
    j(2, 2) = -big_d;
    j(2, 3) = 0.5 * p.rabi * (n_at - 1.0);
    j(2, 4) = 0.5 * p.rabi * s.inversion;
    j(3, 0) = p.rabi * s.coherence_im;
    j(3, 2) = p.rabi * s.inversion;
    j(3, 3) = -gp;
    j(4, 2) = n_at * p.rabi;
    j(4, 4) = -p.kappa;
    return j;
}

namespace {

detail::OdeOptions ode_options(const IntegrateOptions& opt) {
    detail::OdeOptions o;
    o.rel_tol = opt.rel_tol;
    o.abs_tol = opt.abs_tol;
    o.max_steps = opt.max_steps;
    return o;
}

[[noreturn]] void throw_underflow(const detail::OdeStats& st, bool adiabatic) {
    const char* comp = "unknown";
    if (adiabatic)
        comp = (st.blame == 0) ? "inversion" : "spin_spin";
    else if (st.blame >= 0 && st.blame < 5)
        comp = kFieldNames[st.blame];
    throw StiffnessError("step size underflow at t = " + g17(st.t) +
                             " while resolving " + comp,
                         comp);
}

template <class StepFn>
void run_full(const SystemParams& p, CumulantState& state, double t_end,
              const IntegrateOptions& opt, StepFn&& on_step, detail::OdeStats& st) {
    auto f = [&p](double, const detail::OdeVec<5>& x, detail::OdeVec<5>& dx) {
        CumulantState s = from_array(x), ds;
        rhs(p, s, ds);
        dx = to_array(ds);
    };
    detail::OdeVec<5> x = to_array(state);
    st = detail::dopri5<5>(f, x, 0.0, t_end, ode_options(opt),
                           [&](double t, const detail::OdeVec<5>& xv,
                               const detail::OdeVec<5>& fv) {
                               return on_step(t, from_array(xv), from_array(fv));
                           });
    state = from_array(x);
    if (st.status == detail::OdeStatus::step_underflow) throw_underflow(st, false);
}

template <class StepFn>
void run_adiabatic(const SystemParams& p, CumulantState& state, double t_end,
                   const IntegrateOptions& opt, StepFn&& on_step, detail::OdeStats& st) {
    const AdiabaticCoeffs co = adiabatic_coeffs(p);
    const double w = p.pump, g = p.gamma;
    const double gp = gamma_perp(p);
    const double d0 = (w - g) / (w + g);
    bool guard_hit = false;
    auto f = [&](double, const detail::OdeVec<2>& x, detail::OdeVec<2>& dx) {
        const Slaved sl = slave_field(p, co, x[0], x[1], guard_hit);
        dx[0] = -(w + g) * (x[0] - d0) - 2.0 * p.rabi * sl.c_im;
        dx[1] = -gp * x[1] + p.rabi * x[0] * sl.c_im;
    };
    auto reconstruct = [&](const detail::OdeVec<2>& x) {
        const Slaved sl = slave_field(p, co, x[0], x[1], guard_hit);
        return CumulantState{x[0], sl.c_re, sl.c_im, x[1], sl.photons};
    };
    detail::OdeVec<2> x = {state.inversion, state.spin_spin};
    st = detail::dopri5<2>(f, x, 0.0, t_end, ode_options(opt),
                           [&](double t, const detail::OdeVec<2>& xv,
                               const detail::OdeVec<2>& fv) {
                               // Accepted states never sit in the guard region;
                               // any earlier hit was a rejected excursion.
                               guard_hit = false;
                               CumulantState s = reconstruct(xv), ds;
                               rhs(p, s, ds);
                               (void)fv;
                               return on_step(t, s, ds);
                           });
    state = reconstruct(x);
    if (st.status == detail::OdeStatus::step_underflow) {
        if (guard_hit)
            throw SolverError("adiabatic reduction broke down: slaved gain within 5% "
                              "of cavity loss, use the full integrator");
        throw_underflow(st, true);
    }
}

}  // namespace

Trajectory integrate(const SystemParams& p, const CumulantState& initial,
                     double t_end, const IntegrateOptions& opt) {
    p.validate();
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw DomainError("t_end must be positive and finite");
    if (!(opt.rel_tol > 1e-14 && opt.rel_tol < 1e-2))
        throw DomainError("rel_tol must lie in (1e-14, 1e-2)");
    const IntegratorMode mode = resolve_mode(p, opt.mode);
    if (mode == IntegratorMode::adiabatic && !adiabatic_applicable(p))
        throw DomainError("adiabatic mode requires kappa > 100 gamma_perp");

    Trajectory tr;
    tr.mode_used = mode;
    tr.t.push_back(0.0);
    tr.state.push_back(initial);
    auto record = [&tr](double t, const CumulantState& s, const CumulantState&) {
        tr.t.push_back(t);
        tr.state.push_back(s);
        return true;
    };

    CumulantState s = initial;
    detail::OdeStats st;
    if (mode == IntegratorMode::adiabatic)
        run_adiabatic(p, s, t_end, opt, record, st);
    else
        run_full(p, s, t_end, opt, record, st);
    if (st.status == detail::OdeStatus::step_limit)
        throw SolverError("step budget exhausted at t = " + g17(st.t) +
                          " before t_end = " + g17(t_end));
    tr.steps = st.accepted;
    return tr;
}

SettleResult settle(const SystemParams& p, const CumulantState& initial,
                    const IntegrateOptions& opt, double settle_tol, double t_max) {
    p.validate();
    if (!(settle_tol > 0.0)) throw DomainError("settle_tol must be > 0");
    if (!(opt.rel_tol > 1e-14 && opt.rel_tol < 1e-2))
        throw DomainError("rel_tol must lie in (1e-14, 1e-2)");
    const IntegratorMode mode = resolve_mode(p, opt.mode);
    if (mode == IntegratorMode::adiabatic && !adiabatic_applicable(p))
        throw DomainError("adiabatic mode requires kappa > 100 gamma_perp");

    const double gp = gamma_perp(p);
    const double big_d = 0.5 * (gp + p.kappa);
    const double rate[5] = {p.pump + p.gamma, big_d, big_d, gp, p.kappa};
    const double slowest = std::min({rate[0], gp, p.kappa});
    if (t_max <= 0.0) t_max = 200.0 / slowest;

    // Residual per component: |f_i| over its bare relaxation rate, relative
    // to the larger of the state magnitude and one.
    auto settled = [&rate](const CumulantState& s, const CumulantState& ds,
                           double tol) {
        const double x[5] = {s.inversion, s.coherence_re, s.coherence_im,
                             s.spin_spin, s.photons};
        const double f[5] = {ds.inversion, ds.coherence_re, ds.coherence_im,
                             ds.spin_spin, ds.photons};
        double worst = 0.0;
        for (int i = 0; i < 5; ++i)
            worst = std::max(worst, std::abs(f[i]) /
                                        (rate[i] * std::max(1.0, std::abs(x[i]))));
        return worst < tol;
    };

    SettleResult out;
    out.mode_used = mode;
    bool done = false;
    auto watch = [&](double t, const CumulantState& s, const CumulantState& ds) {
        if (settled(s, ds, settle_tol)) {
            out.t_settled = t;
            done = true;
            return false;
        }
        return true;
    };

    CumulantState s = initial;
    detail::OdeStats st;
    if (mode == IntegratorMode::adiabatic)
        run_adiabatic(p, s, t_max, opt, watch, st);
    else
        run_full(p, s, t_max, opt, watch, st);
    out.state = s;
    out.steps = st.accepted;
    if (!done) {
        if (st.status == detail::OdeStatus::step_limit)
            throw SettleTimeout("step budget exhausted at t = " + g17(st.t) +
                                    " before settling",
                                s, st.t);
        throw SettleTimeout("no steady state within t_max = " + g17(t_max) +
                                " s; slowest-rate horizon too short or dynamics "
                                "critically slow",
                            s, st.t);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const SystemParams& p, const Trajectory& tr) {
    os << "# cumulant trajectory\n";
    os << "# n_atoms = " << g17(p.n_atoms) << "\n";
    os << "# gamma = " << g17(p.gamma) << "\n";
    os << "# pump = " << g17(p.pump) << "\n";
    os << "# t2_inv = " << g17(p.t2_inv) << "\n";
    os << "# kappa = " << g17(p.kappa) << "\n";
    os << "# rabi = " << g17(p.rabi) << "\n";
    os << "# detuning = " << g17(p.detuning) << "\n";
    os << "# mode = " << mode_name(tr.mode_used) << "\n";
    os << "# time unit = s, rates = s^-1\n";
    os << "time,inversion,coherence_re,coherence_im,spin_spin,photons\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const CumulantState& s = tr.state[i];
        os << g17(tr.t[i]) << ',' << g17(s.inversion) << ',' << g17(s.coherence_re)
           << ',' << g17(s.coherence_im) << ',' << g17(s.spin_spin) << ','
           << g17(s.photons) << '\n';
    }
}

}  // namespace srlaser
