#include "srlaser/steady.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "srlaser/errors.hpp"
#include "srlaser/format.hpp"
#include "srlaser/rootfind.hpp"

namespace srlaser {

namespace {

// Subdivisions of the inversion axis for the bracket scan. The reduced
// balance is quadratic in d, so this is far denser than root separation
// requires; it also catches roots sitting exactly on an endpoint.
constexpr int kScanSubdivisions = 2048;

double rate_scale(const SystemParams& p) {
    return std::max({1.0, p.kappa, gamma_perp(p), p.pump + p.gamma});
}

// Rate-scaled stationarity residual, the same measure settle() uses.
double scaled_residual(const SystemParams& p, const CumulantState& s) {
    CumulantState ds;
    rhs(p, s, ds);
    const double gp = gamma_perp(p);
    const double big_d = 0.5 * (gp + p.kappa);
    const double rate[5] = {p.pump + p.gamma, big_d, big_d, gp, p.kappa};
    const double x[5] = {s.inversion, s.coherence_re, s.coherence_im, s.spin_spin,
                         s.photons};
    const double f[5] = {ds.inversion, ds.coherence_re, ds.coherence_im,
                         ds.spin_spin, ds.photons};
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
        worst = std::max(worst,
                         std::abs(f[i]) / (rate[i] * std::max(1.0, std::abs(x[i]))));
    return worst;
}

// Collective gain margin times (w + gamma): positive inside the pump window.
// H(w) = (w - gamma) N C gamma - gamma_perp(w) (w + gamma), quadratic in w
// with negative leading coefficient.
double gain_balance(const SystemParams& p, double w) {
    const double u = p.n_atoms * cooperativity(p.rabi, p.kappa, p.gamma) * p.gamma;
    const double gp = p.gamma + w + 2.0 * p.t2_inv;
    return (w - p.gamma) * u - gp * (w + p.gamma);
}

Branch classify(const SystemParams& p) {
    if (spin_spin_closed_form(p) > 0.0) return Branch::collective;
    // Outside the window, split at the pump rate maximising the gain margin
    // d0 N C gamma - gamma_perp: starved below it, pump-dephased above it.
    const double u = p.n_atoms * p.rabi * p.rabi / p.kappa;
    const double w_split = std::max(std::sqrt(2.0 * p.gamma * u) - p.gamma, 0.0);
    return p.pump <= w_split ? Branch::below_threshold : Branch::quenched;
}

struct Candidate {
    CumulantState state;
    std::array<std::complex<double>, 5> eigs;
    bool stable;
};

}  // namespace

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::below_threshold: return "below_threshold";
        case Branch::collective: return "collective";
        case Branch::quenched: return "quenched";
    }
    return "unknown";
}

double spin_spin_closed_form(const SystemParams& p) {
    p.validate();
    const double u = p.n_atoms * p.rabi * p.rabi / p.kappa;  // N C gamma
    const double d0 = (p.pump - p.gamma) / (p.pump + p.gamma);
    // rabi = 0 gives -inf: the decoupled system is never collective.
    return (d0 * u - gamma_perp(p)) * (p.pump + p.gamma) / (2.0 * u * u);
}

std::array<std::complex<double>, 5> stability_eigs(const SystemParams& p,
                                                   const CumulantState& s) {
    const Eigen::Matrix<double, 5, 5> j = rhs_jacobian(p, s);
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(j, false);
    std::array<std::complex<double>, 5> out;
    for (int i = 0; i < 5; ++i) out[i] = es.eigenvalues()(i);
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

bool is_stable(const std::array<std::complex<double>, 5>& eigs, double margin) {
    for (const auto& e : eigs)
        if (e.real() > margin) return false;
    return true;
}

double output_power(const SystemParams& p, const CumulantState& s) {
    return constants::hbar * p.omega_a * p.kappa * s.photons;
}

SteadyReport steady_exact(const SystemParams& p) {
    p.validate();
    if (p.detuning != 0.0)
        throw DomainError("steady_exact requires zero detuning; scan the spectrum "
                          "module for pulled operating points");

    SteadyReport rep;
    const double margin = 1e-12 * rate_scale(p);

    if (p.rabi == 0.0) {
        rep.state = repumped_initial(p);
        rep.branch = classify(p);
        rep.collective = false;
        rep.jacobian_eigs = stability_eigs(p, rep.state);
        rep.stable = is_stable(rep.jacobian_eigs, margin);
        rep.residual = scaled_residual(p, rep.state);
        rep.power = 0.0;
        return rep;
    }

    const double w = p.pump, g = p.gamma, n_at = p.n_atoms;
    const double gp = gamma_perp(p);
    const double big_d = 0.5 * (gp + p.kappa);
    const double d0 = (w - g) / (w + g);
    const double a = (w + g) / (2.0 * p.rabi);  // y = a (d0 - d) from the inversion row

    // Zero-detuning reduction: coherence_re = 0 and every remaining variable
    // is a function of the inversion d, leaving one scalar balance.
    auto y_of = [&](double d) { return a * (d0 - d); };
    auto balance = [&](double d) {
        const double y = y_of(d);
        const double n = n_at * p.rabi * y / p.kappa;
        const double s = p.rabi * d * y / gp;
        const double b = n * d + 0.5 * (d + 1.0) + (n_at - 1.0) * s;
        return big_d * y - 0.5 * p.rabi * b;
    };

    const std::vector<double> roots =
        detail::scan_roots(balance, -1.0, 1.0, kScanSubdivisions, 1e-15, 1e-12);

    std::vector<Candidate> candidates;
    const double y_floor = -1e-13 * a * std::max(1.0, std::abs(d0));
    for (double d : roots) {
        double y = y_of(d);
        if (y < y_floor) continue;  // negative photon number, spurious branch
        y = std::max(y, 0.0);
        Candidate c;
        c.state.inversion = d;
        c.state.coherence_im = y;
        c.state.spin_spin = p.rabi * d * y / gp;
        c.state.photons = n_at * p.rabi * y / p.kappa;
        c.eigs = stability_eigs(p, c.state);
        c.stable = is_stable(c.eigs, margin);
        candidates.push_back(c);
    }

    if (candidates.empty())
        throw SolverError("no physical steady-state root in d within [-1, 1]");

    const Candidate* pick = nullptr;
    int n_stable = 0;
    for (const Candidate& c : candidates) {
        if (!c.stable) continue;
        ++n_stable;
        if (!pick || c.state.photons > pick->state.photons) pick = &c;
    }
    if (!pick)
        throw SolverError("all " + std::to_string(candidates.size()) +
                          " steady-state roots are dynamically unstable");

    rep.state = pick->state;
    rep.jacobian_eigs = pick->eigs;
    rep.stable = true;
    rep.multistable = n_stable > 1;
    rep.branch = classify(p);
    rep.collective = rep.branch == Branch::collective;
    rep.power = output_power(p, rep.state);
    rep.residual = scaled_residual(p, rep.state);
    if (rep.residual > 1e-10)
        throw SolverError("steady-state residual " + g17(rep.residual) +
                          " exceeds 1e-10 after root refinement");
    return rep;
}

ThresholdPair thresholds_empirical(const SystemParams& p) {
    p.validate();
    if (p.rabi <= 0.0)
        throw NoCollectiveRegion("no collective window: rabi = 0 gives zero gain");

    auto h = [&](double w) { return gain_balance(p, w); };
    const double u = p.n_atoms * cooperativity(p.rabi, p.kappa, p.gamma) * p.gamma;
    const double w_v = 0.5 * (u - 2.0 * p.gamma - 2.0 * p.t2_inv);
    if (w_v <= 0.0 || h(w_v) < 0.0) {
        const DerivedParams dp = derive(p);
        throw NoCollectiveRegion(
            "no collective window for n_atoms = " + g17(p.n_atoms) +
            ": peak gain balance " + g17(w_v > 0.0 ? h(w_v) : h(0.0)) +
            " <= 0 (critical atom number scale n_crit = " + g17(dp.n_crit) + ")");
    }
    if (h(w_v) == 0.0) return {w_v, w_v};

    ThresholdPair out;
    out.w_lower = detail::bisect(h, 0.0, w_v, h(0.0), 1e-15);
    double span = w_v + p.gamma;
    while (h(w_v + span) > 0.0) span *= 2.0;
    out.w_upper = detail::bisect(h, w_v, w_v + span, h(w_v), 1e-15);
    return out;
}

std::string steady_report_json(const SystemParams& p, const SteadyReport& r) {
    using json = nlohmann::ordered_json;
    auto q = [](double v, const char* unit) {
        return json{{"value", v}, {"unit", unit}};
    };
    auto q_opt = [&q](double v, const char* unit) {
        return std::isfinite(v) ? q(v, unit) : json{{"value", nullptr}, {"unit", unit}};
    };

    const DerivedParams dp = derive(p);
    json j;
    j["params"] = {{"n_atoms", q(p.n_atoms, "atoms")},
                   {"gamma", q(p.gamma, "s^-1")},
                   {"pump", q(p.pump, "s^-1")},
                   {"t2_inv", q(p.t2_inv, "s^-1")},
                   {"kappa", q(p.kappa, "s^-1")},
                   {"rabi", q(p.rabi, "s^-1")},
                   {"detuning", q(p.detuning, "s^-1")},
                   {"omega_a", q(p.omega_a, "rad s^-1")},
                   {"bad_cavity", p.bad_cavity()}};
    j["derived"] = {{"cooperativity", q(dp.cooperativity, "dimensionless")},
                    {"d0", q(dp.d0, "dimensionless")},
                    {"gamma_perp", q(dp.gamma_perp, "s^-1")},
                    {"w_max", q(dp.w_max, "s^-1")},
                    {"w_opt", q(dp.w_opt, "s^-1")},
                    {"n_crit", q_opt(dp.n_crit, "atoms")},
                    {"linewidth_floor", q(dp.linewidth_floor, "s^-1")},
                    {"p_max", q(dp.p_max, "W")}};
    j["state"] = {{"inversion", q(r.state.inversion, "dimensionless")},
                  {"coherence_re", q(r.state.coherence_re, "dimensionless")},
                  {"coherence_im", q(r.state.coherence_im, "dimensionless")},
                  {"spin_spin", q(r.state.spin_spin, "dimensionless")},
                  {"photons", q(r.state.photons, "photons")}};
    j["power"] = q(r.power, "W");
    j["branch"] = branch_name(r.branch);
    j["collective"] = r.collective;
    j["stable"] = r.stable;
    j["multistable"] = r.multistable;
    j["residual"] = q(r.residual, "dimensionless");
    json eigs = json::array();
    for (const auto& e : r.jacobian_eigs) eigs.push_back({e.real(), e.imag()});
    j["jacobian_eigs"] = {{"value", eigs}, {"unit", "s^-1"}};
    return j.dump(2) + "\n";
}

}  // namespace srlaser
