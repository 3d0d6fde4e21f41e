#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "srlaser/errors.hpp"
#include "srlaser/oracle.hpp"
#include "srlaser/spectrum.hpp"
#include "srlaser/steady.hpp"

using namespace srlaser;
using cplx = std::complex<double>;

namespace {

// Desk-scale rates: cavity dominant, moderate repumping, weak coupling so
// the factorized description should be accurate.
SystemParams weak_rates(double n_atoms) {
    SystemParams p;
    p.n_atoms = n_atoms;
    p.gamma = 1.0;
    p.pump = 2.0;
    p.t2_inv = 0.5;
    p.kappa = 40.0;
    p.rabi = 2.0;
    p.detuning = 0.0;
    return p;
}

double rel(double x, double y) {
    return std::abs(x - y) / std::max({1e-30, std::abs(x), std::abs(y)});
}

double max_abs(const SparseCd& m) {
    double best = 0.0;
    for (int c = 0; c < m.outerSize(); ++c)
        for (SparseCd::InnerIterator it(m, c); it; ++it)
            best = std::max(best, std::abs(it.value()));
    return best;
}

Eigen::VectorXcd vec_identity(int d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for (int i = 0; i < d; ++i) v(i + d * i) = 1.0;
    return v;
}

double expect(const Eigen::MatrixXcd& op, const Eigen::MatrixXcd& rho) {
    return (op * rho).trace().real();
}

int charge_of(const HilbertSpec& h, int ket) {
    return ket % (h.n_max + 1) +
           std::popcount(static_cast<unsigned>(ket / (h.n_max + 1)));
}

}  // namespace

TEST_CASE("elementary operators satisfy the truncated algebra") {
    const HilbertSpec h{2, 3};
    const int d = h.dim();
    const Eigen::MatrixXcd a = op_annihilation(h);
    const Eigen::MatrixXcd s0 = op_sigma_minus(h, 0);
    const Eigen::MatrixXcd s1 = op_sigma_minus(h, 1);
    const Eigen::MatrixXcd z0 = op_sigma_z(h, 0);

    // [a, a^dag] is the identity except on the top Fock level, where the
    // truncation removes the raising path.
    const Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
    for (int k = 0; k < d; ++k) {
        const int fock = k % (h.n_max + 1);
        const double want = (fock == h.n_max) ? -double(h.n_max) : 1.0;
        CHECK(comm(k, k).real() == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK((comm - comm.diagonal().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() ==
          0.0);

    CHECK((s0 * s0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((z0 * z0 - Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s0 * s1 - s1 * s0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s0.adjoint() * s0 - 0.5 * (z0 + Eigen::MatrixXcd::Identity(d, d)))
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("identity is a left null vector of every generator") {
    SystemParams sets[3] = {weak_rates(1), weak_rates(2), weak_rates(3)};
    sets[1].detuning = 1.3;
    sets[2].rabi = 5.0;
    const HilbertSpec spaces[3] = {{1, 4}, {2, 3}, {3, 2}};
    for (int i = 0; i < 3; ++i) {
        CAPTURE(i);
        const SparseCd l = build_liouvillian(spaces[i], sets[i]);
        const double scale = max_abs(l);
        const Eigen::VectorXcd left = l.adjoint() * vec_identity(spaces[i].dim());
        CHECK(left.lpNorm<Eigen::Infinity>() <= 1e-12 * scale);
    }
}

TEST_CASE("a single decoupled atom decays at the bare rate") {
    SystemParams p;
    p.n_atoms = 1;
    p.gamma = 1.0;
    p.pump = 0.0;
    p.t2_inv = 0.0;
    p.kappa = 5.0;
    p.rabi = 0.0;
    const HilbertSpec h{1, 2};
    const int d = h.dim();
    const SparseCd l = build_liouvillian(h, p);

    // Excited atom, empty cavity: index fock 0, spin bit set.
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    const int k = 0 + (h.n_max + 1) * 1;
    rho(k, k) = 1.0;
    const Eigen::VectorXcd dv = l * Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
    const Eigen::MatrixXcd drho = Eigen::Map<const Eigen::MatrixXcd>(dv.data(), d, d);

    const Eigen::MatrixXcd pe =
        0.5 * (Eigen::MatrixXcd::Identity(d, d) + op_sigma_z(h, 0));
    CHECK(std::abs(expect(pe, drho) + p.gamma) < 1e-14);
    // Trace motion vanishes even for this non-steady state.
    CHECK(std::abs(drho.trace()) < 1e-14);
}

TEST_CASE("the generator commutes with the atom swap") {
    SystemParams p = weak_rates(2);
    p.detuning = 0.9;
    const HilbertSpec h{2, 3};
    const int d = h.dim();
    Eigen::MatrixXcd perm = Eigen::MatrixXcd::Zero(d, d);
    for (int s = 0; s < 4; ++s) {
        const int swapped = ((s & 1) << 1) | ((s >> 1) & 1);
        for (int n = 0; n <= h.n_max; ++n)
            perm(n + (h.n_max + 1) * swapped, n + (h.n_max + 1) * s) = 1.0;
    }
    const SparseCd l = build_liouvillian(h, p);
    const SparseCd sw = superop_sandwich(perm, perm);
    const Eigen::MatrixXcd gap = Eigen::MatrixXcd(l * sw) - Eigen::MatrixXcd(sw * l);
    CHECK(gap.cwiseAbs().maxCoeff() <= 1e-12 * max_abs(l));
}

TEST_CASE("decoupled steady state is the repumping balance") {
    for (double n_atoms : {1.0, 2.0}) {
        CAPTURE(n_atoms);
        SystemParams p = weak_rates(n_atoms);
        p.rabi = 0.0;
        const double d0 = (p.pump - p.gamma) / (p.pump + p.gamma);
        const OracleSteady os =
            steady_oracle(HilbertSpec{static_cast<int>(n_atoms), 2}, p);
        CHECK(std::abs(os.moments.inversion - d0) < 1e-8);
        CHECK(std::abs(os.moments.photons) < 1e-10);
        CHECK(std::abs(os.moments.coherence) < 1e-10);
        CHECK(std::abs(os.moments.spin_spin) < 1e-10);
    }
}

TEST_CASE("weak-coupling single atom reproduces the factorized point") {
    const SystemParams p = weak_rates(1);
    const HilbertSpec h{1, 4};
    const OracleSteady os = steady_oracle(h, p);
    os.rho.check_valid();
    CHECK(os.method_disagreement <= 1e-8);
    CHECK(os.spec_used.n_max == h.n_max);

    const SteadyReport cs = steady_exact(p);
    CHECK(rel(os.moments.inversion, cs.state.inversion) < 0.05);
    CHECK(rel(os.moments.photons, cs.state.photons) < 0.05);
    CHECK(rel(os.moments.coherence.imag(), cs.state.coherence_im) < 0.05);
    CHECK(std::abs(os.moments.coherence.real()) < 1e-10);

    // Unbroken phase invariance: first moments of the field and dipole.
    const Eigen::MatrixXcd a = op_annihilation(os.spec_used);
    const Eigen::MatrixXcd sm = op_sigma_minus(os.spec_used, 0);
    CHECK(std::abs((a * os.rho.rho).trace()) < 1e-10);
    CHECK(std::abs((sm * os.rho.rho).trace()) < 1e-10);
}

TEST_CASE("a pair of atoms stays permutation symmetric and phase invariant") {
    const SystemParams p = weak_rates(2);
    const HilbertSpec h{2, 4};
    const OracleSteady os = steady_oracle(h, p);
    os.rho.check_valid();

    const HilbertSpec& hs = os.spec_used;
    const Eigen::MatrixXcd a = op_annihilation(hs);
    CHECK(std::abs(expect(op_sigma_z(hs, 0), os.rho.rho) -
                   expect(op_sigma_z(hs, 1), os.rho.rho)) < 1e-10);
    const cplx c0 = (a.adjoint() * op_sigma_minus(hs, 0) * os.rho.rho).trace();
    const cplx c1 = (a.adjoint() * op_sigma_minus(hs, 1) * os.rho.rho).trace();
    CHECK(std::abs(c0 - c1) < 1e-10);
    CHECK(std::abs((a * os.rho.rho).trace()) < 1e-10);
    CHECK(std::abs((op_sigma_minus(hs, 0) * os.rho.rho).trace()) < 1e-10);
    // Cross correlation is real for this generator.
    const cplx ss =
        (op_sigma_minus(hs, 0).adjoint() * op_sigma_minus(hs, 1) * os.rho.rho).trace();
    CHECK(std::abs(ss.imag()) < 1e-10);
}

TEST_CASE("moments are invariant under a global rate rescale") {
    SystemParams p = weak_rates(2);
    p.detuning = 0.7;
    const OracleSteady base = steady_oracle(HilbertSpec{2, 4}, p);

    SystemParams q = p;
    const double alpha = 1000.0;
    q.gamma *= alpha;
    q.pump *= alpha;
    q.t2_inv *= alpha;
    q.kappa *= alpha;
    q.rabi *= alpha;
    q.detuning *= alpha;
    const OracleSteady scaled = steady_oracle(HilbertSpec{2, 4}, q);

    CHECK(rel(base.moments.inversion, scaled.moments.inversion) < 1e-9);
    CHECK(rel(base.moments.photons, scaled.moments.photons) < 1e-9);
    CHECK(rel(base.moments.spin_spin, scaled.moments.spin_spin) < 1e-9);
    CHECK(std::abs(base.moments.coherence - scaled.moments.coherence) < 1e-9);
}

TEST_CASE("photon cutoff grows until the top level empties") {
    SystemParams p;
    p.n_atoms = 2;
    p.gamma = 1.0;
    p.pump = 8.0;
    p.t2_inv = 0.5;
    p.kappa = 100.0;
    p.rabi = 25.0;
    const OracleSteady os = steady_oracle(HilbertSpec{2, 1}, p);
    CHECK(os.spec_used.n_max >= 3);
    CHECK(os.moments.photons > 0.01);

    // Raising the converged cutoff further must not move the moments.
    HilbertSpec larger = os.spec_used;
    larger.n_max += 2;
    const OracleSteady os2 = steady_oracle(larger, p);
    CHECK(rel(os.moments.inversion, os2.moments.inversion) < 1e-6);
    CHECK(rel(os.moments.photons, os2.moments.photons) < 1e-6);
    CHECK(rel(os.moments.spin_spin, os2.moments.spin_spin) < 1e-6);
}

TEST_CASE("dimension and atom-count limits are enforced") {
    CHECK_THROWS_AS((HilbertSpec{3, 15}.validate()), SizeError);
    CHECK_THROWS_AS((HilbertSpec{0, 4}.validate()), DomainError);
    CHECK_THROWS_AS((HilbertSpec{4, 4}.validate()), DomainError);
    CHECK_THROWS_AS((HilbertSpec{2, 0}.validate()), DomainError);

    // A near-resonant cavity with huge occupation cannot fit under the cap.
    SystemParams p;
    p.n_atoms = 3;
    p.gamma = 1.0;
    p.pump = 20.0;
    p.t2_inv = 0.0;
    p.kappa = 0.5;
    p.rabi = 5.0;
    CHECK_THROWS_WITH_AS(steady_oracle(HilbertSpec{3, 4}, p),
                         doctest::Contains("cannot grow"), SizeError);
}

TEST_CASE("a seeded empty cavity emits the bare cavity line") {
    SystemParams p;
    p.n_atoms = 1;
    p.gamma = 1.0;
    p.pump = 0.5;
    p.t2_inv = 0.25;
    p.kappa = 8.0;
    p.rabi = 0.0;
    const HilbertSpec h{1, 2};
    const int d = h.dim();

    DensityMatrix seeded;
    seeded.rho = Eigen::MatrixXcd::Zero(d, d);
    seeded.rho(1, 1) = 1.0;  // ground atom, one photon

    const OracleSpectrum sp = spectrum_oracle(h, p, {}, seeded);
    CHECK(rel(sp.linewidth_fwhm, p.kappa) < 1e-6);
    // Peak localization resolves the flat Lorentzian top to ~fwhm*sqrt(eps).
    CHECK(std::abs(sp.center_offset) < 1e-7 * p.kappa);
    CHECK(rel(sp.photons, 1.0) < 1e-10);
    REQUIRE_FALSE(sp.modes.empty());
    CHECK(rel(sp.modes[0].pole.real(), -0.5 * p.kappa) < 1e-10);
    CHECK(std::abs(sp.modes[0].residue - cplx(1.0, 0.0)) < 1e-10);

    // A detuned cavity moves the line to the cavity frequency.
    SystemParams pd = p;
    pd.detuning = 3.0;
    const OracleSpectrum spd = spectrum_oracle(h, pd, {}, seeded);
    CHECK(rel(spd.center_offset, 3.0) < 1e-6);
    CHECK(rel(spd.linewidth_fwhm, p.kappa) < 1e-6);
}

TEST_CASE("weak-coupling line matches the reduced two-level width") {
    const SystemParams p = weak_rates(1);
    const HilbertSpec h{1, 4};

    // Tangent grid puts most samples inside the dominant Lorentzian while
    // still reaching far into both tails for the sum rule.
    const int m = 200001;
    const double du = constants::pi / m;
    std::vector<double> omega(m), jac(m);
    const double scale = 4.0;
    for (int j = 0; j < m; ++j) {
        const double u = -0.5 * constants::pi + (j + 0.5) * du;
        omega[j] = scale * std::tan(u);
        jac[j] = scale / (std::cos(u) * std::cos(u));
    }
    const OracleSpectrum sp = spectrum_oracle(h, p, omega);

    const SpectrumResult q = linewidth(build_qrt(p, steady_exact(p).state));
    CHECK(rel(sp.linewidth_fwhm, q.linewidth_fwhm) < 0.20);
    CHECK(std::abs(sp.center_offset) < 1e-6);

    double integral = 0.0;
    for (int j = 0; j < m; ++j) {
        CHECK(sp.s[j] >= -1e-12);
        integral += sp.s[j] * jac[j] * du;
    }
    CHECK(rel(integral, 2.0 * constants::pi * sp.photons) < 0.01);
    // Residue bookkeeping ties the curve to the steady photon number.
    const OracleSteady os = steady_oracle(h, p);
    CHECK(rel(sp.photons, os.moments.photons) < 1e-8);
}

TEST_CASE("exact propagation preserves trace, hermiticity and positivity") {
    SystemParams p;
    p.n_atoms = 1;
    p.gamma = 1.0;
    p.pump = 0.7;
    p.t2_inv = 0.3;
    p.kappa = 5.0;
    p.rabi = 2.0;
    p.detuning = 0.5;
    const HilbertSpec h{1, 2};
    const int d = h.dim();
    const Eigen::MatrixXcd l = Eigen::MatrixXcd(build_liouvillian(h, p));

    // Excited atom with one photon: fock 1, spin bit set.
    Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(d, d);
    const int k = 1 + (h.n_max + 1) * 1;
    rho0(k, k) = 1.0;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(l);
    REQUIRE(es.info() == Eigen::Success);
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::VectorXcd lam = es.eigenvalues();
    const Eigen::VectorXcd c0 =
        v.lu().solve(Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d));

    for (double t : {0.05, 0.3, 1.5, 8.0}) {
        CAPTURE(t);
        Eigen::VectorXcd ct = c0;
        for (int i = 0; i < ct.size(); ++i) ct(i) *= std::exp(lam(i) * t);
        const Eigen::VectorXcd vt = v * ct;
        DensityMatrix rt;
        rt.rho = Eigen::Map<const Eigen::MatrixXcd>(vt.data(), d, d);
        CHECK(std::abs(rt.rho.trace() - cplx(1.0, 0.0)) < 1e-10);
        CHECK((rt.rho - rt.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK_NOTHROW(rt.check_valid());
    }
}

TEST_CASE("every generator entry conserves the excitation grading") {
    SystemParams p = weak_rates(2);
    p.detuning = 1.1;
    const HilbertSpec h{2, 2};
    const int d = h.dim();
    const SparseCd l = build_liouvillian(h, p);
    for (int c = 0; c < l.outerSize(); ++c)
        for (SparseCd::InnerIterator it(l, c); it; ++it) {
            const int ri = static_cast<int>(it.row()) % d;
            const int rj = static_cast<int>(it.row()) / d;
            const int ci = c % d, cj = c / d;
            CHECK(charge_of(h, ri) - charge_of(h, rj) ==
                  charge_of(h, ci) - charge_of(h, cj));
        }
}

TEST_CASE("malformed density matrices are rejected") {
    const int d = 4;
    DensityMatrix m;

    m.rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
    m.rho(0, 1) = cplx(0.0, 1e-3);  // no conjugate partner
    CHECK_THROWS_AS(m.check_valid(), SolverError);

    m.rho = Eigen::MatrixXcd::Identity(d, d) * (0.9 / d);
    CHECK_THROWS_AS(m.check_valid(), SolverError);

    m.rho = Eigen::MatrixXcd::Zero(d, d);
    m.rho(0, 0) = 1.5;
    m.rho(1, 1) = -0.5;
    CHECK_THROWS_AS(m.check_valid(), SolverError);
}

TEST_CASE("error report tracks the decoupled and weak-coupling limits") {
    SystemParams p = weak_rates(2);
    p.rabi = 0.0;
    auto rows = cumulant_error_report(HilbertSpec{2, 2}, p);
    REQUIRE(rows.size() == 4);  // no photons, no linewidth row
    for (const ErrorReportRow& r : rows) {
        CAPTURE(r.quantity);
        CHECK(r.rel_error < 1e-8);
    }

    p = weak_rates(2);
    rows = cumulant_error_report(HilbertSpec{2, 4}, p);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].quantity == "inversion");
    CHECK(rows[4].quantity == "linewidth_fwhm");
    for (const ErrorReportRow& r : rows) {
        CAPTURE(r.quantity);
        CHECK(r.rel_error < 0.05);
    }

    SystemParams mismatched = weak_rates(3);
    CHECK_THROWS_AS(cumulant_error_report(HilbertSpec{2, 4}, mismatched), DomainError);
}

TEST_CASE("desk-scale pair matches the relaxation spin-correlation sign") {
    SystemParams p;
    p.n_atoms = 2;
    p.gamma = 1.0;
    p.t2_inv = 10.0;
    p.kappa = 1e4;
    p.rabi = 38.729833462074169;  // cooperativity 0.15

    p.pump = 50.0;
    OracleSteady os = steady_oracle(HilbertSpec{2, 4}, p);
    double s_cum = steady_exact(p).state.spin_spin;
    CHECK(os.moments.spin_spin > 0.0);
    CHECK(s_cum > 0.0);
    CHECK(rel(os.moments.spin_spin, s_cum) < 0.05);
    CHECK(os.method_disagreement <= 1e-8);

    // Below the repumping balance point both routes turn anticorrelated.
    p.pump = 0.5;
    os = steady_oracle(HilbertSpec{2, 4}, p);
    s_cum = steady_exact(p).state.spin_spin;
    CHECK(os.moments.spin_spin < 0.0);
    CHECK(s_cum < 0.0);
}

TEST_CASE("strong-coupling errors are reported without an asserted bound") {
    SystemParams p;
    p.n_atoms = 2;
    p.gamma = 1.0;
    p.pump = 5.0;
    p.t2_inv = 1.0;
    p.kappa = 100.0;
    p.rabi = 20.0;  // collective gain comparable to the dephasing rate
    const auto rows = cumulant_error_report(HilbertSpec{2, 6}, p);
    REQUIRE(rows.size() == 5);
    for (const ErrorReportRow& r : rows) {
        CAPTURE(r.quantity);
        CHECK(std::isfinite(r.oracle_value));
        CHECK(std::isfinite(r.cumulant_value));
        CHECK(std::isfinite(r.rel_error));
    }
}

TEST_CASE("error report CSV is a plain table") {
    const SystemParams p = weak_rates(2);
    const auto rows = cumulant_error_report(HilbertSpec{2, 4}, p);
    std::ostringstream os;
    write_error_report_csv(os, rows);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "quantity,oracle,cumulant,rel_error");
    std::size_t n = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++n;
    CHECK(n == rows.size());
}
