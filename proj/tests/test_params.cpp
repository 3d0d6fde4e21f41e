#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srlaser/errors.hpp"
#include "srlaser/params.hpp"

using namespace srlaser;

namespace {

// Reference operating point: 1e6 atoms, gamma = 0.01, 1/T2 = 1, kappa =
// 9.4e5, rabi = 37, all in s^-1. Expected values below are frozen from an
// independent 50-digit evaluation of the closed forms.
SystemParams reference() { return SystemParams{}; }

}  // namespace

TEST_CASE("cooperativity at the reference coupling") {
    CHECK(cooperativity(37.0, 9.4e5, 0.01) ==
          doctest::Approx(0.14563829787234043).epsilon(1e-14));
    CHECK(cooperativity(1.0, 1.0, 1.0) == 1.0);
}

TEST_CASE("cooperativity rejects non-positive or non-finite inputs") {
    CHECK_THROWS_AS(cooperativity(0.0, 9.4e5, 0.01), DomainError);
    CHECK_THROWS_AS(cooperativity(-1.0, 9.4e5, 0.01), DomainError);
    CHECK_THROWS_AS(cooperativity(37.0, 0.0, 0.01), DomainError);
    CHECK_THROWS_AS(cooperativity(37.0, 9.4e5, -0.01), DomainError);
    CHECK_THROWS_AS(cooperativity(std::nan(""), 1.0, 1.0), DomainError);
}

TEST_CASE("cooperativity invariant under kappa -> a kappa, rabi -> sqrt(a) rabi") {
    const double base = cooperativity(37.0, 9.4e5, 0.01);
    for (double a : {0.1, 10.0}) {
        CHECK(cooperativity(std::sqrt(a) * 37.0, a * 9.4e5, 0.01) ==
              doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("derived quantities at the reference point") {
    const DerivedParams d = derive(reference());
    CHECK(d.cooperativity == doctest::Approx(0.14563829787234043).epsilon(1e-14));
    CHECK(d.gamma_perp == doctest::Approx(2.01).epsilon(1e-15));
    CHECK(d.w_max == doctest::Approx(1456.3829787234043).epsilon(1e-14));
    CHECK(d.w_opt == 0.5 * d.w_max);
    CHECK(d.n_crit == doctest::Approx(1373.2651570489408).epsilon(1e-14));
    CHECK(d.linewidth_floor == doctest::Approx(0.0014563829787234043).epsilon(1e-14));
    CHECK(d.p_max == doctest::Approx(5.1809203666452547e-11).epsilon(1e-13));
    CHECK(d.d0 == -1.0);  // pump = 0 exactly
}

TEST_CASE("d0 rises monotonically through zero at pump = gamma toward one") {
    SystemParams p = reference();
    double prev = -2.0;
    for (double w = 1e-4; w < 1e10; w *= 10.0) {
        p.pump = w;
        const double v = derive(p).d0;
        CHECK(v > prev);
        CHECK(v < 1.0);
        prev = v;
    }
    p.pump = p.gamma;
    CHECK(derive(p).d0 == 0.0);
    p.pump = 1e12;
    CHECK(derive(p).d0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("p_max scales exactly as the atom number squared") {
    SystemParams p = reference();
    const double one = derive(p).p_max;
    p.n_atoms *= 2.0;
    CHECK(derive(p).p_max == 4.0 * one);
}

TEST_CASE("rabi from the reference cavity geometry") {
    CavityGeometry g;
    g.mode_volume = 1e-3 * constants::pi * 50e-6 * 50e-6;
    g.dipole_moment = 1e-5 * constants::e_charge * constants::bohr;
    g.wavelength = 698e-9;
    g.finesse = 1e6;
    g.cavity_length = 1e-3;
    const double om = rabi_from_geometry(g);
    CHECK(om == doctest::Approx(36.367355102680094).epsilon(1e-12));

    // Trivial scalings: sqrt in the mode volume, linear in the dipole.
    CavityGeometry g2 = g;
    g2.mode_volume *= 2.0;
    CHECK(rabi_from_geometry(g2) == doctest::Approx(om / std::sqrt(2.0)).epsilon(1e-14));
    g2 = g;
    g2.dipole_moment *= 2.0;
    CHECK(rabi_from_geometry(g2) == doctest::Approx(2.0 * om).epsilon(1e-15));
}

TEST_CASE("kappa from geometry is the free spectral range over the finesse") {
    CavityGeometry g;
    g.mode_volume = 1e-12;
    g.dipole_moment = 1e-35;
    g.wavelength = 698e-9;
    g.cavity_length = 1e-2;
    g.finesse = 1e5;
    CHECK(kappa_from_geometry(g) ==
          doctest::Approx(941825.78365442664).epsilon(1e-13));
    g.finesse *= 2.0;
    CHECK(kappa_from_geometry(g) ==
          doctest::Approx(0.5 * 941825.78365442664).epsilon(1e-13));
}

TEST_CASE("transition frequency from the wavelength") {
    CHECK(omega_from_wavelength(698e-9) ==
          doctest::Approx(2.6986412139095315e15).epsilon(1e-12));
    CHECK(constants::default_omega_a ==
          doctest::Approx(2.6986412139095315e15).epsilon(1e-12));
    CHECK_THROWS_AS(omega_from_wavelength(0.0), DomainError);
}

TEST_CASE("system parameter validation rejects out-of-range fields") {
    auto reject = [](auto mutate) {
        SystemParams p = reference();
        mutate(p);
        CHECK_THROWS_AS(p.validate(), DomainError);
    };
    reject([](SystemParams& p) { p.n_atoms = 0.0; });
    reject([](SystemParams& p) { p.gamma = 0.0; });
    reject([](SystemParams& p) { p.gamma = -1.0; });
    reject([](SystemParams& p) { p.pump = -1.0; });
    reject([](SystemParams& p) { p.t2_inv = -1.0; });
    reject([](SystemParams& p) { p.kappa = 0.0; });
    reject([](SystemParams& p) { p.rabi = -1.0; });
    reject([](SystemParams& p) { p.detuning = std::nan(""); });
    reject([](SystemParams& p) { p.omega_a = 0.0; });
    CHECK_NOTHROW(reference().validate());

    CavityGeometry g;  // all zero
    CHECK_THROWS_AS(g.validate(), DomainError);
}

TEST_CASE("bad-cavity flag is advisory, never enforced") {
    SystemParams p = reference();
    CHECK(p.bad_cavity());
    p.kappa = 0.5;  // below t2_inv
    CHECK_FALSE(p.bad_cavity());
    CHECK_NOTHROW(p.validate());
    p = reference();
    p.pump = 1e7;  // pump faster than the cavity
    CHECK_FALSE(p.bad_cavity());
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("derive covers the decoupled zero-coupling limit") {
    SystemParams p = reference();
    p.rabi = 0.0;
    const DerivedParams d = derive(p);
    CHECK(d.cooperativity == 0.0);
    CHECK(d.w_max == 0.0);
    CHECK(std::isinf(d.n_crit));
    CHECK(d.p_max == 0.0);
    CHECK(d.linewidth_floor == 0.0);

    p = reference();
    p.t2_inv = 0.0;  // no dephasing: every atom number has a window
    CHECK(std::isinf(derive(p).n_crit));
}
