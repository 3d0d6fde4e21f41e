#include "srlaser/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "srlaser/errors.hpp"
#include "srlaser/format.hpp"
#include "srlaser/spectrum.hpp"
#include "srlaser/steady.hpp"

namespace srlaser {

namespace {

using cplx = std::complex<double>;
using Triplet = Eigen::Triplet<cplx>;

int ket_index(const HilbertSpec& h, int fock, int spins) {
    return fock + (h.n_max + 1) * spins;
}

struct Nonzero {
    int row, col;
    cplx val;
};

std::vector<Nonzero> gather(const Eigen::MatrixXcd& m) {
    std::vector<Nonzero> nz;
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r)
            if (m(r, c) != cplx(0.0, 0.0)) nz.push_back({r, c, m(r, c)});
    return nz;
}

// Crude but adequate norm scale: largest column absolute sum.
double one_norm(const SparseCd& m) {
    double best = 0.0;
    for (int c = 0; c < m.outerSize(); ++c) {
        double acc = 0.0;
        for (SparseCd::InnerIterator it(m, c); it; ++it) acc += std::abs(it.value());
        best = std::max(best, acc);
    }
    return best;
}

}  // namespace

void HilbertSpec::validate() const {
    if (n_atoms < 1 || n_atoms > 3)
        throw DomainError("oracle supports 1 to 3 atoms, got " +
                          std::to_string(n_atoms));
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    if (dim() > kMaxHilbertDim)
        throw SizeError("Hilbert dimension " + std::to_string(dim()) +
                        " exceeds the cap of " + std::to_string(kMaxHilbertDim));
}

Eigen::MatrixXcd op_annihilation(const HilbertSpec& h) {
    const int d = h.dim();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (int s = 0; s < (1 << h.n_atoms); ++s)
        for (int n = 1; n <= h.n_max; ++n)
            m(ket_index(h, n - 1, s), ket_index(h, n, s)) = std::sqrt(double(n));
    return m;
}

Eigen::MatrixXcd op_sigma_minus(const HilbertSpec& h, int atom) {
    const int d = h.dim();
    const int bit = 1 << atom;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (int s = 0; s < (1 << h.n_atoms); ++s) {
        if (!(s & bit)) continue;
        for (int n = 0; n <= h.n_max; ++n)
            m(ket_index(h, n, s & ~bit), ket_index(h, n, s)) = 1.0;
    }
    return m;
}

Eigen::MatrixXcd op_sigma_z(const HilbertSpec& h, int atom) {
    const int d = h.dim();
    const int bit = 1 << atom;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (int s = 0; s < (1 << h.n_atoms); ++s)
        for (int n = 0; n <= h.n_max; ++n) {
            const int k = ket_index(h, n, s);
            m(k, k) = (s & bit) ? 1.0 : -1.0;
        }
    return m;
}

SparseCd superop_sandwich(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const int d = static_cast<int>(a.rows());
    const auto na = gather(a);
    const auto nb = gather(b);
    std::vector<Triplet> trip;
    trip.reserve(na.size() * nb.size());
    // vec(A rho B)_(i + d j) picks up A(i,k) B(l,j) rho_(k + d l).
    for (const Nonzero& ea : na)
        for (const Nonzero& eb : nb)
            trip.emplace_back(ea.row + d * eb.col, ea.col + d * eb.row,
                              ea.val * eb.val);
    SparseCd out(d * d, d * d);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

SparseCd build_liouvillian(const HilbertSpec& h, const SystemParams& p) {
    h.validate();
    p.validate();
    const int d = h.dim();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd a = op_annihilation(h);

    Eigen::MatrixXcd ham = p.detuning * (a.adjoint() * a);
    for (int j = 0; j < h.n_atoms; ++j) {
        const Eigen::MatrixXcd sm = op_sigma_minus(h, j);
        ham += 0.5 * p.rabi * (a.adjoint() * sm + a * sm.adjoint());
    }

    SparseCd l = superop_sandwich(cplx(0.0, -1.0) * ham, eye) +
                 superop_sandwich(eye, cplx(0.0, 1.0) * ham);

    auto dissipator = [&](const Eigen::MatrixXcd& c, double rate) {
        if (rate <= 0.0) return;
        const Eigen::MatrixXcd cd = c.adjoint();
        const Eigen::MatrixXcd cdc = cd * c;
        l = l + rate * (superop_sandwich(c, cd) -
                        0.5 * superop_sandwich(cdc, eye) -
                        0.5 * superop_sandwich(eye, cdc));
    };

    dissipator(a, p.kappa);
    for (int j = 0; j < h.n_atoms; ++j) {
        const Eigen::MatrixXcd sm = op_sigma_minus(h, j);
        dissipator(sm, p.gamma);
        dissipator(sm.adjoint(), p.pump);
        dissipator(op_sigma_z(h, j), 0.5 * p.t2_inv);
    }
    l.makeCompressed();
    return l;
}

void DensityMatrix::check_valid() const {
    const Eigen::MatrixXcd herm_gap = rho - rho.adjoint();
    if (herm_gap.cwiseAbs().maxCoeff() > 1e-12)
        throw SolverError("density matrix hermiticity violated: " +
                          g17(herm_gap.cwiseAbs().maxCoeff()));
    const double tr_gap = std::abs(rho.trace() - cplx(1.0, 0.0));
    if (tr_gap > 1e-10)
        throw SolverError("density matrix trace off unity by " + g17(tr_gap));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw SolverError("density matrix eigenvalue " +
                          g17(es.eigenvalues().minCoeff()) + " below -1e-10");
}

namespace {

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int d) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

OracleMoments take_moments(const HilbertSpec& h, const Eigen::MatrixXcd& rho) {
    const Eigen::MatrixXcd a = op_annihilation(h);
    const Eigen::MatrixXcd s1 = op_sigma_minus(h, 0);
    OracleMoments m;
    m.photons = ((a.adjoint() * a * rho).trace()).real();
    m.inversion = ((op_sigma_z(h, 0) * rho).trace()).real();
    m.coherence = (a.adjoint() * s1 * rho).trace();
    if (h.n_atoms >= 2) {
        const Eigen::MatrixXcd s2 = op_sigma_minus(h, 1);
        m.spin_spin = ((s1.adjoint() * s2 * rho).trace()).real();
    }
    return m;
}

double moment_gap(const OracleMoments& x, const OracleMoments& y) {
    auto gap = [](double a, double b) {
        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    };
    double worst = gap(x.inversion, y.inversion);
    worst = std::max(worst, gap(x.photons, y.photons));
    worst = std::max(worst, gap(x.spin_spin, y.spin_spin));
    worst = std::max(worst, gap(x.coherence.real(), y.coherence.real()));
    worst = std::max(worst, gap(x.coherence.imag(), y.coherence.imag()));
    return worst;
}

// Smallest positive dissipative rate; sets the shift for inverse iteration.
double min_rate(const SystemParams& p) {
    double r = std::min(p.gamma, p.kappa);
    if (p.pump > 0.0) r = std::min(r, p.pump);
    if (p.t2_inv > 0.0) r = std::min(r, p.t2_inv);
    return r;
}

Eigen::MatrixXcd steady_shift_invert(const SparseCd& l, const SystemParams& p, int d) {
    const double scale = one_norm(l);
    SparseCd shifted = l;
    const double sigma = 0.01 * min_rate(p);
    for (int i = 0; i < d * d; ++i) shifted.coeffRef(i, i) -= sigma;
    shifted.makeCompressed();
    Eigen::SparseLU<SparseCd> lu(shifted);
    if (lu.info() != Eigen::Success)
        throw SolverError("shift-inverted Liouvillian factorization failed");

    Eigen::VectorXcd v(d * d);
    v.setZero();
    for (int i = 0; i < d; ++i) v(i + d * i) = 1.0 / d;  // vec(I)/d seed
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXcd next = lu.solve(v);
        v = next / next.norm();
        if ((l * v).norm() <= 1e-13 * scale) {
            // Fix the arbitrary complex phase by normalizing the trace.
            cplx tr = 0.0;
            for (int i = 0; i < d; ++i) tr += v(i + d * i);
            if (std::abs(tr) < 1e-12)
                throw SolverError("null vector carries no trace; not a state");
            Eigen::MatrixXcd rho = unvec(v, d) / tr;
            return 0.5 * (rho + rho.adjoint().eval());
        }
    }
    throw SolverError("inverse iteration for the steady state did not converge");
}

Eigen::MatrixXcd steady_trace_solve(const SparseCd& l, int d) {
    const double scale = one_norm(l);
    std::vector<Triplet> trip;
    trip.reserve(l.nonZeros() + d);
    for (int c = 0; c < l.outerSize(); ++c)
        for (SparseCd::InnerIterator it(l, c); it; ++it)
            if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    // Row 0 swapped for the trace constraint sum_i rho_ii = 1.
    for (int i = 0; i < d; ++i) trip.emplace_back(0, i + d * i, cplx(1.0, 0.0));
    SparseCd m(d * d, d * d);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();

    Eigen::SparseLU<SparseCd> lu(m);
    if (lu.info() != Eigen::Success)
        throw SolverError("trace-constrained Liouvillian factorization failed; "
                          "the dropped row was not redundant");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    rhs(0) = 1.0;
    const Eigen::VectorXcd x = lu.solve(rhs);
    const double res = (l * x).lpNorm<Eigen::Infinity>();
    if (res > 1e-9 * scale * x.lpNorm<Eigen::Infinity>())
        throw SolverError("trace-constrained solve residual " + g17(res) +
                          " too large");
    Eigen::MatrixXcd rho = unvec(x, d);
    return 0.5 * (rho + rho.adjoint().eval());
}

double top_fock_population(const HilbertSpec& h, const Eigen::MatrixXcd& rho) {
    double pop = 0.0;
    for (int s = 0; s < (1 << h.n_atoms); ++s) {
        const int k = ket_index(h, h.n_max, s);
        pop += rho(k, k).real();
    }
    return pop;
}

}  // namespace

OracleSteady steady_oracle(HilbertSpec h, const SystemParams& p) {
    h.validate();
    p.validate();
    for (;;) {
        const SparseCd l = build_liouvillian(h, p);
        const int d = h.dim();
        const Eigen::MatrixXcd rho_a = steady_shift_invert(l, p, d);
        const Eigen::MatrixXcd rho_b = steady_trace_solve(l, d);

        const OracleMoments ma = take_moments(h, rho_a);
        const OracleMoments mb = take_moments(h, rho_b);
        const double gap = moment_gap(ma, mb);
        if (gap > 1e-8)
            throw SolverError("steady-state solvers disagree by " + g17(gap));

        OracleSteady out;
        out.rho.rho = 0.5 * (rho_a + rho_b);
        out.rho.check_valid();
        out.moments = take_moments(h, out.rho.rho);
        out.spec_used = h;
        out.method_disagreement = gap;

        if (top_fock_population(h, out.rho.rho) < 1e-8) return out;
        HilbertSpec grown = h;
        grown.n_max += 2;
        if (grown.dim() > kMaxHilbertDim)
            throw SizeError("top Fock level still holds " +
                            g17(top_fock_population(h, out.rho.rho)) +
                            " population at the dimension cap; photon space "
                            "cannot grow past n_max = " + std::to_string(h.n_max));
        h = grown;
    }
}

namespace {

// Conserved grading: photons plus excited atoms. The Liouvillian couples
// only density-matrix elements with equal (q_row - q_col), and the field
// correlation lives entirely in the -1 sector.
int charge(const HilbertSpec& h, int ket) {
    const int fock = ket % (h.n_max + 1);
    const int spins = ket / (h.n_max + 1);
    return fock + std::popcount(static_cast<unsigned>(spins));
}

struct Sector {
    std::vector<int> global;            // vec indices in the sector
    std::vector<int> local;             // dense map, -1 outside
};

Sector coherence_sector(const HilbertSpec& h) {
    const int d = h.dim();
    Sector sec;
    sec.local.assign(d * d, -1);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (charge(h, i) - charge(h, j) == -1) {
                sec.local[i + d * j] = static_cast<int>(sec.global.size());
                sec.global.push_back(i + d * j);
            }
    return sec;
}

}  // namespace

OracleSpectrum spectrum_oracle(HilbertSpec h, const SystemParams& p,
                               std::span<const double> omega,
                               const std::optional<DensityMatrix>& rho0) {
    h.validate();
    p.validate();
    Eigen::MatrixXcd rho;
    if (rho0) {
        rho0->check_valid();
        if (rho0->rho.rows() != h.dim())
            throw DomainError("explicit density matrix does not match the "
                              "Hilbert space dimension");
        rho = rho0->rho;
    } else {
        OracleSteady ss = steady_oracle(h, p);
        h = ss.spec_used;
        rho = ss.rho.rho;
    }

    const SparseCd l = build_liouvillian(h, p);
    const int d = h.dim();
    const double scale = one_norm(l);
    const Sector sec = coherence_sector(h);
    const int ns = static_cast<int>(sec.global.size());
    if (ns == 0) throw DomainError("coherence sector is empty");

    Eigen::MatrixXcd l_sec = Eigen::MatrixXcd::Zero(ns, ns);
    for (int c = 0; c < ns; ++c) {
        const int gc = sec.global[c];
        for (SparseCd::InnerIterator it(l, gc); it; ++it) {
            const int lr = sec.local[it.row()];
            if (lr >= 0) {
                l_sec(lr, c) = it.value();
            } else if (std::abs(it.value()) > 1e-10 * scale) {
                throw SolverError("Liouvillian leaks out of the coherence sector");
            }
        }
    }

    const Eigen::MatrixXcd a = op_annihilation(h);
    const Eigen::MatrixXcd a_rho = a * rho;
    Eigen::VectorXcd v0(ns), w(ns);
    for (int k = 0; k < ns; ++k) {
        const int g = sec.global[k];
        v0(k) = a_rho(g % d, g / d);
        w(k) = a(g % d, g / d);
    }
    // States off the excitation grading would leave correlation mass outside
    // the sector; refuse rather than silently dropping it.
    const double mass_total = a_rho.squaredNorm();
    if (mass_total - v0.squaredNorm() > 1e-12 * std::max(mass_total, 1e-300))
        throw DomainError("initial field correlation has weight outside the "
                          "coherence sector");

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(l_sec);
    if (ces.info() != Eigen::Success)
        throw SolverError("coherence-sector eigendecomposition failed");
    const Eigen::VectorXcd alpha = ces.eigenvectors().lu().solve(v0);
    const Eigen::VectorXcd wv = ces.eigenvectors().adjoint() * w;

    OracleSpectrum out;
    double total = 0.0;
    for (int m = 0; m < ns; ++m) {
        const cplx res = std::conj(wv(m)) * alpha(m);
        total += std::abs(res);
        out.modes.push_back({ces.eigenvalues()(m), res});
    }
    if (total <= 0.0)
        throw DomainError("field correlation vanishes at this operating point");
    std::erase_if(out.modes, [total](const OracleMode& m) {
        return std::abs(m.residue) < 1e-14 * total;
    });
    std::sort(out.modes.begin(), out.modes.end(), [](const auto& x, const auto& y) {
        return std::abs(x.residue) > std::abs(y.residue);
    });
    for (const OracleMode& m : out.modes) out.photons += m.residue.real();

    auto s_of = [&](double om) {
        double acc = 0.0;
        for (const OracleMode& m : out.modes)
            acc += 2.0 * (m.residue / (cplx(0.0, om) - m.pole)).real();
        return acc;
    };

    // Peak search on a window covering every pole, then golden-section
    // refinement and bisected half-maximum crossings.
    double im_lo = 0.0, im_hi = 0.0, re_max = 0.0;
    for (const OracleMode& m : out.modes) {
        im_lo = std::min(im_lo, m.pole.imag());
        im_hi = std::max(im_hi, m.pole.imag());
        re_max = std::max(re_max, std::abs(m.pole.real()));
    }
    const double pad = 5.0 * std::max(re_max, 1e-30);
    const double lo = im_lo - pad, hi = im_hi + pad;
    const int coarse = 8001;
    double best_om = lo, best_s = s_of(lo);
    const double step = (hi - lo) / (coarse - 1);
    for (int i = 1; i < coarse; ++i) {
        const double om = lo + step * i;
        const double v = s_of(om);
        if (v > best_s) {
            best_s = v;
            best_om = om;
        }
    }
    {
        double a_b = best_om - step, b_b = best_om + step;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b_b - gr * (b_b - a_b), x2 = a_b + gr * (b_b - a_b);
        double f1 = s_of(x1), f2 = s_of(x2);
        for (int i = 0; i < 200 && (b_b - a_b) > 1e-13 * std::max(std::abs(a_b), step);
             ++i) {
            if (f1 < f2) {
                a_b = x1; x1 = x2; f1 = f2;
                x2 = a_b + gr * (b_b - a_b); f2 = s_of(x2);
            } else {
                b_b = x2; x2 = x1; f2 = f1;
                x1 = b_b - gr * (b_b - a_b); f1 = s_of(x1);
            }
        }
        best_om = 0.5 * (a_b + b_b);
        best_s = s_of(best_om);
    }

    const double half = 0.5 * best_s;
    auto crossing = [&](double dir) {
        double inside = best_om, outside = best_om + dir * step;
        int guard = 0;
        while (s_of(outside) > half) {
            inside = outside;
            outside += dir * std::max(step, std::abs(outside - best_om));
            if (++guard > 200)
                throw SolverError("no half-maximum crossing found");
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (inside + outside);
            if (s_of(mid) > half) inside = mid; else outside = mid;
            if (std::abs(outside - inside) <=
                1e-12 * std::max({std::abs(inside), std::abs(outside), step}))
                break;
        }
        return 0.5 * (inside + outside);
    };
    out.center_offset = best_om;
    out.linewidth_fwhm = crossing(+1.0) - crossing(-1.0);

    out.s.reserve(omega.size());
    for (double om : omega) out.s.push_back(s_of(om));
    return out;
}

std::vector<ErrorReportRow> cumulant_error_report(HilbertSpec h, const SystemParams& p) {
    h.validate();
    p.validate();
    if (static_cast<double>(h.n_atoms) != p.n_atoms)
        throw DomainError("error report needs matching atom numbers; set "
                          "p.n_atoms to the oracle size");

    const OracleSteady os = steady_oracle(h, p);
    const SteadyReport cs = steady_exact(p);

    // Moments are O(1) at desk scales, so anything below the floor is
    // null-space solver noise; the floor keeps identically-vanishing
    // quantities (photons at rabi = 0) from comparing noise against noise.
    auto rel = [](double o, double c) {
        return std::abs(o - c) / std::max({std::abs(o), std::abs(c), 1e-6});
    };
    std::vector<ErrorReportRow> rows;
    auto add = [&](const char* name, double o, double c) {
        rows.push_back({name, o, c, rel(o, c)});
    };
    add("inversion", os.moments.inversion, cs.state.inversion);
    add("coherence_im", os.moments.coherence.imag(), cs.state.coherence_im);
    if (h.n_atoms >= 2) add("spin_spin", os.moments.spin_spin, cs.state.spin_spin);
    add("photons", os.moments.photons, cs.state.photons);
    // No photons, no emission line; the linewidth row only exists when the
    // field correlation carries mass.
    if (os.moments.photons > 1e-12) {
        const OracleSpectrum osp = spectrum_oracle(os.spec_used, p, {});
        const SpectrumResult csp = linewidth(build_qrt(p, cs.state));
        add("linewidth_fwhm", osp.linewidth_fwhm, csp.linewidth_fwhm);
    }
    return rows;
}

void write_error_report_csv(std::ostream& os, std::span<const ErrorReportRow> rows) {
    os << "quantity,oracle,cumulant,rel_error\n";
    for (const ErrorReportRow& r : rows)
        os << r.quantity << ',' << g17(r.oracle_value) << ',' << g17(r.cumulant_value)
           << ',' << g17(r.rel_error) << '\n';
}

}  // namespace srlaser
