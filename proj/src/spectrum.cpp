#include "srlaser/spectrum.hpp"

#include <cmath>
#include <ostream>

#include "srlaser/errors.hpp"
#include "srlaser/format.hpp"
#include "srlaser/steady.hpp"

namespace srlaser {

namespace {

using cplx = std::complex<double>;

// Fraction of the total residue below which a pole is treated as dark when
// deciding which eigenvalue is the physical line.
constexpr double kDarkPole = 1e-12;

}  // namespace

QrtSystem build_qrt(const SystemParams& p, const CumulantState& steady) {
    p.validate();
    QrtSystem q;
    const double gp = gamma_perp(p);
    q.m(0, 0) = cplx(-0.5 * p.kappa, p.detuning);
    q.m(0, 1) = cplx(0.0, 0.5 * p.n_atoms * p.rabi);
    q.m(1, 0) = cplx(0.0, -0.5 * p.rabi * steady.inversion);
    q.m(1, 1) = cplx(-0.5 * gp, 0.0);
    q.initial(0) = cplx(steady.photons, 0.0);
    q.initial(1) = std::conj(cplx(steady.coherence_re, steady.coherence_im));
    return q;
}

SpectrumResult linewidth(const QrtSystem& q) {
    SpectrumResult r;
    const cplx tr = q.m(0, 0) + q.m(1, 1);
    const cplx det = q.m(0, 0) * q.m(1, 1) - q.m(0, 1) * q.m(1, 0);
    const cplx sq = std::sqrt(tr * tr - 4.0 * det);

    // Larger-magnitude root from the branch avoiding cancellation, companion
    // from the product; the slow pole sits at the difference of two numbers
    // of order kappa and must not be formed by direct subtraction.
    const cplx big = (std::abs(tr + sq) >= std::abs(tr - sq)) ? 0.5 * (tr + sq)
                                                              : 0.5 * (tr - sq);
    cplx small = (std::abs(big) > 0.0) ? det / big : 0.5 * tr;

    r.degenerate = std::abs(sq) <= 1e-8 * std::max(std::abs(big), 1e-300);
    if (r.degenerate) {
        const cplx lam = 0.5 * tr;
        r.eig_slow = r.eig_fast = lam;
        r.weight_slow = q.initial(0);
        r.weight_fast = 0.0;
        r.lin_coeff = (q.m(0, 0) - lam) * q.initial(0) + q.m(0, 1) * q.initial(1);
    } else {
        // Residues from e^{Mt} = sum_m e^{lambda_m t} (M - lambda_other) /
        // (lambda_m - lambda_other); their sum is exactly initial(0).
        auto residue = [&](cplx lam_m, cplx lam_other) {
            const cplx num = (q.m(0, 0) - lam_other) * q.initial(0) +
                             q.m(0, 1) * q.initial(1);
            return num / (lam_m - lam_other);
        };
        cplx w_small = residue(small, big);
        cplx w_big = residue(big, small);
        // The physical line is the pole nearest the axis unless it is dark.
        bool small_is_slow = std::abs(small.real()) <= std::abs(big.real());
        const double total = std::abs(w_small) + std::abs(w_big);
        if (small_is_slow && total > 0.0 && std::abs(w_small) < kDarkPole * total)
            small_is_slow = false;
        if (!small_is_slow && total > 0.0 && std::abs(w_big) < kDarkPole * total)
            small_is_slow = true;
        if (small_is_slow) {
            r.eig_slow = small;
            r.eig_fast = big;
            r.weight_slow = w_small;
            r.weight_fast = w_big;
        } else {
            r.eig_slow = big;
            r.eig_fast = small;
            r.weight_slow = w_big;
            r.weight_fast = w_small;
        }
    }

    r.linewidth_fwhm = -2.0 * r.eig_slow.real();
    r.linewidth_hz = r.linewidth_fwhm / (2.0 * constants::pi);
    r.center_offset = r.eig_slow.imag();
    r.photons = q.initial(0).real();
    return r;
}

SpectrumResult linewidth(const SystemParams& p) {
    return linewidth(build_qrt(p, steady_exact(p).state));
}

std::vector<double> spectrum_samples(const SpectrumResult& r,
                                     std::span<const double> omega) {
    std::vector<double> s;
    s.reserve(omega.size());
    for (double om : omega) {
        const cplx iw(0.0, om);
        cplx acc = r.weight_slow / (iw - r.eig_slow);
        if (r.degenerate) {
            const cplx den = iw - r.eig_slow;
            acc += r.lin_coeff / (den * den);
        } else {
            acc += r.weight_fast / (iw - r.eig_fast);
        }
        s.push_back(2.0 * acc.real());
    }
    return s;
}

std::vector<PullingPoint> pulling_curve(const SystemParams& p,
                                        const CumulantState& steady_zero_detuning,
                                        std::span<const double> detunings) {
    std::vector<PullingPoint> out;
    out.reserve(detunings.size());
    SystemParams pd = p;
    for (double delta : detunings) {
        pd.detuning = delta;
        const SpectrumResult r = linewidth(build_qrt(pd, steady_zero_detuning));
        out.push_back({delta, r.center_offset, r.linewidth_fwhm});
    }
    return out;
}

void write_spectrum_csv(std::ostream& os, const SystemParams& p,
                        const SpectrumResult& r, std::span<const double> omega) {
    const std::vector<double> s = spectrum_samples(r, omega);
    os << "# emission spectrum, omega relative to the atomic transition\n";
    os << "# n_atoms = " << g17(p.n_atoms) << "\n";
    os << "# gamma = " << g17(p.gamma) << "\n";
    os << "# pump = " << g17(p.pump) << "\n";
    os << "# t2_inv = " << g17(p.t2_inv) << "\n";
    os << "# kappa = " << g17(p.kappa) << "\n";
    os << "# rabi = " << g17(p.rabi) << "\n";
    os << "# detuning = " << g17(p.detuning) << "\n";
    os << "# linewidth_fwhm = " << g17(r.linewidth_fwhm) << " s^-1\n";
    os << "# linewidth_hz = " << g17(r.linewidth_hz) << " Hz\n";
    os << "# center_offset = " << g17(r.center_offset) << " s^-1\n";
    os << "# center_offset_hz = " << g17(r.center_offset / (2.0 * constants::pi))
       << " Hz\n";
    os << "# eig_slow = " << g17(r.eig_slow.real()) << " + " << g17(r.eig_slow.imag())
       << "i s^-1\n";
    os << "# eig_fast = " << g17(r.eig_fast.real()) << " + " << g17(r.eig_fast.imag())
       << "i s^-1\n";
    os << "# integral of s over omega = 2 pi photons, photons = " << g17(r.photons)
       << "\n";
    os << "omega_offset_s^-1,spectral_density\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << g17(omega[i]) << ',' << g17(s[i]) << '\n';
}

}  // namespace srlaser
