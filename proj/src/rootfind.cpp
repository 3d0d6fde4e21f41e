#include "srlaser/rootfind.hpp"

#include <algorithm>
#include <limits>

#include "srlaser/errors.hpp"

namespace srlaser::detail {

double brent(const std::function<double(double)>& f, double a, double b,
             double fa, double fb, double tol_abs) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw SolverError("brent: interval does not bracket a root");

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();

    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * eps * std::abs(b) + 0.5 * tol_abs;
        const double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;

        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = m; e = m;  // bisection
        } else {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;  // interpolation accepted
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; e = d = b - a; }
    }
    throw SolverError("brent: no convergence in 200 iterations");
}

std::vector<double> scan_roots(const std::function<double(double)>& f, double lo,
                               double hi, int n, double tol_abs, double merge_tol) {
    std::vector<double> roots;
    double x_prev = lo, f_prev = f(lo);
    if (f_prev == 0.0) roots.push_back(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * (static_cast<double>(i) / n);
        const double fx = f(x);
        if (fx == 0.0) {
            roots.push_back(x);
        } else if (f_prev != 0.0 && (f_prev > 0.0) != (fx > 0.0)) {
            roots.push_back(brent(f, x_prev, x, f_prev, fx, tol_abs));
        }
        x_prev = x;
        f_prev = fx;
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [merge_tol](double a, double b) {
                                return std::abs(a - b) <= merge_tol;
                            }),
                roots.end());
    return roots;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double flo, double rel) {
    if (flo == 0.0) return lo;
    for (int iter = 0; iter < 500 && (hi - lo) > rel * std::max(std::abs(hi), 1e-300);
         ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid; flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace srlaser::detail
