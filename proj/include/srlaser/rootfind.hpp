#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace srlaser::detail {

// Brent-Dekker root refinement on a bracketing interval [a, b] with
// f(a) f(b) <= 0. Returns the root to absolute tolerance tol_abs.
double brent(const std::function<double(double)>& f, double a, double b,
             double fa, double fb, double tol_abs);

// Uniform scan of [lo, hi] into n subintervals; every sign change or exact
// zero is refined with brent. Roots closer than merge_tol are deduplicated.
std::vector<double> scan_roots(const std::function<double(double)>& f, double lo,
                               double hi, int n, double tol_abs, double merge_tol);

// Bisection on a sign change of f over [lo, hi] to relative tolerance rel.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double flo, double rel);

}  // namespace srlaser::detail
