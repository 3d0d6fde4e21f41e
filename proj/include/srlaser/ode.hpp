#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace srlaser::detail {

// Embedded Dormand-Prince 5(4) pair with a PI step-size controller and FSAL.
// Dim is the state dimension; Rhs is f(t, x, dx); Observer is called after
// every accepted step as obs(t, x, f) and may return false to stop early.

template <int Dim>
using OdeVec = std::array<double, Dim>;

enum class OdeStatus { reached_end, stopped_by_observer, step_limit, step_underflow };

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    OdeStatus status = OdeStatus::reached_end;
    double t = 0.0;
    int blame = -1;  // index of the error-dominating component on failure
};

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
};

template <int Dim, class Rhs, class Observer>
OdeStats dopri5(Rhs&& f, OdeVec<Dim>& x, double t0, double t1,
                const OdeOptions& opt, Observer&& obs) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b_hat: difference between the 5th and embedded 4th order weights.
    constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                     e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                     e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    OdeStats st;
    st.t = t0;
    if (t1 <= t0) return st;

    OdeVec<Dim> k1, k2, k3, k4, k5, k6, k7, xt, xn, err;
    double t = t0;
    f(t, x, k1);

    // Initial step from the crude ratio of state to derivative scales.
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (int i = 0; i < Dim; ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::abs(x[i]);
            d0 = std::max(d0, std::abs(x[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        h = (d1 > 0.0) ? 0.01 * std::max(d0, 1.0) / d1 : 1e-6 * (t1 - t0);
        h = std::min({h, t1 - t0, opt.max_step});
        if (!(h > 0.0)) h = std::min(t1 - t0, opt.max_step);
    }

    double err_prev = 1.0;
    while (t < t1) {
        if (st.accepted + st.rejected >= opt.max_steps) {
            st.status = OdeStatus::step_limit;
            st.t = t;
            return st;
        }
        if (t + h > t1) h = t1 - t;
        const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                               std::max(std::abs(t), std::abs(t1));
        if (h < h_floor) {
            st.status = OdeStatus::step_underflow;
            st.t = t;
            return st;
        }

        for (int i = 0; i < Dim; ++i) xt[i] = x[i] + h * a21 * k1[i];
        f(t + c2 * h, xt, k2);
        for (int i = 0; i < Dim; ++i) xt[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, xt, k3);
        for (int i = 0; i < Dim; ++i)
            xt[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, xt, k4);
        for (int i = 0; i < Dim; ++i)
            xt[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, xt, k5);
        for (int i = 0; i < Dim; ++i)
            xt[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                a64 * k4[i] + a65 * k5[i]);
        f(t + h, xt, k6);
        for (int i = 0; i < Dim; ++i)
            xn[i] = x[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                b5 * k5[i] + b6 * k6[i]);
        f(t + h, xn, k7);
        for (int i = 0; i < Dim; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);

        // Non-finite trial values count as infinite error so the controller
        // backs off instead of accepting garbage.
        double err_norm = 0.0;
        int blame = 0;
        for (int i = 0; i < Dim; ++i) {
            if (!std::isfinite(xn[i]) || !std::isfinite(err[i])) {
                err_norm = std::numeric_limits<double>::infinity();
                blame = i;
                break;
            }
            const double sc = opt.abs_tol +
                              opt.rel_tol * std::max(std::abs(x[i]), std::abs(xn[i]));
            const double r = std::abs(err[i]) / sc;
            if (r > err_norm) {
                err_norm = r;
                blame = i;
            }
        }
        st.blame = blame;

        if (err_norm <= 1.0) {
            t += h;
            x = xn;
            k1 = k7;  // FSAL
            ++st.accepted;
            if (!obs(t, x, k1)) {
                st.status = OdeStatus::stopped_by_observer;
                st.t = t;
                return st;
            }
            const double e = std::max(err_norm, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::min(5.0, std::max(0.2, fac));
            h = std::min(h * fac, opt.max_step);
            err_prev = e;
        } else {
            ++st.rejected;
            const double fac = std::max(0.2, 0.9 * std::pow(err_norm, -0.2));
            h *= fac;
        }
    }
    st.status = OdeStatus::reached_end;
    st.t = t;
    return st;
}

}  // namespace srlaser::detail
