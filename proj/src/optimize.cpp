#include "pubbias/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "pubbias/errors.hpp"

namespace pubbias {

namespace {

constexpr int kPrescanPoints = 50;
constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2

// Brent's minimizer on -f over [a, b].
ScalarMax brent_max(const std::function<double(double)>& f, double a, double b, double tol) {
    double x = a + kGolden * (b - a);
    double w = x, v = x;
    double fx = -f(x);
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (a + b);
        const double tol1 = 0.5 * tol + 1e-12 * std::abs(x);
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;

        bool golden = true;
        if (std::abs(e) > tol1) {
            // Parabolic step through x, w, v.
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (mid > x) ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = (x >= mid) ? a - x : b - x;
            d = kGolden * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = -f(u);
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, -fx};
}

}  // namespace

ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(lo < hi)) throw DomainError("maximize_scalar: need lo < hi");
    if (!(tol > 0.0)) throw DomainError("maximize_scalar: tol must be positive");

    const double step = (hi - lo) / (kPrescanPoints - 1);
    int best = 0;
    double best_value = f(lo);
    for (int i = 1; i < kPrescanPoints; ++i) {
        const double x = (i == kPrescanPoints - 1) ? hi : lo + i * step;
        const double value = f(x);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = std::min(lo + (best + 1) * step, hi);
    ScalarMax result = brent_max(f, a, b, tol);

    const double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo > result.value && f_lo >= f_hi) return {lo, f_lo};
    if (f_hi > result.value) return {hi, f_hi};
    return result;
}

}  // namespace pubbias
