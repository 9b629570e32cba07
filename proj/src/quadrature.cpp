#include "pubbias/quadrature.hpp"

#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "pubbias/errors.hpp"

namespace pubbias {

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
    if (max_subdivisions < 10) throw DomainError("max_subdivisions must be at least 10");
    if (!(domain_clip > 0.0)) throw DomainError("domain_clip must be positive");
}

namespace {

// Gauss-Kronrod 7/15 nodes on [-1, 1].
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const ScalarFn& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * wgk[7];
    double gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += wgk[j] * fsum;
        if (j % 2 == 1) gauss += wg[j / 2] * fsum;
    }
    const double value = kronrod * half;
    const double error = std::abs((kronrod - gauss) * half);
    return {lo, hi, value, error};
}

}  // namespace

double integrate_1d(const ScalarFn& f, double lo, double hi, const QuadratureSpec& spec) {
    spec.validate();
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate_1d(f, hi, lo, spec);

    std::priority_queue<Segment> heap;
    Segment first = gk15(f, lo, hi);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);

    int subdivisions = 1;
    while (total_err > spec.abs_tol + spec.rel_tol * std::abs(total)) {
        if (subdivisions >= spec.max_subdivisions) {
            throw NumericError("integrate_1d: no convergence after " + std::to_string(subdivisions) +
                                   " subdivisions (error estimate " + std::to_string(total_err) + ")",
                               total);
        }
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        Segment left = gk15(f, worst.lo, mid);
        Segment right = gk15(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
        // Guard against drift from the running updates.
        if (subdivisions % 32 == 0) {
            std::priority_queue<Segment> copy = heap;
            total = 0.0;
            total_err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    if (!std::isfinite(total)) throw NumericError("integrate_1d: non-finite integrand", total);
    return total;
}

}  // namespace pubbias
