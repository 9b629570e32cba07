#pragma once

#include <functional>

namespace pubbias {

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 200;
    // Infinite tails are cut this many standard deviations out.
    double domain_clip = 12.0;

    void validate() const;
};

using ScalarFn = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [lo, hi].
/// Subdivides the interval with the largest error estimate until
/// err <= abs_tol + rel_tol*|result|. Throws NumericError (carrying the best
/// estimate) when max_subdivisions is exhausted first.
double integrate_1d(const ScalarFn& f, double lo, double hi, const QuadratureSpec& spec = {});

}  // namespace pubbias
