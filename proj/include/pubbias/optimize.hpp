#pragma once

#include <functional>

namespace pubbias {

struct ScalarMax {
    double argmax;
    double value;
};

/// Maximizes f on [lo, hi]. A 50-point grid pre-scan picks the bracket around
/// the best grid point, then Brent's golden-section/parabolic search refines
/// it to within tol. Endpoints are returned when they win the scan.
ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-6);

}  // namespace pubbias
