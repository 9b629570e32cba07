#pragma once

namespace pubbias {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, computed as erfc(-x/sqrt(2))/2. glibc's erfc is
/// accurate to within a couple of ulps, which keeps the absolute error
/// below 1e-16 everywhere and the relative error of the lower tail below
/// 1e-14 on |x| <= 8.
double norm_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double norm_sf(double x);

/// log(1 - Phi(x)); stays finite far into the upper tail.
double norm_logsf(double x);

/// Inverse CDF. Acklam's rational approximation followed by one Halley
/// step against norm_cdf/norm_sf. Throws DomainError unless 0 < p < 1.
double norm_quantile(double p);

/// E[X | X > cutoff] for X ~ Normal(0, sd^2). Throws DomainError if sd <= 0.
double truncated_normal_mean(double cutoff, double sd);

}  // namespace pubbias
