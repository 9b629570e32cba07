#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "pubbias/quadrature.hpp"
#include "pubbias/rng.hpp"
#include "pubbias/types.hpp"

namespace pubbias {

/// theta ~ Normal(0, sigma_theta^2). sigma_theta == 0 is the point mass at 0.
struct NormalZeroMean {
    double sigma_theta = 0.0;
};

/// Point-mass mixture: mass pi0 exactly at 0, the rest exponential with mean
/// lambda on theta > 0.
struct PointMassMixture {
    double pi0 = 0.5;
    double lambda = 1.0;
};

/// theta = scale * T where T is Student t with dof degrees of freedom.
struct ScaledStudentT {
    double scale = 1.0;
    double dof = 5.0;
};

using PriorSpec = std::variant<NormalZeroMean, PointMassMixture, ScaledStudentT>;

/// Publication rule. Signed publishes iff t > cutoff, Absolute iff |t| > cutoff.
/// base_prob scales the acceptance probability uniformly; it cancels from every
/// conditional-on-publication quantity and only matters for simulated counts.
struct PublicationRule {
    Side side = Side::Signed;
    double cutoff = 2.0;
    double base_prob = 1.0;

    bool passes(double t) const { return side == Side::Signed ? t > cutoff : (t > cutoff || t < -cutoff); }
    void validate() const;
};

inline PublicationRule signed_threshold(double cutoff) { return {Side::Signed, cutoff, 1.0}; }
inline PublicationRule absolute_threshold(double cutoff) { return {Side::Absolute, cutoff, 1.0}; }

struct ModelSpec {
    PriorSpec prior;
    PublicationRule rule;

    void validate() const;
};

void validate(const PriorSpec& prior);
bool is_symmetric(const PriorSpec& prior);
std::string describe(const PriorSpec& prior);

/// Weight of the atom at theta = 0 (1 for the degenerate normal, pi0 for the
/// mixture, 0 otherwise).
double atom_weight(const PriorSpec& prior);

/// Density of the continuous part plus the atom weight at theta. The atom is
/// only reported when theta == 0.
struct DensityValue {
    double density = 0.0;
    double atom = 0.0;
};
DensityValue prior_density(const PriorSpec& prior, double theta);

double draw_prior(const PriorSpec& prior, RngStream& rng);
std::vector<double> prior_sample(const PriorSpec& prior, RngStream& rng, std::size_t n);

/// Integral of h against the prior restricted to theta in [lo, hi]: the
/// continuous part by quadrature, plus atom_weight * h(0) when 0 lies in the
/// window. Breakpoints mark kinks or steep regions of h.
double prior_expectation(const PriorSpec& prior, const std::function<double(double)>& h,
                         double lo, double hi, const std::vector<double>& breakpoints,
                         const QuadratureSpec& spec = {});
/// Same, but only over the continuous part (no atom term).
double prior_continuous_integral(const PriorSpec& prior, const std::function<double(double)>& h,
                                 double lo, double hi, const std::vector<double>& breakpoints,
                                 const QuadratureSpec& spec = {});

/// Density of t = theta + Z, Z ~ N(0,1).
double marginal_t_density(const PriorSpec& prior, double t, const QuadratureSpec& spec = {});

/// Pr(t > cutoff) or Pr(|t| > cutoff) under the marginal.
double marginal_t_exceedance(const PriorSpec& prior, double cutoff, Side side,
                             const QuadratureSpec& spec = {});

}  // namespace pubbias
