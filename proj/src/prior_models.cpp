#include "pubbias/prior_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pubbias/errors.hpp"
#include "pubbias/normal.hpp"

namespace pubbias {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double student_log_norm(double dof) {
    return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi);
}

double student_density(const ScaledStudentT& p, double theta) {
    const double x = theta / p.scale;
    return std::exp(student_log_norm(p.dof) - 0.5 * (p.dof + 1.0) * std::log1p(x * x / p.dof)) / p.scale;
}

// Integrates h * density over [lo, hi] in pieces split at the breakpoints.
double integrate_pieces(const std::function<double(double)>& g, double lo, double hi,
                        std::vector<double> breaks, const QuadratureSpec& spec) {
    if (!(lo < hi)) return 0.0;
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [&](double b) { return !(b > lo && b < hi); }),
                 breaks.end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double total = 0.0;
    double left = lo;
    for (double b : breaks) {
        total += integrate_1d(g, left, b, spec);
        left = b;
    }
    total += integrate_1d(g, left, hi, spec);
    return total;
}

}  // namespace

void PublicationRule::validate() const {
    if (!std::isfinite(cutoff)) throw DomainError("publication cutoff must be finite");
    if (!(base_prob > 0.0 && base_prob <= 1.0)) throw DomainError("base_prob must lie in (0, 1]");
}

void validate(const PriorSpec& prior) {
    std::visit(overloaded{
                   [](const NormalZeroMean& p) {
                       if (!(p.sigma_theta >= 0.0) || !std::isfinite(p.sigma_theta))
                           throw DomainError("sigma_theta must be finite and >= 0");
                   },
                   [](const PointMassMixture& p) {
                       if (!(p.pi0 >= 0.0 && p.pi0 <= 1.0)) throw DomainError("pi0 must lie in [0, 1]");
                       if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
                           throw DomainError("lambda must be finite and > 0");
                   },
                   [](const ScaledStudentT& p) {
                       if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw DomainError("scale must be > 0");
                       if (!(p.dof > 2.0) || !std::isfinite(p.dof)) throw DomainError("dof must be > 2");
                   },
               },
               prior);
}

void ModelSpec::validate() const {
    pubbias::validate(prior);
    rule.validate();
}

bool is_symmetric(const PriorSpec& prior) { return !std::holds_alternative<PointMassMixture>(prior); }

std::string describe(const PriorSpec& prior) {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const NormalZeroMean& p) { os << "normal(sigma_theta=" << p.sigma_theta << ")"; },
                   [&](const PointMassMixture& p) {
                       os << "mixture(pi0=" << p.pi0 << ",lambda=" << p.lambda << ")";
                   },
                   [&](const ScaledStudentT& p) {
                       os << "student_t(scale=" << p.scale << ",dof=" << p.dof << ")";
                   },
               },
               prior);
    return os.str();
}

double atom_weight(const PriorSpec& prior) {
    if (auto* n = std::get_if<NormalZeroMean>(&prior)) return n->sigma_theta == 0.0 ? 1.0 : 0.0;
    if (auto* m = std::get_if<PointMassMixture>(&prior)) return m->pi0;
    return 0.0;
}

DensityValue prior_density(const PriorSpec& prior, double theta) {
    DensityValue out;
    if (theta == 0.0) out.atom = atom_weight(prior);
    std::visit(overloaded{
                   [&](const NormalZeroMean& p) {
                       if (p.sigma_theta > 0.0) out.density = norm_pdf(theta / p.sigma_theta) / p.sigma_theta;
                   },
                   [&](const PointMassMixture& p) {
                       if (theta > 0.0) out.density = (1.0 - p.pi0) * std::exp(-theta / p.lambda) / p.lambda;
                   },
                   [&](const ScaledStudentT& p) { out.density = student_density(p, theta); },
               },
               prior);
    return out;
}

double draw_prior(const PriorSpec& prior, RngStream& rng) {
    return std::visit(overloaded{
                          [&](const NormalZeroMean& p) {
                              // Always consume a normal so streams stay aligned across sigma.
                              const double z = rng.normal();
                              return p.sigma_theta == 0.0 ? 0.0 : p.sigma_theta * z;
                          },
                          [&](const PointMassMixture& p) {
                              const double u = rng.uniform();
                              const double e = rng.exponential();
                              return u < p.pi0 ? 0.0 : p.lambda * e;
                          },
                          [&](const ScaledStudentT& p) {
                              const double z = rng.normal();
                              const double chi2 = 2.0 * rng.gamma(0.5 * p.dof);
                              return p.scale * z / std::sqrt(chi2 / p.dof);
                          },
                      },
                      prior);
}

std::vector<double> prior_sample(const PriorSpec& prior, RngStream& rng, std::size_t n) {
    if (n < 1) throw DomainError("prior_sample: n must be >= 1");
    validate(prior);
    std::vector<double> out(n);
    for (auto& x : out) x = draw_prior(prior, rng);
    return out;
}

double prior_continuous_integral(const PriorSpec& prior, const std::function<double(double)>& h,
                                 double lo, double hi, const std::vector<double>& breakpoints,
                                 const QuadratureSpec& spec) {
    return std::visit(
        overloaded{
            [&](const NormalZeroMean& p) -> double {
                if (p.sigma_theta == 0.0) return 0.0;
                const double s = p.sigma_theta;
                const double a = std::max(lo, -spec.domain_clip * s);
                const double b = std::min(hi, spec.domain_clip * s);
                auto g = [&](double th) { return norm_pdf(th / s) / s * h(th); };
                return integrate_pieces(g, a, b, breakpoints, spec);
            },
            [&](const PointMassMixture& p) -> double {
                if (p.pi0 == 1.0) return 0.0;
                // Exponential tail beyond clip^2/2 means has mass exp(-72) at the
                // default clip, matching the normal tail at 12 sd.
                const double a = std::max(lo, 0.0);
                const double b = std::min(hi, 0.5 * spec.domain_clip * spec.domain_clip * p.lambda);
                const double w = (1.0 - p.pi0) / p.lambda;
                auto g = [&](double th) { return w * std::exp(-th / p.lambda) * h(th); };
                return integrate_pieces(g, a, b, breakpoints, spec);
            },
            [&](const ScaledStudentT& p) -> double {
                // theta = scale * tan(u) maps the heavy tails onto a finite interval.
                const double a = std::atan(std::max(lo, -1e300) / p.scale);
                const double b = std::atan(std::min(hi, 1e300) / p.scale);
                std::vector<double> ubreaks;
                ubreaks.reserve(breakpoints.size());
                for (double br : breakpoints) ubreaks.push_back(std::atan(br / p.scale));
                auto g = [&](double u) {
                    const double c = std::cos(u);
                    const double th = p.scale * std::tan(u);
                    return student_density(p, th) * h(th) * p.scale / (c * c);
                };
                return integrate_pieces(g, a, b, ubreaks, spec);
            },
        },
        prior);
}

double prior_expectation(const PriorSpec& prior, const std::function<double(double)>& h, double lo,
                         double hi, const std::vector<double>& breakpoints, const QuadratureSpec& spec) {
    double total = prior_continuous_integral(prior, h, lo, hi, breakpoints, spec);
    const double atom = atom_weight(prior);
    if (atom > 0.0 && lo <= 0.0 && 0.0 <= hi) total += atom * h(0.0);
    return total;
}

double marginal_t_density(const PriorSpec& prior, double t, const QuadratureSpec& spec) {
    validate(prior);
    if (auto* n = std::get_if<NormalZeroMean>(&prior)) {
        const double s = std::sqrt(1.0 + n->sigma_theta * n->sigma_theta);
        return norm_pdf(t / s) / s;
    }
    // Only theta within clip of t contributes through the N(0,1) kernel.
    const double clip = spec.domain_clip;
    auto kernel = [t](double th) { return norm_pdf(t - th); };
    return prior_expectation(prior, kernel, t - clip, t + clip, {t, 0.0}, spec);
}

double marginal_t_exceedance(const PriorSpec& prior, double cutoff, Side side, const QuadratureSpec& spec) {
    validate(prior);
    if (auto* n = std::get_if<NormalZeroMean>(&prior)) {
        const double s = std::sqrt(1.0 + n->sigma_theta * n->sigma_theta);
        const double upper = norm_sf(cutoff / s);
        if (side == Side::Signed) return upper;
        return cutoff <= 0.0 ? 1.0 : 2.0 * upper;
    }
    const double inf = std::numeric_limits<double>::infinity();
    if (side == Side::Signed) {
        return prior_expectation(prior, [cutoff](double th) { return norm_sf(cutoff - th); }, -inf, inf,
                                 {cutoff, 0.0}, spec);
    }
    if (cutoff <= 0.0) return 1.0;
    return prior_expectation(
        prior, [cutoff](double th) { return norm_sf(cutoff - th) + norm_cdf(-cutoff - th); }, -inf, inf,
        {cutoff, -cutoff, 0.0}, spec);
}

}  // namespace pubbias
