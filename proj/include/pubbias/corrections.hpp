#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pubbias/kernels.hpp"
#include "pubbias/prior_models.hpp"
#include "pubbias/quadrature.hpp"

namespace pubbias {

enum class Method { Quadrature, MonteCarlo };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct CorrectionOptions {
    Method method = Method::Quadrature;
    std::uint64_t mc_draws = 1'000'000;
    std::uint64_t seed = 0;
    FalseDefinition false_def = FalseDefinition::NonPositive;
    QuadratureSpec quad;
};

/// A point value with its Monte Carlo standard error (0 for quadrature).
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Posterior mean of theta given t under the normal prior:
/// (1 - 1/(1 + sigma^2)) * t. Publication drops out.
double conditional_mean_theta(double tstat, double sigma_theta);

/// Posterior mean of theta given t for any prior (quadrature; atoms included).
double posterior_mean_theta(const PriorSpec& prior, double tstat, const QuadratureSpec& spec = {});

/// Everything conditional on publication. On the absolute side, findings are
/// reported as |t| and theta, Z are oriented by sign(t).
struct PublicationSummary {
    Estimate pub_prob;
    Estimate mean_t;      // E(t | pub)
    Estimate mean_z;      // E(Z | pub)
    Estimate shrinkage;   // E(Z | pub) / E(t | pub)
    Estimate fdr;         // Pr(false | pub)
    std::uint64_t mc_draws = 0;
};

PublicationSummary publication_summary(const ModelSpec& model, const CorrectionOptions& options = {});

/// Throws DomainError when the rule accepts with probability < 1e-12.
Estimate shrinkage_pub(const ModelSpec& model, const CorrectionOptions& options = {});
Estimate fdr_pub(const ModelSpec& model, const CorrectionOptions& options = {});

/// (pr_exceed_null / pr_exceed_marginal) * pr_theta_nonpos, clamped to [0, 1].
double fdr_upper_bound(double pr_exceed_null, double pr_exceed_marginal, double pr_theta_nonpos);

struct FdrBoundInputs {
    double pr_exceed_null = 0.0;
    double pr_exceed_marginal = 0.0;
    double pr_theta_nonpos = 0.0;
    double bound = 0.0;
};

/// Evaluates the three bound inputs exactly for a model.
FdrBoundInputs fdr_bound_for_model(const ModelSpec& model, const QuadratureSpec& spec = {});

/// 1 - 1/(1 + (vol^2/12) / (n_months * tau^2)) with tau^2 = tau_c^2 + tau_w^2.
double jensen_shrinkage(double tau_c, double tau_w, double vol_annual = 0.10, int n_months = 420);

struct NullExceedanceRow {
    double cutoff = 0.0;
    double percent = 0.0;       // 100 * Pr(exceed) under N(0,1)
    double draws_needed = 0.0;  // 1 / Pr(exceed)
};

std::vector<NullExceedanceRow> null_exceedance_table(const std::vector<double>& cutoffs, Side side);

struct FindingCorrection {
    std::string id;
    double tstat = 0.0;
    double corrected_tstat = 0.0;
};

struct CorrectionReport {
    ModelSpec model;
    Method method = Method::Quadrature;
    double shrinkage_pub = 0.0;
    double shrinkage_se = 0.0;
    double fdr_pub = 0.0;
    double fdr_se = 0.0;
    double pub_prob = 0.0;
    std::optional<FdrBoundInputs> fdr_bound;  // normal prior only
    std::vector<FindingCorrection> per_finding;
    std::optional<std::uint64_t> mc_draws;
    std::optional<std::uint64_t> seed;
};

struct FindingInput {
    std::string id;
    double tstat = 0.0;
};

/// Corrected t-stats use the closed form for the normal prior and the
/// quadrature posterior mean otherwise.
CorrectionReport correction_report(const ModelSpec& model, const std::vector<FindingInput>& findings,
                                   const CorrectionOptions& options = {});

}  // namespace pubbias
