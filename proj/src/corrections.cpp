#include "pubbias/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pubbias/errors.hpp"
#include "pubbias/normal.hpp"

namespace pubbias {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinAcceptance = 1e-12;

// Quadrature route. Every expectation below is over the prior of theta, with
// the N(0,1) sampling error integrated out in closed form.
PublicationSummary summary_quadrature(const ModelSpec& model, const CorrectionOptions& o) {
    const PriorSpec& prior = model.prior;
    const double c = model.rule.cutoff;
    const QuadratureSpec& q = o.quad;
    const std::vector<double> breaks = {c, -c, 0.0};

    double pub = 0.0, ez = 0.0, etheta = 0.0, efalse = 0.0;
    if (model.rule.side == Side::Signed) {
        pub = prior_expectation(prior, [c](double th) { return norm_sf(c - th); }, -kInf, kInf, breaks, q);
        ez = prior_expectation(prior, [c](double th) { return norm_pdf(c - th); }, -kInf, kInf, breaks, q);
        etheta = prior_expectation(prior, [c](double th) { return th * norm_sf(c - th); }, -kInf, kInf,
                                   breaks, q);
        if (o.false_def == FalseDefinition::NonPositive) {
            efalse = prior_expectation(prior, [c](double th) { return norm_sf(c - th); }, -kInf, 0.0, breaks, q);
        } else {
            efalse = atom_weight(prior) * norm_sf(c);
        }
    } else {
        // Findings reported as |t|; theta and Z oriented by sign(t).
        auto upper = [c](double th) { return norm_sf(c - th); };
        auto lower = [c](double th) { return norm_cdf(-c - th); };
        pub = prior_expectation(prior, [&](double th) { return upper(th) + lower(th); }, -kInf, kInf, breaks, q);
        ez = prior_expectation(prior, [c](double th) { return norm_pdf(c - th) + norm_pdf(c + th); }, -kInf,
                               kInf, breaks, q);
        etheta = prior_expectation(prior, [&](double th) { return th * (upper(th) - lower(th)); }, -kInf, kInf,
                                   breaks, q);
        if (o.false_def == FalseDefinition::NonPositive) {
            efalse = prior_expectation(prior, upper, -kInf, 0.0, breaks, q) +
                     prior_expectation(prior, lower, 0.0, kInf, breaks, q);
        } else {
            efalse = atom_weight(prior) * 2.0 * norm_sf(c);
        }
    }
    if (!(pub >= kMinAcceptance)) {
        throw DomainError("publication rule accepts with probability " + std::to_string(pub) +
                          " (< 1e-12); shrinkage and FDR are undefined");
    }
    const double et = etheta + ez;
    PublicationSummary s;
    s.pub_prob = {pub, 0.0};
    s.mean_t = {et / pub, 0.0};
    s.mean_z = {ez / pub, 0.0};
    s.shrinkage = {ez / et, 0.0};
    s.fdr = {std::clamp(efalse / pub, 0.0, 1.0), 0.0};
    return s;
}

PublicationSummary summary_montecarlo(const ModelSpec& model, const CorrectionOptions& o) {
    if (o.mc_draws < 1000) throw DomainError("Monte Carlo needs at least 1000 draws");
    const PublishedMoments m = omp::published_moments(model, o.mc_draws, o.seed, o.false_def);
    const double n = static_cast<double>(m.n_ideas);
    const double np = static_cast<double>(m.n_published);
    if (np < 2 || np / n < kMinAcceptance) {
        throw DomainError("publication rule accepted " + std::to_string(m.n_published) + " of " +
                          std::to_string(m.n_ideas) + " simulated ideas; increase mc_draws");
    }
    const double mt = m.sum_t / np;
    const double mz = m.sum_z / np;
    const double var_t = std::max(m.sum_tt / np - mt * mt, 0.0);
    const double var_z = std::max(m.sum_zz / np - mz * mz, 0.0);
    const double cov = m.sum_tz / np - mt * mz;
    const double ratio = mz / mt;
    const double ratio_var = std::max(var_z - 2.0 * ratio * cov + ratio * ratio * var_t, 0.0) / (np * mt * mt);
    const double p = np / n;
    const double f = static_cast<double>(m.n_false) / np;

    PublicationSummary s;
    s.pub_prob = {p, std::sqrt(p * (1.0 - p) / n)};
    s.mean_t = {mt, std::sqrt(var_t / np)};
    s.mean_z = {mz, std::sqrt(var_z / np)};
    s.shrinkage = {ratio, std::sqrt(ratio_var)};
    s.fdr = {f, std::sqrt(f * (1.0 - f) / np)};
    s.mc_draws = m.n_ideas;
    return s;
}

}  // namespace

std::string_view to_string(Method m) { return m == Method::Quadrature ? "quadrature" : "montecarlo"; }

Method parse_method(std::string_view text) {
    if (text == "quadrature") return Method::Quadrature;
    if (text == "montecarlo" || text == "mc") return Method::MonteCarlo;
    throw DataError("unknown method '" + std::string(text) + "' (expected quadrature or montecarlo)");
}

double conditional_mean_theta(double tstat, double sigma_theta) {
    if (!(sigma_theta >= 0.0)) throw DomainError("sigma_theta must be >= 0");
    const double v = sigma_theta * sigma_theta;
    // (1 - 1/(1+v)) t
    return v * tstat / (1.0 + v);
}

double posterior_mean_theta(const PriorSpec& prior, double tstat, const QuadratureSpec& spec) {
    validate(prior);
    const double clip = spec.domain_clip;
    const std::vector<double> breaks = {tstat, 0.0};
    auto kernel = [tstat](double th) { return norm_pdf(tstat - th); };
    const double num = prior_continuous_integral(prior, [&](double th) { return th * kernel(th); },
                                                 tstat - clip, tstat + clip, breaks, spec);
    const double den = prior_expectation(prior, kernel, tstat - clip, tstat + clip, breaks, spec) +
                       ((std::abs(tstat) > clip) ? atom_weight(prior) * norm_pdf(tstat) : 0.0);
    if (!(den > 0.0)) throw NumericError("posterior_mean_theta: marginal density underflowed", 0.0);
    return num / den;
}

PublicationSummary publication_summary(const ModelSpec& model, const CorrectionOptions& options) {
    model.validate();
    options.quad.validate();
    return options.method == Method::Quadrature ? summary_quadrature(model, options)
                                                : summary_montecarlo(model, options);
}

Estimate shrinkage_pub(const ModelSpec& model, const CorrectionOptions& options) {
    return publication_summary(model, options).shrinkage;
}

Estimate fdr_pub(const ModelSpec& model, const CorrectionOptions& options) {
    return publication_summary(model, options).fdr;
}

double fdr_upper_bound(double pr_exceed_null, double pr_exceed_marginal, double pr_theta_nonpos) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!(pr_exceed_marginal > 0.0)) throw DomainError("fdr_upper_bound: marginal exceedance must be positive");
    if (!in_unit(pr_exceed_null) || !in_unit(pr_exceed_marginal) || !in_unit(pr_theta_nonpos)) {
        throw DomainError("fdr_upper_bound: inputs must be probabilities");
    }
    return std::clamp(pr_exceed_null / pr_exceed_marginal * pr_theta_nonpos, 0.0, 1.0);
}

FdrBoundInputs fdr_bound_for_model(const ModelSpec& model, const QuadratureSpec& spec) {
    model.validate();
    const double c = model.rule.cutoff;
    FdrBoundInputs in;
    in.pr_exceed_null = model.rule.side == Side::Signed ? norm_sf(c) : (c <= 0.0 ? 1.0 : 2.0 * norm_sf(c));
    in.pr_exceed_marginal = marginal_t_exceedance(model.prior, c, model.rule.side, spec);
    in.pr_theta_nonpos = prior_expectation(model.prior, [](double) { return 1.0; }, -kInf, 0.0, {}, spec);
    in.pr_theta_nonpos = std::clamp(in.pr_theta_nonpos, 0.0, 1.0);
    in.bound = fdr_upper_bound(in.pr_exceed_null, in.pr_exceed_marginal, in.pr_theta_nonpos);
    return in;
}

double jensen_shrinkage(double tau_c, double tau_w, double vol_annual, int n_months) {
    if (!(tau_c >= 0.0) || !(tau_w >= 0.0)) throw DomainError("jensen_shrinkage: tau must be >= 0");
    if (!(vol_annual > 0.0) || n_months <= 0) throw DomainError("jensen_shrinkage: vol and months must be positive");
    const double tau2 = tau_c * tau_c + tau_w * tau_w;
    if (tau2 == 0.0) return 1.0;
    const double noise_to_signal = (vol_annual * vol_annual / 12.0) / (n_months * tau2);
    return 1.0 - 1.0 / (1.0 + noise_to_signal);
}

std::vector<NullExceedanceRow> null_exceedance_table(const std::vector<double>& cutoffs, Side side) {
    std::vector<NullExceedanceRow> rows;
    rows.reserve(cutoffs.size());
    for (double k : cutoffs) {
        if (!(k >= 0.0)) throw DomainError("null_exceedance_table: cutoffs must be non-negative");
        const double p = side == Side::Signed ? norm_sf(k) : std::min(1.0, 2.0 * norm_sf(k));
        rows.push_back({k, 100.0 * p, 1.0 / p});
    }
    return rows;
}

CorrectionReport correction_report(const ModelSpec& model, const std::vector<FindingInput>& findings,
                                   const CorrectionOptions& options) {
    const PublicationSummary s = publication_summary(model, options);
    CorrectionReport r;
    r.model = model;
    r.method = options.method;
    r.shrinkage_pub = std::clamp(s.shrinkage.value, 0.0, 1.0);
    r.shrinkage_se = s.shrinkage.std_error;
    r.fdr_pub = s.fdr.value;
    r.fdr_se = s.fdr.std_error;
    r.pub_prob = s.pub_prob.value;
    r.fdr_bound = fdr_bound_for_model(model, options.quad);
    if (options.method == Method::MonteCarlo) {
        r.mc_draws = s.mc_draws;
        r.seed = options.seed;
    }
    const auto* normal = std::get_if<NormalZeroMean>(&model.prior);
    r.per_finding.reserve(findings.size());
    for (const auto& f : findings) {
        const double corrected = normal ? conditional_mean_theta(f.tstat, normal->sigma_theta)
                                        : posterior_mean_theta(model.prior, f.tstat, options.quad);
        r.per_finding.push_back({f.id, f.tstat, corrected});
    }
    return r;
}

}  // namespace pubbias
