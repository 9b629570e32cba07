#include "pubbias/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pubbias/errors.hpp"
#include "pubbias/normal.hpp"
#include "pubbias/optimize.hpp"

namespace pubbias {

namespace {

constexpr int kMinSamples = 5;

double total_sd(double sigma_theta) { return std::sqrt(1.0 + sigma_theta * sigma_theta); }

void check_options(const FitOptions& o) {
    if (!(o.lower >= 0.0) || !(o.lower < o.upper)) throw DomainError("fit bounds must satisfy 0 <= lower < upper");
    if (!(o.tol > 0.0)) throw DomainError("fit tolerance must be positive");
}

bool near_bound(double x, const FitOptions& o) {
    const double slack = std::max(2.0 * o.tol, 1e-9);
    return x - o.lower <= slack || o.upper - x <= slack;
}

double fit_qmle_values(const std::vector<double>& values, double cutoff, Side side, const FitOptions& o,
                       double* loglik) {
    auto objective = [&](double sigma) { return truncated_loglik(values, sigma, cutoff, side); };
    const ScalarMax best = maximize_scalar(objective, o.lower, o.upper, o.tol);
    if (loglik) *loglik = best.value;
    return best.argmax;
}

GmmSolution fit_gmm_values(const std::vector<double>& values, double cutoff, const FitOptions& o) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    return gmm_sigma_from_mean(mean, cutoff, o);
}

FitResult finish(FitResult r, const TruncatedSampleSet& data, const std::vector<double>& values,
                 const FitOptions& o) {
    r.n_used = static_cast<int>(values.size());
    r.loglik = truncated_loglik(values, r.sigma_theta_hat, data.cutoff, data.side);
    r.at_boundary = r.at_boundary || near_bound(r.sigma_theta_hat, o);
    r.diagnostics = fit_diagnostics(data, {0.0, r.sigma_theta_hat}, 0.5, o.policy);
    return r;
}

}  // namespace

GmmSolution gmm_sigma_from_mean(double mean, double cutoff, const FitOptions& o) {
    if (!(mean > cutoff)) {
        throw NoSolution("truncated sample mean " + std::to_string(mean) + " does not exceed the cutoff " +
                         std::to_string(cutoff) + "; no sigma_theta >= 0 matches");
    }
    GmmSolution out;
    double s_lo = total_sd(o.lower);
    double s_hi = total_sd(o.upper);
    if (mean <= truncated_normal_mean(cutoff, s_lo)) {
        out.sigma = o.lower;
        out.clamped = o.lower == 0.0;
        return out;
    }
    if (mean >= truncated_normal_mean(cutoff, s_hi)) {
        out.sigma = o.upper;
        out.at_upper = true;
        return out;
    }
    for (int iter = 0; iter < 200 && s_hi - s_lo > 1e-13 * s_hi; ++iter) {
        const double mid = 0.5 * (s_lo + s_hi);
        if (truncated_normal_mean(cutoff, mid) < mean) s_lo = mid; else s_hi = mid;
    }
    const double s = 0.5 * (s_lo + s_hi);
    out.sigma = std::sqrt(std::max(s * s - 1.0, 0.0));
    return out;
}

std::string_view to_string(Estimator e) { return e == Estimator::Qmle ? "qmle" : "gmm"; }

Estimator parse_estimator(std::string_view text) {
    if (text == "qmle") return Estimator::Qmle;
    if (text == "gmm") return Estimator::Gmm;
    throw DataError("unknown estimator '" + std::string(text) + "' (expected qmle or gmm)");
}

UsableSample usable_tstats(const TruncatedSampleSet& data, TruncationPolicy policy) {
    if (data.side == Side::Absolute && data.cutoff < 0.0) {
        throw DomainError("absolute-side cutoff must be non-negative");
    }
    UsableSample out;
    out.values.reserve(data.samples.size());
    for (const auto& s : data.samples) {
        if (!std::isfinite(s.tstat)) throw DataError("non-finite t-stat for '" + s.id + "'");
        const double v = data.side == Side::Absolute ? std::abs(s.tstat) : s.tstat;
        if (v > data.cutoff) {
            out.values.push_back(v);
        } else if (policy == TruncationPolicy::Strict) {
            throw DataError("t-stat " + std::to_string(s.tstat) + " for '" + s.id +
                            "' does not clear the cutoff " + std::to_string(data.cutoff));
        } else {
            ++out.n_dropped;
        }
    }
    return out;
}

double truncated_loglik(std::span<const double> values, double sigma_theta, double cutoff, Side side) {
    // The folded density 2 phi(t/s)/s over 2 (1 - Phi(c/s)) has the same form
    // as the signed one once t is replaced by |t|.
    (void)side;
    const double s = total_sd(sigma_theta);
    const double log_norm = std::log(s) + norm_logsf(cutoff / s);
    double total = 0.0;
    for (double t : values) {
        const double z = t / s;
        total += -0.5 * z * z + std::log(kInvSqrt2Pi) - log_norm;
    }
    return total;
}

FitResult qmle_sigma_theta(const TruncatedSampleSet& data, const FitOptions& options) {
    check_options(options);
    const UsableSample usable = usable_tstats(data, options.policy);
    if (usable.values.size() < kMinSamples) {
        throw InsufficientData("insufficient data: " + std::to_string(usable.values.size()) +
                               " usable t-stats, need at least 5");
    }
    FitResult r;
    r.estimator = Estimator::Qmle;
    r.n_dropped = usable.n_dropped;
    r.sigma_theta_hat = fit_qmle_values(usable.values, data.cutoff, data.side, options, nullptr);
    return finish(std::move(r), data, usable.values, options);
}

FitResult gmm_sigma_theta(const TruncatedSampleSet& data, const FitOptions& options) {
    check_options(options);
    const UsableSample usable = usable_tstats(data, options.policy);
    if (usable.values.size() < kMinSamples) {
        throw InsufficientData("insufficient data: " + std::to_string(usable.values.size()) +
                               " usable t-stats, need at least 5");
    }
    const GmmSolution sol = fit_gmm_values(usable.values, data.cutoff, options);
    FitResult r;
    r.estimator = Estimator::Gmm;
    r.n_dropped = usable.n_dropped;
    r.sigma_theta_hat = sol.sigma;
    r.clamped = sol.clamped;
    r.at_boundary = sol.at_upper;
    return finish(std::move(r), data, usable.values, options);
}

FitResult fit_sigma_theta(const TruncatedSampleSet& data, Estimator estimator, const FitOptions& options) {
    return estimator == Estimator::Qmle ? qmle_sigma_theta(data, options) : gmm_sigma_theta(data, options);
}

double bootstrap_se(const TruncatedSampleSet& data, Estimator estimator, int n_boot, const RngStream& rng,
                    const FitOptions& options) {
    if (n_boot < 100) throw DomainError("bootstrap_se: n_boot must be at least 100");
    check_options(options);
    const UsableSample usable = usable_tstats(data, options.policy);
    const std::size_t n = usable.values.size();
    if (n < kMinSamples) throw InsufficientData("insufficient data for bootstrap");

    std::vector<double> estimates(n_boot, 0.0);
    std::vector<char> ok(n_boot, 0);
    const std::uint64_t base = rng.stream_id() << 32;

#pragma omp parallel for schedule(dynamic, 4)
    for (int b = 0; b < n_boot; ++b) {
        RngStream stream(rng.master_seed(), base + static_cast<std::uint64_t>(b));
        std::vector<double> resample(n);
        for (auto& v : resample) v = usable.values[stream.uniform_index(n)];
        try {
            estimates[b] = estimator == Estimator::Qmle
                               ? fit_qmle_values(resample, data.cutoff, data.side, options, nullptr)
                               : fit_gmm_values(resample, data.cutoff, options).sigma;
            ok[b] = 1;
        } catch (const std::exception&) {
            ok[b] = 0;
        }
    }

    std::vector<double> good;
    good.reserve(n_boot);
    for (int b = 0; b < n_boot; ++b)
        if (ok[b]) good.push_back(estimates[b]);
    const std::size_t failures = n_boot - good.size();
    double se = 0.0;
    if (good.size() >= 2) {
        const double mean = std::accumulate(good.begin(), good.end(), 0.0) / good.size();
        double ss = 0.0;
        for (double e : good) ss += (e - mean) * (e - mean);
        se = std::sqrt(ss / (good.size() - 1));
    }
    if (failures * 10 > static_cast<std::size_t>(n_boot)) {
        throw NumericError("bootstrap_se: estimator failed on " + std::to_string(failures) + " of " +
                               std::to_string(n_boot) + " resamples",
                           se);
    }
    return se;
}

DiagnosticsTable fit_diagnostics(const TruncatedSampleSet& data, const std::vector<double>& sigma_grid,
                                 double bin_width, TruncationPolicy policy) {
    if (sigma_grid.empty()) throw DomainError("fit_diagnostics: empty sigma grid");
    if (!(bin_width > 0.0)) throw DomainError("fit_diagnostics: bin width must be positive");
    const UsableSample usable = usable_tstats(data, policy);
    const double c = data.cutoff;
    const double top = usable.values.empty() ? c + 1.0
                                             : *std::max_element(usable.values.begin(), usable.values.end()) + 1.0;
    const int n_bins = std::max(1, static_cast<int>(std::ceil((top - c) / bin_width)));
    const double n = static_cast<double>(usable.values.size());

    std::vector<double> counts(n_bins, 0.0);
    for (double v : usable.values) {
        const int k = std::min(n_bins - 1, static_cast<int>(std::floor((v - c) / bin_width)));
        counts[std::max(k, 0)] += 1.0;
    }

    DiagnosticsTable table;
    for (double sigma : sigma_grid) {
        if (!(sigma >= 0.0)) throw DomainError("fit_diagnostics: sigma grid values must be >= 0");
        const double s = total_sd(sigma);
        const double denom = norm_sf(c / s);
        double chi2 = 0.0;
        for (int k = 0; k < n_bins; ++k) {
            DiagnosticRow row;
            row.sigma = sigma;
            row.bin_lo = c + k * bin_width;
            row.bin_hi = c + (k + 1) * bin_width;
            const double upper = (k == n_bins - 1) ? 0.0 : norm_sf(row.bin_hi / s);
            row.model_mass = (norm_sf(row.bin_lo / s) - upper) / denom;
            row.empirical_frac = n > 0 ? counts[k] / n : 0.0;
            if (row.model_mass > 0.0) {
                const double diff = row.empirical_frac - row.model_mass;
                chi2 += n * diff * diff / row.model_mass;
            }
            table.rows.push_back(row);
        }
        table.chi2_distance.push_back(chi2);
    }
    return table;
}

}  // namespace pubbias
