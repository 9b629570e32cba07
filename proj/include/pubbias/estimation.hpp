#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pubbias/rng.hpp"
#include "pubbias/types.hpp"

namespace pubbias {

struct TStatSample {
    std::string id;
    double tstat = 0.0;
    std::optional<double> se_monthly_bps;
    std::optional<YearMonth> sample_start;
    std::optional<YearMonth> sample_end;
    std::optional<YearMonth> pub_date;
};

/// Published t-stats, all of which should clear the cutoff on the given side.
struct TruncatedSampleSet {
    std::vector<TStatSample> samples;
    double cutoff = 2.0;
    Side side = Side::Signed;
};

/// What to do with samples that do not clear the cutoff.
enum class TruncationPolicy { Drop, Strict };

enum class Estimator { Qmle, Gmm };

std::string_view to_string(Estimator e);
Estimator parse_estimator(std::string_view text);

struct FitOptions {
    double lower = 0.0;
    double upper = 20.0;
    double tol = 1e-6;
    TruncationPolicy policy = TruncationPolicy::Drop;
};

struct DiagnosticRow {
    double sigma = 0.0;
    double bin_lo = 0.0;
    double bin_hi = 0.0;       // the last bin is open-ended for the model mass
    double empirical_frac = 0.0;
    double model_mass = 0.0;
};

struct DiagnosticsTable {
    std::vector<DiagnosticRow> rows;
    // n * sum (obs - model)^2 / model for each grid sigma, in grid order.
    std::vector<double> chi2_distance;
};

struct FitResult {
    Estimator estimator = Estimator::Qmle;
    double sigma_theta_hat = 0.0;
    double loglik = 0.0;
    std::optional<double> se_boot;
    int n_used = 0;
    int n_dropped = 0;
    bool at_boundary = false;  // estimate sits on a search bound
    bool clamped = false;      // gmm moment implied s < 1, reported as sigma = 0
    DiagnosticsTable diagnostics;
};

struct UsableSample {
    std::vector<double> values;  // |t| on the absolute side
    int n_dropped = 0;
};

/// Applies the truncation policy. Strict mode throws DataError on the first
/// sample that does not clear the cutoff.
UsableSample usable_tstats(const TruncatedSampleSet& data, TruncationPolicy policy);

/// Truncated-normal log likelihood of t | pub with t ~ N(0, 1 + sigma^2).
double truncated_loglik(std::span<const double> values, double sigma_theta, double cutoff,
                        Side side);

FitResult qmle_sigma_theta(const TruncatedSampleSet& data, const FitOptions& options = {});
struct GmmSolution {
    double sigma = 0.0;
    bool clamped = false;   // moment below the sigma = 0 value
    bool at_upper = false;  // moment beyond the upper search bound
};

// Inverts E[t | t > cutoff] = mean for sigma_theta. Throws NoSolution when
// mean <= cutoff.
GmmSolution gmm_sigma_from_mean(double mean, double cutoff, const FitOptions& options = {});

FitResult gmm_sigma_theta(const TruncatedSampleSet& data, const FitOptions& options = {});
FitResult fit_sigma_theta(const TruncatedSampleSet& data, Estimator estimator,
                          const FitOptions& options = {});

/// Predictor-level bootstrap. Resample b draws from stream
/// (rng.master_seed(), rng.stream_id() * 2^32 + b), so the answer does not
/// depend on thread count. Throws NumericError when more than 10% of the
/// resamples fail to produce an estimate.
double bootstrap_se(const TruncatedSampleSet& data, Estimator estimator, int n_boot,
                    const RngStream& rng, const FitOptions& options = {});

/// Observed histogram of t | pub against the model-implied truncated mass for
/// each sigma on the grid. Bins of bin_width start at the cutoff and cover
/// [cutoff, max t + 1].
DiagnosticsTable fit_diagnostics(const TruncatedSampleSet& data, const std::vector<double>& sigma_grid,
                                 double bin_width = 0.5,
                                 TruncationPolicy policy = TruncationPolicy::Drop);

}  // namespace pubbias
