#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pubbias/rng.hpp"
#include "pubbias/types.hpp"

namespace pubbias {

struct MonthlyReturn {
    YearMonth month;
    double ret_pct = 0.0;
};

struct PredictorMeta {
    std::optional<YearMonth> sample_start;
    std::optional<YearMonth> sample_end;
    std::optional<YearMonth> pub_date;
    std::optional<double> original_tstat;
};

struct Predictor {
    std::string id;
    PredictorMeta meta;
    std::vector<MonthlyReturn> returns;  // strictly increasing months

    bool in_sample(YearMonth m) const;
};

/// Monthly long-short returns in percent per month, one series per predictor.
class ReturnPanel {
public:
    ReturnPanel() = default;

    /// Throws DataError on a duplicate (month, id) cell or on
    /// sample_start > sample_end / sample_end > pub_date.
    void add(Predictor predictor);

    const std::vector<Predictor>& predictors() const noexcept { return predictors_; }
    std::vector<Predictor>& predictors() noexcept { return predictors_; }
    std::size_t size() const noexcept { return predictors_.size(); }
    const Predictor* find(const std::string& id) const;

private:
    std::vector<Predictor> predictors_;
};

struct LoadReport {
    std::size_t n_predictors = 0;
    std::size_t n_excluded_no_meta = 0;
    std::vector<std::string> warnings;
};

/// Loads the long-format returns CSV (date, predictor, ret_pct) and the
/// metadata CSV (predictor, sample_start, sample_end, pub_date, original_tstat).
/// Predictors without metadata are excluded with a warning.
ReturnPanel load_panel(const std::string& returns_path, const std::string& meta_path,
                       LoadReport* report = nullptr);

inline constexpr int kMinInSampleMonths = 12;

struct InSampleRow {
    std::string id;
    double mean = 0.0;
    double sd = 0.0;
    int n = 0;
    double tstat = 0.0;
    bool degenerate = false;  // sd == 0, t undefined
};

struct InSampleTable {
    std::vector<InSampleRow> rows;
    std::vector<std::string> excluded;  // fewer than 12 in-sample months
};

InSampleTable insample_stats(const ReturnPanel& panel);

/// In-sample mean over [sample_start, sample_end], or nullopt without data.
std::optional<double> insample_mean(const Predictor& p);

/// Flips signs so every in-sample mean is positive. Idempotent.
ReturnPanel sign_normalize(const ReturnPanel& panel);

/// Rescales each predictor so its in-sample mean equals target (percent per
/// month; 1.0 = 100 bps). Predictors with a zero or missing in-sample mean are
/// dropped and counted in *n_excluded.
ReturnPanel scale_to_insample_mean(const ReturnPanel& panel, double target = 1.0,
                                   std::size_t* n_excluded = nullptr);

struct CorrelationPair {
    std::string id_a;
    std::string id_b;
    double corr = 0.0;
    int n_overlap = 0;
};

struct CorrelationTable {
    std::vector<CorrelationPair> pairs;
    std::size_t n_omitted = 0;
};

CorrelationTable pairwise_correlations(const ReturnPanel& panel, int min_overlap = 36);

struct VarianceCurveRow {
    int k = 0;
    double cumulative_fraction = 0.0;
};

/// Cumulative variance explained by the eigenvalues of the pairwise-complete
/// correlation matrix, negative eigenvalues clipped to zero. Pairs with fewer
/// than min_overlap common months enter as zero correlation; throws DataError
/// when no pair qualifies.
std::vector<VarianceCurveRow> pca_variance_curve(const ReturnPanel& panel, int min_overlap = 36);

/// Number of components needed to reach `fraction` of total variance.
int components_for(const std::vector<VarianceCurveRow>& curve, double fraction);

/// Which cells enter a pooled mean.
struct WindowSelector {
    enum class Kind { InSample, PostSample, PostPublication, Calendar };
    Kind kind = Kind::InSample;
    int first_event_month = 1;  // PostSample: event months [first, last]
    int last_event_month = 36;
    YearMonth from;             // Calendar: [from, to]
    YearMonth to;

    bool contains(const Predictor& p, YearMonth m) const;
};

struct BootstrapResult {
    double point_estimate = 0.0;
    std::vector<double> draws;
    double se = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    int n_boot = 0;
    std::uint64_t seed = 0;
    int n_months = 0;
    std::size_t n_cells = 0;
};

/// Month-cluster bootstrap of the pooled (equal cell weight) mean over the
/// window. demean subtracts each predictor's in-sample mean first.
/// Throws DataError when the window holds fewer than 12 distinct months.
BootstrapResult cluster_bootstrap_mean(const ReturnPanel& panel, const WindowSelector& window,
                                       int n_boot, const RngStream& rng, bool demean = false);

struct ExceedanceRow {
    double cutoff = 0.0;
    std::size_t count = 0;
    double percent = 0.0;
    std::optional<double> null_percent;  // bootstrap null, when requested
};

/// Counts of |t| >= cutoff.
std::vector<ExceedanceRow> exceedance_table(const std::vector<double>& tstats,
                                            const std::vector<double>& cutoffs);

/// Adds the bootstrap null column. Each draw resamples calendar months with
/// replacement from the union of in-sample months and recomputes every
/// predictor's t-stat on its de-meaned in-sample returns at the drawn months;
/// the null percent pools all predictor-draw t-stats.
std::vector<ExceedanceRow> exceedance_table_with_null(const ReturnPanel& panel,
                                                      const std::vector<double>& cutoffs, int n_boot,
                                                      const RngStream& rng);

struct EventTimeRow {
    int event_month = 0;          // months after sample_end; 0 = last in-sample month
    double cross_mean = 0.0;      // mean across predictors in this event month
    double trailing36_mean = 0.0; // mean of cross_mean over the last 36 event months with data
    int n_predictors = 0;
};

struct EventTimeCurve {
    std::vector<EventTimeRow> rows;
    double mean_first36_post_sample = 0.0;  // pooled cells with event month 1..36
    std::optional<double> mean_post_publication;  // pooled cells strictly after pub_date
};

EventTimeCurve event_time_curve(const ReturnPanel& scaled_panel, int trailing_window = 36);

struct AutocorrRow {
    int lag = 0;
    double mean_corr = 0.0;
    int n_predictors = 0;
};

inline constexpr int kMinAutocorrMonths = 48;

std::vector<AutocorrRow> mean_autocorrelation(const ReturnPanel& panel, const std::vector<int>& lags);

struct TStatPair {
    std::string id;
    double replicated = 0.0;
    double original = 0.0;
};

struct TStatComparison {
    std::vector<TStatPair> pairs;
    double mean_difference = 0.0;  // replicated - original
    double slope_through_origin = 0.0;  // replicated on original
    int n_above = 0;  // replicated > original
    int n_below = 0;
};

/// Throws DataError when no ids match.
TStatComparison compare_tstats(const std::map<std::string, double>& replicated,
                               const std::map<std::string, double>& original);

}  // namespace pubbias
