#include "pubbias/panel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "pubbias/csv_io.hpp"
#include "pubbias/errors.hpp"
#include "pubbias/kernels.hpp"

namespace pubbias {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    int n = 0;
};

Moments moments_of(const std::vector<double>& xs) {
    Moments m;
    m.n = static_cast<int>(xs.size());
    if (m.n == 0) return m;
    double sum = 0.0;
    for (double x : xs) sum += x;
    m.mean = sum / m.n;
    if (m.n < 2) return m;
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / (m.n - 1));
    return m;
}

std::vector<double> insample_values(const Predictor& p) {
    std::vector<double> xs;
    for (const auto& r : p.returns)
        if (p.in_sample(r.month)) xs.push_back(r.ret_pct);
    return xs;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    const double pos = q * (sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

// Pearson correlation over the months both series cover.
std::pair<double, int> overlap_corr(const Predictor& a, const Predictor& b) {
    std::vector<double> xs, ys;
    std::size_t i = 0, j = 0;
    while (i < a.returns.size() && j < b.returns.size()) {
        if (a.returns[i].month < b.returns[j].month) {
            ++i;
        } else if (b.returns[j].month < a.returns[i].month) {
            ++j;
        } else {
            xs.push_back(a.returns[i].ret_pct);
            ys.push_back(b.returns[j].ret_pct);
            ++i;
            ++j;
        }
    }
    const int n = static_cast<int>(xs.size());
    if (n < 2) return {kNaN, n};
    const Moments mx = moments_of(xs), my = moments_of(ys);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double dx = xs[k] - mx.mean, dy = ys[k] - my.mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return {kNaN, n};
    return {sxy / std::sqrt(sxx * syy), n};
}

}  // namespace

bool Predictor::in_sample(YearMonth m) const {
    if (meta.sample_start && m < *meta.sample_start) return false;
    if (meta.sample_end && m > *meta.sample_end) return false;
    return true;
}

void ReturnPanel::add(Predictor predictor) {
    if (find(predictor.id)) throw DataError("duplicate predictor '" + predictor.id + "'");
    const auto& m = predictor.meta;
    if (m.sample_start && m.sample_end && *m.sample_start > *m.sample_end)
        throw DataError("predictor '" + predictor.id + "': sample_start after sample_end");
    if (m.sample_end && m.pub_date && *m.sample_end > *m.pub_date)
        throw DataError("predictor '" + predictor.id + "': sample_end after pub_date");
    std::sort(predictor.returns.begin(), predictor.returns.end(),
              [](const MonthlyReturn& a, const MonthlyReturn& b) { return a.month < b.month; });
    for (std::size_t i = 1; i < predictor.returns.size(); ++i) {
        if (predictor.returns[i].month == predictor.returns[i - 1].month)
            throw DataError("duplicate cell (" + predictor.returns[i].month.str() + ", " + predictor.id + ")");
    }
    predictors_.push_back(std::move(predictor));
}

const Predictor* ReturnPanel::find(const std::string& id) const {
    for (const auto& p : predictors_)
        if (p.id == id) return &p;
    return nullptr;
}

ReturnPanel load_panel(const std::string& returns_path, const std::string& meta_path, LoadReport* report) {
    const CsvTable returns = CsvTable::read_file(returns_path);
    const CsvTable meta = CsvTable::read_file(meta_path);
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    auto month_at = [](const CsvTable& t, std::size_t row, std::size_t col) {
        try {
            return YearMonth::parse(t.cell(row, col));
        } catch (const DataError& e) {
            throw DataError(t.source() + ":" + std::to_string(t.line_of(row)) + ": " + e.what());
        }
    };

    std::map<std::string, PredictorMeta> metas;
    if (!meta.header().empty()) {
        const std::size_t id_c = meta.require_column("predictor");
        const std::size_t start_c = meta.require_column("sample_start");
        const std::size_t end_c = meta.require_column("sample_end");
        const auto pub_c = meta.column("pub_date");
        const auto orig_c = meta.column("original_tstat");
        for (std::size_t r = 0; r < meta.rows(); ++r) {
            const std::string& id = meta.cell(r, id_c);
            PredictorMeta m;
            m.sample_start = month_at(meta, r, start_c);
            m.sample_end = month_at(meta, r, end_c);
            if (pub_c && !meta.cell(r, *pub_c).empty()) m.pub_date = month_at(meta, r, *pub_c);
            if (orig_c && !meta.cell(r, *orig_c).empty())
                m.original_tstat = parse_double(meta.cell(r, *orig_c), meta, r, "original_tstat");
            if (*m.sample_start > *m.sample_end || (m.pub_date && *m.sample_end > *m.pub_date)) {
                throw DataError(meta.source() + ":" + std::to_string(meta.line_of(r)) + ": predictor '" + id +
                                "' violates sample_start <= sample_end <= pub_date");
            }
            if (!metas.emplace(id, m).second) {
                throw DataError(meta.source() + ":" + std::to_string(meta.line_of(r)) +
                                ": duplicate metadata for predictor '" + id + "'");
            }
        }
    }

    std::map<std::string, std::vector<MonthlyReturn>> series;
    std::map<std::pair<std::string, int>, std::size_t> seen;
    if (!returns.header().empty()) {
        const std::size_t date_c = returns.require_column("date");
        const std::size_t id_c = returns.require_column("predictor");
        const std::size_t ret_c = returns.require_column("ret_pct");
        for (std::size_t r = 0; r < returns.rows(); ++r) {
            const std::string& id = returns.cell(r, id_c);
            const YearMonth m = month_at(returns, r, date_c);
            const double v = parse_double(returns.cell(r, ret_c), returns, r, "ret_pct");
            auto [it, fresh] = seen.emplace(std::make_pair(id, m.index()), returns.line_of(r));
            if (!fresh) {
                throw DataError(returns.source() + ":" + std::to_string(returns.line_of(r)) + ": duplicate cell (" +
                                m.str() + ", " + id + "), first seen on line " + std::to_string(it->second));
            }
            series[id].push_back({m, v});
        }
    }

    ReturnPanel panel;
    for (auto& [id, rets] : series) {
        auto it = metas.find(id);
        if (it == metas.end()) {
            ++rep.n_excluded_no_meta;
            rep.warnings.push_back("predictor '" + id + "' has returns but no metadata; excluded");
            continue;
        }
        panel.add(Predictor{id, it->second, std::move(rets)});
    }
    for (const auto& [id, m] : metas) {
        if (!series.count(id)) rep.warnings.push_back("predictor '" + id + "' has metadata but no returns");
    }
    rep.n_predictors = panel.size();
    return panel;
}

std::optional<double> insample_mean(const Predictor& p) {
    const auto xs = insample_values(p);
    if (xs.empty()) return std::nullopt;
    return moments_of(xs).mean;
}

InSampleTable insample_stats(const ReturnPanel& panel) {
    InSampleTable table;
    for (const auto& p : panel.predictors()) {
        const Moments m = moments_of(insample_values(p));
        if (m.n < kMinInSampleMonths) {
            table.excluded.push_back(p.id);
            continue;
        }
        InSampleRow row{p.id, m.mean, m.sd, m.n, kNaN, false};
        if (m.sd == 0.0) {
            row.degenerate = true;
        } else {
            row.tstat = m.mean / (m.sd / std::sqrt(static_cast<double>(m.n)));
        }
        table.rows.push_back(row);
    }
    return table;
}

ReturnPanel sign_normalize(const ReturnPanel& panel) {
    ReturnPanel out = panel;
    for (auto& p : out.predictors()) {
        const auto mean = insample_mean(p);
        if (mean && *mean < 0.0) {
            for (auto& r : p.returns) r.ret_pct = -r.ret_pct;
        }
    }
    return out;
}

ReturnPanel scale_to_insample_mean(const ReturnPanel& panel, double target, std::size_t* n_excluded) {
    ReturnPanel out;
    std::size_t excluded = 0;
    for (const auto& p : panel.predictors()) {
        const auto mean = insample_mean(p);
        if (!mean || *mean == 0.0) {
            ++excluded;
            continue;
        }
        Predictor scaled = p;
        const double factor = target / *mean;
        for (auto& r : scaled.returns) r.ret_pct *= factor;
        out.add(std::move(scaled));
    }
    if (n_excluded) *n_excluded = excluded;
    return out;
}

CorrelationTable pairwise_correlations(const ReturnPanel& panel, int min_overlap) {
    CorrelationTable table;
    const auto& ps = panel.predictors();
    for (std::size_t a = 0; a < ps.size(); ++a) {
        for (std::size_t b = a + 1; b < ps.size(); ++b) {
            const auto [corr, n] = overlap_corr(ps[a], ps[b]);
            if (n < min_overlap || std::isnan(corr)) {
                ++table.n_omitted;
                continue;
            }
            table.pairs.push_back({ps[a].id, ps[b].id, corr, n});
        }
    }
    return table;
}

std::vector<VarianceCurveRow> pca_variance_curve(const ReturnPanel& panel, int min_overlap) {
    const auto& ps = panel.predictors();
    const auto n = static_cast<Eigen::Index>(ps.size());
    if (n < 2) throw DataError("pca_variance_curve: need at least 2 predictors");
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(n, n);
    std::size_t usable = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : usable)
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const auto [c, k] = overlap_corr(ps[a], ps[b]);
            if (k >= min_overlap && !std::isnan(c)) {
                corr(a, b) = c;
                corr(b, a) = c;
                ++usable;
            }
        }
    }
    if (usable == 0) throw DataError("pca_variance_curve: no predictor pair has enough overlapping months");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("pca_variance_curve: eigen-decomposition failed", 0.0);
    std::vector<double> eig(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    for (auto& e : eig) e = std::max(e, 0.0);
    std::sort(eig.begin(), eig.end(), std::greater<>());

    std::vector<double> cumulative(eig.size());
    double running = 0.0;
    for (std::size_t k = 0; k < eig.size(); ++k) cumulative[k] = running += eig[k];
    std::vector<VarianceCurveRow> curve;
    curve.reserve(eig.size());
    for (std::size_t k = 0; k < eig.size(); ++k)
        curve.push_back({static_cast<int>(k + 1), cumulative[k] / running});
    return curve;
}

int components_for(const std::vector<VarianceCurveRow>& curve, double fraction) {
    for (const auto& row : curve)
        if (row.cumulative_fraction >= fraction) return row.k;
    return curve.empty() ? 0 : curve.back().k;
}

bool WindowSelector::contains(const Predictor& p, YearMonth m) const {
    switch (kind) {
        case Kind::InSample: return p.in_sample(m);
        case Kind::PostSample: {
            if (!p.meta.sample_end) return false;
            const int e = m - *p.meta.sample_end;
            return e >= first_event_month && e <= last_event_month;
        }
        case Kind::PostPublication: return p.meta.pub_date && m > *p.meta.pub_date;
        case Kind::Calendar: return m >= from && m <= to;
    }
    return false;
}

BootstrapResult cluster_bootstrap_mean(const ReturnPanel& panel, const WindowSelector& window, int n_boot,
                                       const RngStream& rng, bool demean) {
    if (n_boot < 1) throw DomainError("cluster_bootstrap_mean: n_boot must be positive");
    std::map<int, std::pair<double, double>> by_month;
    std::size_t cells = 0;
    for (const auto& p : panel.predictors()) {
        double shift = 0.0;
        if (demean) {
            const auto mean = insample_mean(p);
            if (!mean) continue;
            shift = *mean;
        }
        for (const auto& r : p.returns) {
            if (!window.contains(p, r.month)) continue;
            auto& slot = by_month[r.month.index()];
            slot.first += r.ret_pct - shift;
            slot.second += 1.0;
            ++cells;
        }
    }
    if (by_month.size() < 12) {
        throw DataError("cluster_bootstrap_mean: window holds " + std::to_string(by_month.size()) +
                        " distinct months, need at least 12");
    }
    MonthCells mc;
    double total = 0.0, count = 0.0;
    for (const auto& [month, sc] : by_month) {
        mc.sum.push_back(sc.first);
        mc.count.push_back(sc.second);
        total += sc.first;
        count += sc.second;
    }

    BootstrapResult res;
    res.point_estimate = total / count;
    res.draws = omp::cluster_bootstrap(mc, n_boot, rng.master_seed(), rng.stream_id() << 32);
    res.n_boot = n_boot;
    res.seed = rng.master_seed();
    res.n_months = static_cast<int>(by_month.size());
    res.n_cells = cells;
    const Moments m = moments_of(res.draws);
    res.se = m.sd;
    std::vector<double> sorted = res.draws;
    std::sort(sorted.begin(), sorted.end());
    res.q025 = quantile_sorted(sorted, 0.025);
    res.q50 = quantile_sorted(sorted, 0.5);
    res.q975 = quantile_sorted(sorted, 0.975);
    return res;
}

std::vector<ExceedanceRow> exceedance_table(const std::vector<double>& tstats, const std::vector<double>& cutoffs) {
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] > 0.0) || (i > 0 && !(cutoffs[i] > cutoffs[i - 1])))
            throw DomainError("exceedance_table: cutoffs must be positive and ascending");
    }
    std::vector<ExceedanceRow> rows;
    for (double k : cutoffs) {
        ExceedanceRow row;
        row.cutoff = k;
        for (double t : tstats)
            if (std::abs(t) >= k) ++row.count;
        row.percent = tstats.empty() ? 0.0 : 100.0 * row.count / static_cast<double>(tstats.size());
        rows.push_back(row);
    }
    return rows;
}

std::vector<ExceedanceRow> exceedance_table_with_null(const ReturnPanel& panel, const std::vector<double>& cutoffs,
                                                      int n_boot, const RngStream& rng) {
    if (n_boot < 1) throw DomainError("exceedance_table_with_null: n_boot must be positive");
    const InSampleTable stats = insample_stats(panel);
    std::vector<double> tstats;
    for (const auto& row : stats.rows)
        if (!row.degenerate) tstats.push_back(row.tstat);
    auto rows = exceedance_table(tstats, cutoffs);

    // Dense de-meaned in-sample returns over the union of in-sample months.
    std::set<int> month_set;
    std::vector<const Predictor*> used;
    for (const auto& row : stats.rows) {
        const Predictor* p = panel.find(row.id);
        used.push_back(p);
        for (const auto& r : p->returns)
            if (p->in_sample(r.month)) month_set.insert(r.month.index());
    }
    if (used.empty() || month_set.empty()) return rows;
    const std::vector<int> months(month_set.begin(), month_set.end());
    std::unordered_map<int, std::size_t> slot;
    for (std::size_t i = 0; i < months.size(); ++i) slot[months[i]] = i;
    std::vector<std::vector<double>> dense(used.size(), std::vector<double>(months.size(), kNaN));
    for (std::size_t k = 0; k < used.size(); ++k) {
        const double mean = *insample_mean(*used[k]);
        for (const auto& r : used[k]->returns)
            if (used[k]->in_sample(r.month)) dense[k][slot[r.month.index()]] = r.ret_pct - mean;
    }

    const std::size_t n_cut = cutoffs.size();
    std::vector<std::vector<std::uint64_t>> hits(n_boot, std::vector<std::uint64_t>(n_cut, 0));
    std::vector<std::uint64_t> n_t(n_boot, 0);
    const std::uint64_t base = rng.stream_id() << 32;
#pragma omp parallel for schedule(dynamic, 4)
    for (int b = 0; b < n_boot; ++b) {
        RngStream stream(rng.master_seed(), base + static_cast<std::uint64_t>(b));
        std::vector<std::size_t> drawn(months.size());
        for (auto& d : drawn) d = stream.uniform_index(months.size());
        for (const auto& series : dense) {
            double sum = 0.0, sumsq = 0.0;
            int n = 0;
            for (std::size_t d : drawn) {
                const double v = series[d];
                if (std::isnan(v)) continue;
                sum += v;
                sumsq += v * v;
                ++n;
            }
            if (n < 2) continue;
            const double mean = sum / n;
            const double var = (sumsq - n * mean * mean) / (n - 1);
            if (!(var > 0.0)) continue;
            const double t = mean / std::sqrt(var / n);
            ++n_t[b];
            for (std::size_t c = 0; c < n_cut; ++c)
                if (std::abs(t) >= cutoffs[c]) ++hits[b][c];
        }
    }
    std::uint64_t total = 0;
    for (auto v : n_t) total += v;
    for (std::size_t c = 0; c < n_cut; ++c) {
        std::uint64_t h = 0;
        for (int b = 0; b < n_boot; ++b) h += hits[b][c];
        rows[c].null_percent = total ? 100.0 * static_cast<double>(h) / static_cast<double>(total) : 0.0;
    }
    return rows;
}

EventTimeCurve event_time_curve(const ReturnPanel& scaled_panel, int trailing_window) {
    if (trailing_window < 1) throw DomainError("event_time_curve: trailing window must be positive");
    std::map<int, std::pair<double, int>> by_event;
    double post36_sum = 0.0, post_pub_sum = 0.0;
    std::size_t post36_n = 0, post_pub_n = 0;
    for (const auto& p : scaled_panel.predictors()) {
        if (!p.meta.sample_end) continue;
        for (const auto& r : p.returns) {
            const int e = r.month - *p.meta.sample_end;
            auto& slot = by_event[e];
            slot.first += r.ret_pct;
            slot.second += 1;
            if (e >= 1 && e <= 36) {
                post36_sum += r.ret_pct;
                ++post36_n;
            }
            if (p.meta.pub_date && r.month > *p.meta.pub_date) {
                post_pub_sum += r.ret_pct;
                ++post_pub_n;
            }
        }
    }
    EventTimeCurve curve;
    for (const auto& [e, sc] : by_event) curve.rows.push_back({e, sc.first / sc.second, 0.0, sc.second});
    // Trailing mean over the most recent rows with data; shorter at the start.
    for (std::size_t i = 0; i < curve.rows.size(); ++i) {
        const std::size_t len = std::min<std::size_t>(i + 1, trailing_window);
        double sum = 0.0;
        for (std::size_t j = i + 1 - len; j <= i; ++j) sum += curve.rows[j].cross_mean;
        curve.rows[i].trailing36_mean = sum / static_cast<double>(len);
    }
    curve.mean_first36_post_sample = post36_n ? post36_sum / post36_n : kNaN;
    if (post_pub_n) curve.mean_post_publication = post_pub_sum / post_pub_n;
    return curve;
}

std::vector<AutocorrRow> mean_autocorrelation(const ReturnPanel& panel, const std::vector<int>& lags) {
    std::vector<AutocorrRow> rows;
    for (int lag : lags) {
        if (lag < 1) throw DomainError("mean_autocorrelation: lags must be positive");
        rows.push_back({lag, 0.0, 0});
    }
    for (const auto& p : panel.predictors()) {
        if (static_cast<int>(p.returns.size()) < kMinAutocorrMonths) continue;
        const int first = p.returns.front().month.index();
        const int span = p.returns.back().month.index() - first + 1;
        std::vector<double> dense(span, kNaN);
        double sum = 0.0;
        for (const auto& r : p.returns) {
            dense[r.month.index() - first] = r.ret_pct;
            sum += r.ret_pct;
        }
        const double mean = sum / p.returns.size();
        double denom = 0.0;
        for (const auto& r : p.returns) denom += (r.ret_pct - mean) * (r.ret_pct - mean);
        if (denom == 0.0) continue;
        for (auto& row : rows) {
            double num = 0.0;
            for (int i = 0; i + row.lag < span; ++i) {
                const double x = dense[i], y = dense[i + row.lag];
                if (std::isnan(x) || std::isnan(y)) continue;
                num += (x - mean) * (y - mean);
            }
            row.mean_corr += num / denom;
            ++row.n_predictors;
        }
    }
    for (auto& row : rows) row.mean_corr = row.n_predictors ? row.mean_corr / row.n_predictors : kNaN;
    return rows;
}

TStatComparison compare_tstats(const std::map<std::string, double>& replicated,
                               const std::map<std::string, double>& original) {
    TStatComparison out;
    double diff = 0.0, ro = 0.0, oo = 0.0;
    for (const auto& [id, r] : replicated) {
        auto it = original.find(id);
        if (it == original.end()) continue;
        const double o = it->second;
        out.pairs.push_back({id, r, o});
        diff += r - o;
        ro += r * o;
        oo += o * o;
        if (r > o) ++out.n_above;
        else if (r < o) ++out.n_below;
    }
    if (out.pairs.empty()) throw DataError("compare_tstats: no matching ids between the two tables");
    out.mean_difference = diff / out.pairs.size();
    out.slope_through_origin = oo > 0.0 ? ro / oo : kNaN;
    return out;
}

}  // namespace pubbias
