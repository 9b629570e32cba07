#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "pubbias/errors.hpp"
#include "pubbias/panel.hpp"

using namespace pubbias;

namespace {

const YearMonth kStart{1970, 1};

// A predictor with `n` consecutive months of returns starting at kStart,
// in-sample for the first `n_in` months and published `pub_lag` months later.
Predictor make_predictor(const std::string& id, const std::vector<double>& rets, int n_in, int pub_lag = 24) {
    Predictor p;
    p.id = id;
    p.meta.sample_start = kStart;
    p.meta.sample_end = kStart + (n_in - 1);
    p.meta.pub_date = kStart + (n_in - 1 + pub_lag);
    for (std::size_t i = 0; i < rets.size(); ++i) p.returns.push_back({kStart + static_cast<int>(i), rets[i]});
    return p;
}

std::vector<double> normal_series(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(mean, sd);
    std::vector<double> v(n);
    for (double& x : v) x = nd(gen);
    return v;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("pubbias_panel_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string write(const std::string& name, const std::string& text) const {
        const auto f = path / name;
        std::ofstream(f) << text;
        return f.string();
    }
};

}  // namespace

TEST_CASE("year-month arithmetic") {
    const YearMonth a = YearMonth::parse("1999-12");
    CHECK(a.year() == 1999);
    CHECK(a.month() == 12);
    CHECK((a + 1).str() == "2000-01");
    CHECK(YearMonth::parse("200001") == a + 1);
    CHECK((YearMonth{2001, 3} - YearMonth{2000, 1}) == 14);
    CHECK_THROWS_AS(YearMonth::parse("1999-13"), DataError);
    CHECK_THROWS_AS(YearMonth::parse("bad"), DataError);
}

TEST_CASE("panel construction invariants") {
    ReturnPanel panel;
    Predictor dup = make_predictor("a", {1, 2, 3}, 3);
    dup.returns.push_back(dup.returns.front());
    CHECK_THROWS_AS(panel.add(dup), DataError);

    Predictor bad_dates = make_predictor("b", {1, 2, 3}, 3);
    bad_dates.meta.pub_date = kStart;
    CHECK_THROWS_AS(panel.add(bad_dates), DataError);

    panel.add(make_predictor("c", {1, 2, 3}, 3));
    CHECK_THROWS_AS(panel.add(make_predictor("c", {1, 2, 3}, 3)), DataError);
}

TEST_CASE("loading panel files") {
    TempDir dir;
    const std::string meta = dir.write("meta.csv",
                                       "predictor,sample_start,sample_end,pub_date,original_tstat\n"
                                       "mom,1970-01,1970-12,1971-06,3.1\n"
                                       "val,1970-01,1970-12,1971-06,\n");
    SUBCASE("well-formed two-predictor file") {
        std::string rets = "date,predictor,ret_pct\n";
        for (int m = 1; m <= 12; ++m) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "1970-%02d,mom,%.2f\n1970-%02d,val,%.2f\n", m, 0.5 + m * 0.01, m, -0.2);
            rets += buf;
        }
        LoadReport rep;
        const ReturnPanel p = load_panel(dir.write("r.csv", rets), meta, &rep);
        CHECK(p.size() == 2);
        CHECK(rep.n_excluded_no_meta == 0);
        REQUIRE(p.find("mom"));
        CHECK(p.find("mom")->meta.original_tstat.value() == doctest::Approx(3.1));
        CHECK_FALSE(p.find("val")->meta.original_tstat.has_value());
        CHECK(p.find("mom")->returns.size() == 12);
    }
    SUBCASE("duplicate cell names the row") {
        const std::string rets = dir.write("d.csv", "date,predictor,ret_pct\n1970-01,mom,1\n1970-02,mom,1\n1970-01,mom,2\n");
        try {
            load_panel(rets, meta);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find(":4:") != std::string::npos);
            CHECK(msg.find("duplicate") != std::string::npos);
        }
    }
    SUBCASE("missing metadata excludes with a warning") {
        const std::string rets = dir.write("m.csv", "date,predictor,ret_pct\n1970-01,mom,1\n1970-01,ghost,2\n");
        LoadReport rep;
        const ReturnPanel p = load_panel(rets, meta, &rep);
        CHECK(p.size() == 1);
        CHECK(rep.n_excluded_no_meta == 1);
        CHECK_FALSE(rep.warnings.empty());
    }
    SUBCASE("schema violations report a location") {
        const std::string rets = dir.write("s.csv", "date,predictor,ret_pct\n1970-01,mom,abc\n");
        CHECK_THROWS_WITH_AS(load_panel(rets, meta), doctest::Contains(":2"), DataError);
        const std::string nocol = dir.write("n.csv", "date,id,ret_pct\n1970-01,mom,1\n");
        CHECK_THROWS_AS(load_panel(nocol, meta), DataError);
        CHECK_THROWS_AS(load_panel(dir.write("x.csv", "date,predictor,ret_pct\n"), (dir.path / "nope.csv").string()),
                        DataError);
    }
}

TEST_CASE("in-sample statistics") {
    ReturnPanel panel;
    panel.add(make_predictor("const", std::vector<double>(100, 1.0), 100));
    panel.add(make_predictor("noise", normal_series(400, 1.0, 5.0, 3), 400));
    panel.add(make_predictor("short", std::vector<double>(30, 1.0), 11));
    const InSampleTable t = insample_stats(panel);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.excluded == std::vector<std::string>{"short"});
    CHECK(t.rows[0].mean == doctest::Approx(1.0));
    CHECK(t.rows[0].degenerate);
    CHECK(std::isnan(t.rows[0].tstat));
    CHECK(t.rows[1].n == 400);
    // t ~ N(4, 1) approximately; 4 sigma band.
    CHECK(std::abs(t.rows[1].tstat - 4.0) <= 4.0);
    const auto xs = normal_series(400, 1.0, 5.0, 3);
    double s = 0, ss = 0;
    for (double x : xs) {
        s += x;
        ss += x * x;
    }
    const double mean = s / 400, sd = std::sqrt((ss - 400 * mean * mean) / 399);
    CHECK(t.rows[1].tstat == doctest::Approx(mean / (sd / 20.0)).epsilon(1e-12));
}

TEST_CASE("sign normalisation and scaling") {
    ReturnPanel panel;
    panel.add(make_predictor("neg", normal_series(120, -0.5, 2.0, 1), 60));
    panel.add(make_predictor("pos", normal_series(120, 0.3, 2.0, 2), 60));
    panel.add(make_predictor("zero", std::vector<double>(120, 0.0), 60));

    const ReturnPanel once = sign_normalize(panel);
    const ReturnPanel twice = sign_normalize(once);
    for (std::size_t k = 0; k < once.size(); ++k) {
        const auto m = insample_mean(once.predictors()[k]);
        CHECK(*m >= 0.0);
        for (std::size_t i = 0; i < once.predictors()[k].returns.size(); ++i)
            CHECK(once.predictors()[k].returns[i].ret_pct == twice.predictors()[k].returns[i].ret_pct);
    }
    CHECK(*insample_mean(*once.find("neg")) == doctest::Approx(-*insample_mean(*panel.find("neg"))));

    std::size_t excluded = 0;
    const ReturnPanel scaled = scale_to_insample_mean(once, 1.0, &excluded);
    CHECK(excluded == 1);
    CHECK(scaled.size() == 2);
    double pooled = 0.0;
    int cells = 0;
    for (const auto& p : scaled.predictors()) {
        CHECK(std::abs(*insample_mean(p) - 1.0) <= 1e-12);
        for (const auto& r : p.returns)
            if (p.in_sample(r.month)) {
                pooled += r.ret_pct;
                ++cells;
            }
    }
    CHECK(std::abs(pooled / cells - 1.0) <= 1e-12);
}

TEST_CASE("pairwise correlations") {
    ReturnPanel panel;
    const auto a = normal_series(500, 0.0, 1.0, 10);
    panel.add(make_predictor("a", a, 250));
    panel.add(make_predictor("a_copy", a, 250));
    panel.add(make_predictor("b", normal_series(500, 0.0, 1.0, 11), 250));
    panel.add(make_predictor("tiny", normal_series(20, 0.0, 1.0, 12), 12));
    const CorrelationTable t = pairwise_correlations(panel, 36);
    CHECK(t.pairs.size() == 3);
    CHECK(t.n_omitted == 3);
    for (const auto& p : t.pairs) {
        if (p.id_a == "a" && p.id_b == "a_copy") CHECK(p.corr == doctest::Approx(1.0).epsilon(1e-12));
        if (p.id_b == "b") CHECK(std::abs(p.corr) <= 0.15);
        CHECK(p.n_overlap == 500);
    }
}

TEST_CASE("PCA variance curve") {
    SUBCASE("one-factor panel") {
        ReturnPanel panel;
        const auto f = normal_series(300, 0.0, 1.0, 20);
        for (int k = 0; k < 5; ++k) {
            std::vector<double> s = f;
            for (double& x : s) x *= (k + 1);
            panel.add(make_predictor("p" + std::to_string(k), s, 200));
        }
        const auto curve = pca_variance_curve(panel);
        CHECK(curve.front().cumulative_fraction == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(components_for(curve, 0.9) == 1);
    }
    SUBCASE("independent columns need about 0.9 N components") {
        ReturnPanel panel;
        const int n = 20;
        for (int k = 0; k < n; ++k) panel.add(make_predictor("p" + std::to_string(k), normal_series(5000, 0.0, 1.0, 100 + k), 3000));
        const auto curve = pca_variance_curve(panel);
        REQUIRE(curve.size() == static_cast<std::size_t>(n));
        for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].cumulative_fraction >= curve[i - 1].cumulative_fraction);
        CHECK(curve.back().cumulative_fraction == 1.0);
        const int k = components_for(curve, 0.9);
        CHECK(k >= 16);
        CHECK(k <= 19);
    }
    SUBCASE("unbalanced panel stays a valid curve") {
        ReturnPanel panel;
        for (int k = 0; k < 6; ++k) {
            Predictor p = make_predictor("u" + std::to_string(k), normal_series(200, 0.0, 1.0, 300 + k), 100);
            p.returns.erase(p.returns.begin(), p.returns.begin() + 25 * k);
            panel.add(p);
        }
        const auto curve = pca_variance_curve(panel);
        CHECK(curve.back().cumulative_fraction == 1.0);
        for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].cumulative_fraction >= curve[i - 1].cumulative_fraction);
    }
    SUBCASE("no qualifying overlap") {
        ReturnPanel panel;
        panel.add(make_predictor("x", normal_series(20, 0, 1, 1), 12));
        panel.add(make_predictor("y", normal_series(20, 0, 1, 2), 12));
        CHECK_THROWS_AS(pca_variance_curve(panel), DataError);
    }
}

TEST_CASE("month-cluster bootstrap") {
    WindowSelector in_sample;
    SUBCASE("constant returns give constant draws") {
        ReturnPanel panel;
        panel.add(make_predictor("c", std::vector<double>(60, 0.7), 60));
        const auto r = cluster_bootstrap_mean(panel, in_sample, 200, RngStream(1, 0));
        CHECK(r.draws.size() == 200);
        for (double d : r.draws) CHECK(d == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(r.se == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("duplicating a column leaves the distribution unchanged") {
        const auto s = normal_series(120, 0.5, 3.0, 5);
        ReturnPanel one, two;
        one.add(make_predictor("a", s, 120));
        two.add(make_predictor("a", s, 120));
        two.add(make_predictor("a2", s, 120));
        const auto r1 = cluster_bootstrap_mean(one, in_sample, 500, RngStream(9, 1));
        const auto r2 = cluster_bootstrap_mean(two, in_sample, 500, RngStream(9, 1));
        CHECK(r1.point_estimate == doctest::Approx(r2.point_estimate).epsilon(1e-14));
        for (int b = 0; b < 500; ++b)
            CHECK(r1.draws[b] - r1.point_estimate == doctest::Approx(r2.draws[b] - r2.point_estimate).epsilon(1e-12));
    }
    SUBCASE("draws centre on the pooled mean and quantiles order") {
        ReturnPanel panel;
        for (int k = 0; k < 5; ++k) panel.add(make_predictor("p" + std::to_string(k), normal_series(240, 1.0, 4.0, 40 + k), 240));
        const auto r = cluster_bootstrap_mean(panel, in_sample, 2000, RngStream(3, 0));
        double mean = 0.0;
        for (double d : r.draws) mean += d;
        mean /= r.draws.size();
        CHECK(std::abs(mean - r.point_estimate) <= 2.0 * r.se);
        CHECK(r.q025 <= r.q50);
        CHECK(r.q50 <= r.q975);
        CHECK(r.n_months == 240);
        CHECK(r.n_cells == 1200);
        const auto again = cluster_bootstrap_mean(panel, in_sample, 2000, RngStream(3, 0));
        CHECK(again.draws == r.draws);
    }
    SUBCASE("post-sample window and de-meaning") {
        ReturnPanel panel;
        std::vector<double> s(120, 2.0);
        for (int i = 60; i < 120; ++i) s[i] = 1.0;
        panel.add(make_predictor("step", s, 60));
        WindowSelector post;
        post.kind = WindowSelector::Kind::PostSample;
        const auto r = cluster_bootstrap_mean(panel, post, 100, RngStream(1, 0));
        CHECK(r.point_estimate == doctest::Approx(1.0));
        CHECK(r.n_months == 36);
        const auto d = cluster_bootstrap_mean(panel, post, 100, RngStream(1, 0), true);
        CHECK(d.point_estimate == doctest::Approx(-1.0));
    }
    SUBCASE("too few months") {
        ReturnPanel panel;
        panel.add(make_predictor("c", std::vector<double>(11, 0.7), 11));
        CHECK_THROWS_AS(cluster_bootstrap_mean(panel, in_sample, 100, RngStream(1, 0)), DataError);
    }
}

TEST_CASE("exceedance tables") {
    const auto rows = exceedance_table({2.5, -3.1, 1.0, 4.0, 2.0}, {2.0, 3.0, 4.0, 5.0});
    CHECK(rows[0].count == 4);
    CHECK(rows[1].count == 2);
    CHECK(rows[2].count == 1);
    CHECK(rows[3].count == 0);
    CHECK(rows[0].percent == doctest::Approx(80.0));
    const auto empty = exceedance_table({}, {2.0, 3.0});
    CHECK(empty[0].count == 0);
    CHECK(empty[0].percent == 0.0);
    CHECK_THROWS_AS(exceedance_table({1.0}, {3.0, 2.0}), DomainError);
    CHECK_THROWS_AS(exceedance_table({1.0}, {0.0}), DomainError);

    SUBCASE("bootstrap null is near the normal null on i.i.d. data") {
        ReturnPanel panel;
        for (int k = 0; k < 40; ++k)
            panel.add(make_predictor("p" + std::to_string(k), normal_series(240, 0.8, 4.0, 500 + k), 240));
        const auto t = exceedance_table_with_null(panel, {2.0, 3.0}, 200, RngStream(7, 0));
        REQUIRE(t[0].null_percent.has_value());
        CHECK(*t[0].null_percent == doctest::Approx(4.55).epsilon(0.25));
        CHECK(*t[1].null_percent < *t[0].null_percent);
        const auto again = exceedance_table_with_null(panel, {2.0, 3.0}, 200, RngStream(7, 0));
        CHECK(*again[0].null_percent == *t[0].null_percent);
    }
}

TEST_CASE("event-time curve") {
    SUBCASE("constant panel is flat at 100 bps") {
        ReturnPanel panel;
        for (int k = 0; k < 3; ++k) panel.add(make_predictor("c" + std::to_string(k), std::vector<double>(180, 1.0), 100 - 10 * k));
        const auto c = event_time_curve(panel);
        for (const auto& r : c.rows) {
            CHECK(r.cross_mean == doctest::Approx(1.0));
            CHECK(r.trailing36_mean == doctest::Approx(1.0));
        }
        CHECK(c.mean_first36_post_sample == doctest::Approx(1.0));
        REQUIRE(c.mean_post_publication.has_value());
        CHECK(*c.mean_post_publication == doctest::Approx(1.0));
    }
    SUBCASE("returns halving at sample end give a linear 36-month ramp") {
        ReturnPanel panel;
        for (int k = 0; k < 4; ++k) {
            const int n_in = 60 + 12 * k;
            std::vector<double> s(n_in + 60, 1.0);
            for (std::size_t i = n_in; i < s.size(); ++i) s[i] = 0.5;
            panel.add(make_predictor("h" + std::to_string(k), s, n_in));
        }
        const auto c = event_time_curve(panel);
        for (const auto& r : c.rows) {
            if (r.event_month < 0 || r.event_month > 60) continue;
            const int post = std::min(r.event_month, 36);
            const double expected = (36.0 - post + 0.5 * post) / 36.0;
            CHECK(r.trailing36_mean == doctest::Approx(expected).epsilon(1e-12));
        }
        CHECK(c.mean_first36_post_sample == doctest::Approx(0.5));
    }
    SUBCASE("stationary panel stays within sampling bands") {
        ReturnPanel panel;
        for (int k = 0; k < 30; ++k)
            panel.add(make_predictor("s" + std::to_string(k), normal_series(240, 1.0, 3.0, 900 + k), 120));
        const auto c = event_time_curve(panel);
        for (const auto& r : c.rows) {
            if (r.event_month < -80 || r.event_month > 110) continue;
            // Each trailing mean averages 36 cross-sections of 30 draws.
            const double se = 3.0 / std::sqrt(30.0 * 36.0);
            CHECK(std::abs(r.trailing36_mean - 1.0) <= 4.0 * se);
        }
    }
}

TEST_CASE("autocorrelation") {
    SUBCASE("white noise sits inside the Bartlett band") {
        ReturnPanel panel;
        const int preds = 30, n = 400;
        for (int k = 0; k < preds; ++k) panel.add(make_predictor("w" + std::to_string(k), normal_series(n, 0.0, 1.0, 60 + k), n));
        for (const auto& r : mean_autocorrelation(panel, {1, 2, 3, 6, 12})) {
            CHECK(r.n_predictors == preds);
            CHECK(std::abs(r.mean_corr) < 3.0 / std::sqrt(double(n) * preds));
        }
    }
    SUBCASE("AR(1) with coefficient 0.5") {
        ReturnPanel panel;
        for (int k = 0; k < 10; ++k) {
            auto e = normal_series(2000, 0.0, 1.0, 70 + k);
            for (std::size_t i = 1; i < e.size(); ++i) e[i] += 0.5 * e[i - 1];
            panel.add(make_predictor("ar" + std::to_string(k), e, 2000));
        }
        const auto rows = mean_autocorrelation(panel, {1, 2});
        CHECK(rows[0].mean_corr == doctest::Approx(0.5).epsilon(0.05));
        CHECK(rows[1].mean_corr == doctest::Approx(0.25).epsilon(0.1));
    }
    SUBCASE("short series are skipped") {
        ReturnPanel panel;
        panel.add(make_predictor("short", normal_series(47, 0.0, 1.0, 1), 47));
        const auto rows = mean_autocorrelation(panel, {1});
        CHECK(rows[0].n_predictors == 0);
    }
}

TEST_CASE("replicated versus original t-stats") {
    std::map<std::string, double> rep = {{"a", 2.5}, {"b", 3.0}, {"c", 4.5}};
    auto same = compare_tstats(rep, rep);
    CHECK(same.mean_difference == 0.0);
    CHECK(same.slope_through_origin == doctest::Approx(1.0));

    std::map<std::string, double> orig;
    for (const auto& [k, v] : rep) orig[k] = v + 0.5;
    const auto shifted = compare_tstats(rep, orig);
    CHECK(shifted.mean_difference == doctest::Approx(-0.5));
    CHECK(shifted.n_below == 3);

    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd(3.0, 1.0);
    std::map<std::string, double> o2, r2;
    for (int i = 0; i < 200; ++i) {
        const double o = nd(gen);
        o2["x" + std::to_string(i)] = o;
        r2["x" + std::to_string(i)] = 0.9 * o;
    }
    CHECK(compare_tstats(r2, o2).slope_through_origin == doctest::Approx(0.9).epsilon(1e-12));
    CHECK_THROWS_AS(compare_tstats({{"a", 1.0}}, {{"b", 1.0}}), DataError);
}
