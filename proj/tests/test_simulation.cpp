#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include <omp.h>

#include "oracles.hpp"
#include "pubbias/errors.hpp"
#include "pubbias/kernels.hpp"
#include "pubbias/simulation.hpp"

using namespace pubbias;

namespace {

SimulationSpec spec_for(const PriorSpec& prior, PublicationRule rule, std::uint64_t n, std::uint64_t seed) {
    SimulationSpec s;
    s.model = {prior, rule};
    s.n_ideas = n;
    s.seed = seed;
    return s;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_moments(const PublishedMoments& a, const PublishedMoments& b) {
    return a.n_ideas == b.n_ideas && a.n_published == b.n_published && a.n_false == b.n_false &&
           same_bits(a.sum_t, b.sum_t) && same_bits(a.sum_z, b.sum_z) && same_bits(a.sum_tt, b.sum_tt) &&
           same_bits(a.sum_zz, b.sum_zz) && same_bits(a.sum_tz, b.sum_tz);
}

}  // namespace

TEST_CASE("headline simulation at sigma 3") {
    const auto r = simulate(spec_for(NormalZeroMean{3.0}, signed_threshold(2.0), 1'000'000, 42));
    CHECK(std::abs(r.realized_shrinkage - 0.100) <= 0.005);
    CHECK(std::abs(r.realized_fdr - 0.004) <= 0.001);
    CHECK(std::abs(r.pub_rate - 0.2635446) <= 4.0 * std::sqrt(0.2635 * 0.7365 / 1e6));
    CHECK(r.n_published == r.published.size());
    CHECK(r.n_published <= r.n_ideas);
    for (const auto& idea : r.published) CHECK(idea.t > 2.0);
}

TEST_CASE("all-null population") {
    const auto r = simulate(spec_for(NormalZeroMean{0.0}, signed_threshold(2.0), 1'000'000, 7));
    CHECK(r.realized_fdr == 1.0);
    CHECK(std::abs(r.pub_rate - 0.0227501) <= 4.0 * std::sqrt(0.02275 * 0.97725 / 1e6));
}

TEST_CASE("zero published is an error") {
    CHECK_THROWS_AS(simulate(spec_for(NormalZeroMean{0.0}, signed_threshold(8.0), 1000, 1)), NumericError);
    SimulationSpec bad = spec_for(NormalZeroMean{1.0}, signed_threshold(2.0), 0, 1);
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("bitwise reproducibility") {
    const auto s = spec_for(PointMassMixture{0.5, 2.0}, absolute_threshold(1.96), 300'000, 99);
    const auto a = simulate(s);
    const auto b = simulate(s);
    REQUIRE(a.published.size() == b.published.size());
    CHECK(std::memcmp(a.published.data(), b.published.data(), a.published.size() * sizeof(PublishedIdea)) == 0);
    CHECK(same_bits(a.realized_shrinkage, b.realized_shrinkage));
    CHECK(same_bits(a.realized_fdr, b.realized_fdr));
    const auto c = simulate(spec_for(PointMassMixture{0.5, 2.0}, absolute_threshold(1.96), 300'000, 100));
    CHECK_FALSE(same_bits(a.realized_shrinkage, c.realized_shrinkage));
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
    const ModelSpec m{ScaledStudentT{1.5, 5.0}, absolute_threshold(2.0)};
    // Not a multiple of the chunk size, so the last chunk is partial.
    const std::uint64_t n = 5 * kSimulationChunk + 1234;
    const auto ser = serial::published_moments(m, n, 3, FalseDefinition::NonPositive);
    for (int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        CHECK(same_moments(ser, omp::published_moments(m, n, 3, FalseDefinition::NonPositive)));
        const auto sd = serial::published_draws(m, n, 3, FalseDefinition::NonPositive);
        const auto od = omp::published_draws(m, n, 3, FalseDefinition::NonPositive);
        REQUIRE(sd.ideas.size() == od.ideas.size());
        CHECK(std::memcmp(sd.ideas.data(), od.ideas.data(), sd.ideas.size() * sizeof(PublishedIdea)) == 0);
        CHECK(same_moments(sd.moments, od.moments));
    }

    MonthCells cells;
    RngStream r(4, 4);
    for (int i = 0; i < 240; ++i) {
        cells.sum.push_back(r.normal() * 3.0);
        cells.count.push_back(1.0 + static_cast<double>(r.uniform_index(5)));
    }
    const auto bs = serial::cluster_bootstrap(cells, 500, 11, 7);
    for (int threads : {1, 2, 5}) {
        omp_set_num_threads(threads);
        const auto bo = omp::cluster_bootstrap(cells, 500, 11, 7);
        REQUIRE(bs.size() == bo.size());
        CHECK(std::memcmp(bs.data(), bo.data(), bs.size() * sizeof(double)) == 0);
    }
    omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("chunk decomposition") {
    CHECK(detail::chunk_count(1) == 1);
    CHECK(detail::chunk_count(kSimulationChunk) == 1);
    CHECK(detail::chunk_count(kSimulationChunk + 1) == 2);
    const ModelSpec m{NormalZeroMean{2.0}, signed_threshold(1.0)};
    const auto whole = serial::published_moments(m, 2 * kSimulationChunk, 5, FalseDefinition::NonPositive);
    const PublishedMoments parts[2] = {
        detail::chunk_moments(m, 0, kSimulationChunk, 5, FalseDefinition::NonPositive, nullptr),
        detail::chunk_moments(m, 1, kSimulationChunk, 5, FalseDefinition::NonPositive, nullptr)};
    CHECK(same_moments(whole, detail::pairwise_merge(parts)));
}

TEST_CASE("published t matches the truncated normal closed form") {
    const double sigma = 3.0, c = 2.0;
    const auto r = simulate(spec_for(NormalZeroMean{sigma}, signed_threshold(c), 200'000, 2024));
    std::vector<double> ts;
    for (const auto& i : r.published) ts.push_back(i.t);
    const double s = std::sqrt(1.0 + sigma * sigma);
    const double tail = oracle::Phi(-c / s);
    auto cdf = [&](double t) { return (oracle::Phi(t / s) - oracle::Phi(c / s)) / tail; };
    CHECK(oracle::ks_statistic(ts, cdf) < oracle::ks_critical_1pct(ts.size()));
}

TEST_CASE("absolute and signed rules give the same |t| law for symmetric priors") {
    for (const PriorSpec& p : {PriorSpec{NormalZeroMean{1.5}}, PriorSpec{ScaledStudentT{1.0, 4.0}}}) {
        const auto a = simulate(spec_for(p, absolute_threshold(2.0), 200'000, 1));
        const auto s = simulate(spec_for(p, signed_threshold(2.0), 200'000, 2));
        std::vector<double> xa, xs;
        for (const auto& i : a.published) xa.push_back(std::abs(i.t));
        for (const auto& i : s.published) xs.push_back(std::abs(i.t));
        CHECK(oracle::ks_two_sample(xa, xs) < oracle::ks_two_sample_critical_1pct(xa.size(), xs.size()));
    }
}

TEST_CASE("realized shrinkage converges") {
    const double target = 1.0 / (1.0 + 4.0);
    const double tol[] = {0.05, 0.02, 0.006};
    int i = 0;
    for (std::uint64_t n : {10'000ULL, 100'000ULL, 1'000'000ULL}) {
        const auto r = simulate(spec_for(NormalZeroMean{2.0}, signed_threshold(2.0), n, 31));
        CHECK(std::abs(r.realized_shrinkage - target) <= tol[i++]);
        CHECK(r.shrinkage_se > 0.0);
    }
}

TEST_CASE("scatter export") {
    SUBCASE("zero jitter reproduces theta") {
        const auto r = simulate(spec_for(PointMassMixture{0.5, 1.0}, absolute_threshold(1.96), 100'000, 5));
        const auto t = scatter_export(r, 0.0, RngStream(1, 1));
        REQUIRE(t.rows.size() == r.published.size());
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CHECK(t.rows[i].theta_jittered == r.published[i].theta);
            CHECK(t.rows[i].abs_t == std::abs(r.published[i].t));
        }
    }
    SUBCASE("jitter only touches atoms, with the requested sd") {
        const auto r = simulate(spec_for(PointMassMixture{0.9, 1.0}, absolute_threshold(0.0), 200'000, 6));
        const auto t = scatter_export(r, 0.1, RngStream(1, 2), {{"holm", 3.4}});
        double s = 0, ss = 0;
        std::size_t atoms = 0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (r.published[i].theta == 0.0) {
                s += t.rows[i].theta_jittered;
                ss += t.rows[i].theta_jittered * t.rows[i].theta_jittered;
                ++atoms;
            } else {
                CHECK(t.rows[i].theta_jittered == r.published[i].theta);
            }
        }
        REQUIRE(atoms >= 100000);
        const double sd = std::sqrt(ss / atoms - (s / atoms) * (s / atoms));
        CHECK(sd >= 0.095);
        CHECK(sd <= 0.105);
        REQUIRE(t.hurdles.size() == 1);
        CHECK(t.hurdles[0].first == "holm");
    }
    SUBCASE("continuous prior keeps one row per published idea") {
        const auto r = simulate(spec_for(NormalZeroMean{2.0}, signed_threshold(2.0), 50'000, 8));
        CHECK(scatter_export(r, 0.1, RngStream(1, 3)).rows.size() == r.n_published);
    }
    SUBCASE("negative jitter is rejected") {
        const auto r = simulate(spec_for(NormalZeroMean{2.0}, signed_threshold(2.0), 10'000, 8));
        CHECK_THROWS_AS(scatter_export(r, -0.1, RngStream(1, 3)), DomainError);
    }
}

TEST_CASE("simulation agrees with quadrature") {
    CHECK(compare_analytic(spec_for(NormalZeroMean{3.0}, signed_threshold(2.0), 1'000'000, 13)).agree);
    CHECK(compare_analytic(spec_for(NormalZeroMean{1.0}, signed_threshold(2.0), 1'000'000, 14)).agree);
    CHECK(compare_analytic(spec_for(PointMassMixture{0.5, 2.0}, absolute_threshold(2.0), 1'000'000, 15)).agree);

    // Negative control: simulate the signed rule, compare against the absolute one.
    const auto sim = spec_for(PointMassMixture{0.5, 2.0}, signed_threshold(2.0), 1'000'000, 16);
    const auto mismatched = compare_analytic(sim, ModelSpec{PointMassMixture{0.5, 2.0}, absolute_threshold(2.0)});
    CHECK_FALSE(mismatched.agree);
}
