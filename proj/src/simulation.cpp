#include "pubbias/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pubbias/errors.hpp"

namespace pubbias {

void SimulationSpec::validate() const {
    model.validate();
    if (n_ideas < 1) throw DomainError("n_ideas must be >= 1");
    if (!(noise_on_false >= 0.0)) throw DomainError("noise_on_false must be >= 0");
}

SimulationResult summarize(const PublishedMoments& m, Side side) {
    SimulationResult r;
    r.side = side;
    r.n_ideas = m.n_ideas;
    r.n_published = m.n_published;
    if (m.n_published == 0) return r;
    const double np = static_cast<double>(m.n_published);
    const double mt = m.sum_t / np;
    const double mz = m.sum_z / np;
    const double var_t = std::max(m.sum_tt / np - mt * mt, 0.0);
    const double var_z = std::max(m.sum_zz / np - mz * mz, 0.0);
    const double cov = m.sum_tz / np - mt * mz;
    r.realized_shrinkage = mz / mt;
    const double ratio = r.realized_shrinkage;
    r.shrinkage_se = std::sqrt(std::max(var_z - 2.0 * ratio * cov + ratio * ratio * var_t, 0.0) / (np * mt * mt));
    r.realized_fdr = static_cast<double>(m.n_false) / np;
    r.fdr_se = std::sqrt(r.realized_fdr * (1.0 - r.realized_fdr) / np);
    r.pub_rate = np / static_cast<double>(m.n_ideas);
    return r;
}

SimulationResult simulate(const SimulationSpec& spec) {
    spec.validate();
    PublishedDraws draws = omp::published_draws(spec.model, spec.n_ideas, spec.seed, FalseDefinition::NonPositive);
    if (draws.moments.n_published == 0) {
        throw NumericError("simulation published none of " + std::to_string(spec.n_ideas) +
                               " ideas; increase n_ideas",
                           0.0);
    }
    SimulationResult r = summarize(draws.moments, spec.model.rule.side);
    r.published = std::move(draws.ideas);
    return r;
}

ScatterTable scatter_export(const SimulationResult& result, double jitter, RngStream rng,
                            std::vector<std::pair<std::string, double>> hurdles) {
    if (!(jitter >= 0.0)) throw DomainError("scatter_export: jitter must be >= 0");
    ScatterTable table;
    table.rows.reserve(result.published.size());
    for (const auto& idea : result.published) {
        double theta = idea.theta;
        if (theta == 0.0 && jitter > 0.0) theta = jitter * rng.normal();
        table.rows.push_back({theta, std::abs(idea.t)});
    }
    table.hurdles = std::move(hurdles);
    return table;
}

AnalyticComparison compare_analytic(const SimulationSpec& spec) { return compare_analytic(spec, spec.model); }

AnalyticComparison compare_analytic(const SimulationSpec& spec, const ModelSpec& reference) {
    spec.validate();
    const PublishedMoments m =
        omp::published_moments(spec.model, spec.n_ideas, spec.seed, FalseDefinition::NonPositive);
    if (m.n_published == 0) throw NumericError("compare_analytic: nothing published", 0.0);
    const SimulationResult sim = summarize(m, spec.model.rule.side);
    const PublicationSummary exact = publication_summary(reference, {});

    AnalyticComparison c;
    c.realized_shrinkage = sim.realized_shrinkage;
    c.shrinkage_se = sim.shrinkage_se;
    c.analytic_shrinkage = exact.shrinkage.value;
    c.realized_fdr = sim.realized_fdr;
    c.fdr_se = sim.fdr_se;
    c.analytic_fdr = exact.fdr.value;
    auto z = [](double diff, double se) {
        if (se > 0.0) return diff / se;
        return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    };
    c.shrinkage_z = z(c.realized_shrinkage - c.analytic_shrinkage, c.shrinkage_se);
    c.fdr_z = z(c.realized_fdr - c.analytic_fdr, c.fdr_se);
    c.agree = std::abs(c.shrinkage_z) <= 4.0 && std::abs(c.fdr_z) <= 4.0;
    return c;
}

}  // namespace pubbias
