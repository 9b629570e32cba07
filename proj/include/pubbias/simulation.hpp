#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pubbias/corrections.hpp"
#include "pubbias/kernels.hpp"
#include "pubbias/prior_models.hpp"

namespace pubbias {

struct SimulationSpec {
    ModelSpec model;
    std::uint64_t n_ideas = 1'000'000;
    std::uint64_t seed = 0;
    // Visual jitter for atoms at zero in scatter exports.
    double noise_on_false = 0.0;

    void validate() const;
};

struct SimulationResult {
    std::vector<PublishedIdea> published;
    std::uint64_t n_ideas = 0;
    std::uint64_t n_published = 0;
    double realized_shrinkage = 0.0;
    double shrinkage_se = 0.0;
    double realized_fdr = 0.0;
    double fdr_se = 0.0;
    double pub_rate = 0.0;
    Side side = Side::Signed;
};

/// theta from the prior, t = theta + N(0,1), kept when the rule passes.
/// Deterministic given the seed. Throws NumericError when nothing is published.
SimulationResult simulate(const SimulationSpec& spec);

/// Reduces a moment accumulator to realized shrinkage/FDR with delta-method
/// standard errors.
SimulationResult summarize(const PublishedMoments& m, Side side);

struct ScatterRow {
    double theta_jittered = 0.0;
    double abs_t = 0.0;
};

struct ScatterTable {
    std::vector<ScatterRow> rows;
    std::vector<std::pair<std::string, double>> hurdles;
};

/// N(0, jitter^2) noise is added only to ideas with theta exactly 0.
ScatterTable scatter_export(const SimulationResult& result, double jitter, RngStream rng,
                            std::vector<std::pair<std::string, double>> hurdles = {});

struct AnalyticComparison {
    double realized_shrinkage = 0.0;
    double shrinkage_se = 0.0;
    double analytic_shrinkage = 0.0;
    double realized_fdr = 0.0;
    double fdr_se = 0.0;
    double analytic_fdr = 0.0;
    double shrinkage_z = 0.0;
    double fdr_z = 0.0;
    bool agree = false;  // both |z| <= 4
};

AnalyticComparison compare_analytic(const SimulationSpec& spec);
/// Simulates spec but evaluates the quadrature side under `reference`.
AnalyticComparison compare_analytic(const SimulationSpec& spec, const ModelSpec& reference);

}  // namespace pubbias
