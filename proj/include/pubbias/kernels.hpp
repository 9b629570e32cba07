#pragma once

// Data-parallel Monte Carlo and bootstrap kernels. Each kernel has a serial
// reference implementation and an OpenMP one; both split work into fixed
// chunks with one RngStream per chunk and reduce partial results in chunk
// order, so the two produce bit-identical output for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "pubbias/prior_models.hpp"

namespace pubbias {

enum class FalseDefinition { NonPositive, StrictZero };

inline constexpr std::uint64_t kSimulationChunk = 65536;

/// Sums over published ideas. On the absolute side every quantity is
/// oriented by sign(t): t -> |t|, z -> sign(t) z, theta -> sign(t) theta.
struct PublishedMoments {
    std::uint64_t n_ideas = 0;
    std::uint64_t n_published = 0;
    std::uint64_t n_false = 0;
    double sum_t = 0.0;
    double sum_z = 0.0;
    double sum_tt = 0.0;
    double sum_zz = 0.0;
    double sum_tz = 0.0;

    void merge(const PublishedMoments& other);
};

struct PublishedIdea {
    double theta = 0.0;  // as drawn (not sign-oriented)
    double t = 0.0;
};

struct PublishedDraws {
    std::vector<PublishedIdea> ideas;  // chunk order, draw order within chunk
    PublishedMoments moments;
};

/// Resampling input for the month-cluster bootstrap: per calendar month, the
/// sum and count of the cells falling in the window.
struct MonthCells {
    std::vector<double> sum;
    std::vector<double> count;
};

// cluster_bootstrap returns the pooled mean of each of n_boot draws; draw b
// resamples months with replacement from RngStream(seed, stream_base + b).
namespace serial {
PublishedMoments published_moments(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                                   FalseDefinition false_def);
PublishedDraws published_draws(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                               FalseDefinition false_def);
std::vector<double> cluster_bootstrap(const MonthCells& cells, int n_boot, std::uint64_t seed,
                                      std::uint64_t stream_base = 0);
}  // namespace serial

namespace omp {
PublishedMoments published_moments(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                                   FalseDefinition false_def);
PublishedDraws published_draws(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                               FalseDefinition false_def);
std::vector<double> cluster_bootstrap(const MonthCells& cells, int n_boot, std::uint64_t seed,
                                      std::uint64_t stream_base = 0);
}  // namespace omp

namespace detail {
// Shared by both implementations.
PublishedMoments chunk_moments(const ModelSpec& model, std::uint64_t chunk, std::uint64_t n_in_chunk,
                               std::uint64_t seed, FalseDefinition false_def,
                               std::vector<PublishedIdea>* ideas);
PublishedMoments pairwise_merge(std::span<const PublishedMoments> parts);
double bootstrap_draw(const MonthCells& cells, std::uint64_t seed, std::uint64_t stream);
std::uint64_t chunk_count(std::uint64_t n_ideas);
}  // namespace detail

}  // namespace pubbias
