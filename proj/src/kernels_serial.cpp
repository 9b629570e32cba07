#include <algorithm>
#include "pubbias/kernels.hpp"

namespace pubbias::serial {

PublishedMoments published_moments(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                                   FalseDefinition false_def) {
    const std::uint64_t chunks = detail::chunk_count(n_ideas);
    std::vector<PublishedMoments> parts(chunks);
    for (std::uint64_t c = 0; c < chunks; ++c) {
        const std::uint64_t n = std::min(kSimulationChunk, n_ideas - c * kSimulationChunk);
        parts[c] = detail::chunk_moments(model, c, n, seed, false_def, nullptr);
    }
    return detail::pairwise_merge(parts);
}

PublishedDraws published_draws(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                               FalseDefinition false_def) {
    const std::uint64_t chunks = detail::chunk_count(n_ideas);
    std::vector<PublishedMoments> parts(chunks);
    PublishedDraws out;
    for (std::uint64_t c = 0; c < chunks; ++c) {
        const std::uint64_t n = std::min(kSimulationChunk, n_ideas - c * kSimulationChunk);
        parts[c] = detail::chunk_moments(model, c, n, seed, false_def, &out.ideas);
    }
    out.moments = detail::pairwise_merge(parts);
    return out;
}

std::vector<double> cluster_bootstrap(const MonthCells& cells, int n_boot, std::uint64_t seed,
                                      std::uint64_t stream_base) {
    std::vector<double> draws(n_boot);
    for (int b = 0; b < n_boot; ++b) draws[b] = detail::bootstrap_draw(cells, seed, stream_base + b);
    return draws;
}

}  // namespace pubbias::serial
