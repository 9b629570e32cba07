#include <algorithm>

#include "pubbias/kernels.hpp"

namespace pubbias::omp {

PublishedMoments published_moments(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                                   FalseDefinition false_def) {
    const auto chunks = static_cast<std::int64_t>(detail::chunk_count(n_ideas));
    std::vector<PublishedMoments> parts(chunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::uint64_t start = static_cast<std::uint64_t>(c) * kSimulationChunk;
        const std::uint64_t n = std::min(kSimulationChunk, n_ideas - start);
        parts[c] = detail::chunk_moments(model, c, n, seed, false_def, nullptr);
    }
    return detail::pairwise_merge(parts);
}

PublishedDraws published_draws(const ModelSpec& model, std::uint64_t n_ideas, std::uint64_t seed,
                               FalseDefinition false_def) {
    const auto chunks = static_cast<std::int64_t>(detail::chunk_count(n_ideas));
    std::vector<PublishedMoments> parts(chunks);
    std::vector<std::vector<PublishedIdea>> ideas(chunks);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
        const std::uint64_t start = static_cast<std::uint64_t>(c) * kSimulationChunk;
        const std::uint64_t n = std::min(kSimulationChunk, n_ideas - start);
        parts[c] = detail::chunk_moments(model, c, n, seed, false_def, &ideas[c]);
    }
    PublishedDraws out;
    out.moments = detail::pairwise_merge(parts);
    std::size_t total = 0;
    for (const auto& v : ideas) total += v.size();
    out.ideas.reserve(total);
    for (const auto& v : ideas) out.ideas.insert(out.ideas.end(), v.begin(), v.end());
    return out;
}

std::vector<double> cluster_bootstrap(const MonthCells& cells, int n_boot, std::uint64_t seed,
                                      std::uint64_t stream_base) {
    std::vector<double> draws(n_boot);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < n_boot; ++b) draws[b] = detail::bootstrap_draw(cells, seed, stream_base + b);
    return draws;
}

}  // namespace pubbias::omp
