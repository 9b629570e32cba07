#include <algorithm>

#include "pubbias/kernels.hpp"

namespace pubbias {

void PublishedMoments::merge(const PublishedMoments& other) {
    n_ideas += other.n_ideas;
    n_published += other.n_published;
    n_false += other.n_false;
    sum_t += other.sum_t;
    sum_z += other.sum_z;
    sum_tt += other.sum_tt;
    sum_zz += other.sum_zz;
    sum_tz += other.sum_tz;
}

namespace detail {

std::uint64_t chunk_count(std::uint64_t n_ideas) { return (n_ideas + kSimulationChunk - 1) / kSimulationChunk; }

PublishedMoments chunk_moments(const ModelSpec& model, std::uint64_t chunk, std::uint64_t n_in_chunk,
                               std::uint64_t seed, FalseDefinition false_def,
                               std::vector<PublishedIdea>* ideas) {
    RngStream rng(seed, chunk);
    const PublicationRule& rule = model.rule;
    const bool thinning = rule.base_prob < 1.0;
    PublishedMoments m;
    m.n_ideas = n_in_chunk;
    for (std::uint64_t i = 0; i < n_in_chunk; ++i) {
        const double theta = draw_prior(model.prior, rng);
        const double z = rng.normal();
        const double t = theta + z;
        bool pub = rule.passes(t);
        if (thinning) pub = (rng.uniform() < rule.base_prob) && pub;
        if (!pub) continue;
        const double sign = (rule.side == Side::Absolute && t < 0.0) ? -1.0 : 1.0;
        const double to = sign * t;
        const double zo = sign * z;
        const double tho = sign * theta;
        ++m.n_published;
        const bool is_false = false_def == FalseDefinition::NonPositive ? tho <= 0.0 : theta == 0.0;
        if (is_false) ++m.n_false;
        m.sum_t += to;
        m.sum_z += zo;
        m.sum_tt += to * to;
        m.sum_zz += zo * zo;
        m.sum_tz += to * zo;
        if (ideas) ideas->push_back({theta, t});
    }
    return m;
}

PublishedMoments pairwise_merge(std::span<const PublishedMoments> parts) {
    if (parts.empty()) return {};
    if (parts.size() == 1) return parts[0];
    const std::size_t half = parts.size() / 2;
    PublishedMoments left = pairwise_merge(parts.first(half));
    left.merge(pairwise_merge(parts.subspan(half)));
    return left;
}

double bootstrap_draw(const MonthCells& cells, std::uint64_t seed, std::uint64_t stream) {
    RngStream rng(seed, stream);
    const std::uint64_t n = cells.sum.size();
    double sum = 0.0;
    double count = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t k = rng.uniform_index(n);
        sum += cells.sum[k];
        count += cells.count[k];
    }
    return sum / count;
}

}  // namespace detail
}  // namespace pubbias
