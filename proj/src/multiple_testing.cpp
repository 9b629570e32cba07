#include "pubbias/multiple_testing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pubbias/corrections.hpp"
#include "pubbias/errors.hpp"
#include "pubbias/normal.hpp"

namespace pubbias {

PValueSet::PValueSet(std::vector<PValueEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        if (!(e.p > 0.0 && e.p <= 1.0)) {
            throw DataError("p-value for '" + e.id + "' must lie in (0, 1], got " + std::to_string(e.p));
        }
        if (!seen.insert(e.id).second) throw DataError("duplicate id '" + e.id + "' in p-value set");
    }
    order_.resize(entries_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        if (entries_[a].p != entries_[b].p) return entries_[a].p < entries_[b].p;
        return entries_[a].id < entries_[b].id;
    });
}

std::string_view to_string(Procedure p) {
    switch (p) {
        case Procedure::Bonferroni: return "bonferroni";
        case Procedure::Holm: return "holm";
        case Procedure::BH1995: return "bh";
        case Procedure::BY2001: return "by";
    }
    return "unknown";
}

Procedure parse_procedure(std::string_view text) {
    if (text == "bonferroni") return Procedure::Bonferroni;
    if (text == "holm") return Procedure::Holm;
    if (text == "bh") return Procedure::BH1995;
    if (text == "by") return Procedure::BY2001;
    throw DataError("unknown method '" + std::string(text) + "' (expected bonferroni, holm, bh or by)");
}

namespace {

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("error-rate level must lie in (0, 1)");
}

std::vector<TestDecision> blank(const PValueSet& pvals, Procedure method, double level) {
    std::vector<TestDecision> out;
    out.reserve(pvals.size());
    for (const auto& e : pvals.entries()) out.push_back({e.id, e.p, 1.0, false, method, level});
    return out;
}

// Step-up at per-rank thresholds k*level/(m*c): shared by BH and BY.
std::vector<TestDecision> step_up(const PValueSet& pvals, double q, double harmonic, Procedure method) {
    check_level(q);
    auto out = blank(pvals, method, q);
    const auto& order = pvals.sorted_order();
    const std::size_t m = order.size();
    if (m == 0) return out;

    std::size_t k_max = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        const double p = pvals.entries()[order[k - 1]].p;
        if (p <= static_cast<double>(k) * q / (static_cast<double>(m) * harmonic)) k_max = k;
    }
    double running = 1.0;
    for (std::size_t k = m; k >= 1; --k) {
        const std::size_t i = order[k - 1];
        const double adj = harmonic * static_cast<double>(m) * out[i].p / static_cast<double>(k);
        running = std::min(running, adj);
        // m*p/m can round below p; the adjusted value never undercuts the raw one.
        out[i].adjusted_p = std::clamp(running, out[i].p, 1.0);
        out[i].rejected = k <= k_max;
    }
    return out;
}

}  // namespace

double tstat_to_pvalue(double t, Side side) {
    if (!std::isfinite(t)) throw DomainError("tstat_to_pvalue: t must be finite");
    return side == Side::Signed ? norm_sf(t) : 2.0 * norm_sf(std::abs(t));
}

std::vector<TestDecision> bonferroni(const PValueSet& pvals, double alpha) {
    check_level(alpha);
    auto out = blank(pvals, Procedure::Bonferroni, alpha);
    const double m = static_cast<double>(pvals.size());
    for (auto& d : out) {
        d.adjusted_p = std::min(1.0, m * d.p);
        d.rejected = d.p <= alpha / m;
    }
    return out;
}

std::vector<TestDecision> holm(const PValueSet& pvals, double alpha) {
    check_level(alpha);
    auto out = blank(pvals, Procedure::Holm, alpha);
    const auto& order = pvals.sorted_order();
    const std::size_t m = order.size();
    double running = 0.0;
    bool stopped = false;
    for (std::size_t k = 1; k <= m; ++k) {
        auto& d = out[order[k - 1]];
        const double factor = static_cast<double>(m - k + 1);
        running = std::max(running, factor * d.p);
        d.adjusted_p = std::min(1.0, running);
        if (!stopped && d.p <= alpha / factor) {
            d.rejected = true;
        } else {
            stopped = true;
        }
    }
    return out;
}

std::vector<TestDecision> bh_1995(const PValueSet& pvals, double q) {
    return step_up(pvals, q, 1.0, Procedure::BH1995);
}

std::vector<TestDecision> by_2001_thm13(const PValueSet& pvals, double q) {
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= pvals.size(); ++i) harmonic += 1.0 / static_cast<double>(i);
    return step_up(pvals, q, std::max(harmonic, 1.0), Procedure::BY2001);
}

std::vector<TestDecision> run_procedure(Procedure method, const PValueSet& pvals, double level) {
    switch (method) {
        case Procedure::Bonferroni: return bonferroni(pvals, level);
        case Procedure::Holm: return holm(pvals, level);
        case Procedure::BH1995: return bh_1995(pvals, level);
        case Procedure::BY2001: return by_2001_thm13(pvals, level);
    }
    throw DomainError("unknown procedure");
}

double bonferroni_hurdle(std::size_t m, double alpha, Side side) {
    check_level(alpha);
    if (m == 0) throw DomainError("bonferroni_hurdle: m must be positive");
    const double per_test = alpha / static_cast<double>(m);
    return side == Side::Signed ? -norm_quantile(per_test) : -norm_quantile(0.5 * per_test);
}

double hurdle_for_fdr(const PriorSpec& prior, double q, Side side, const QuadratureSpec& spec) {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("hurdle_for_fdr: q must lie in (0, 1]");
    CorrectionOptions options;
    options.quad = spec;
    auto fdr_at = [&](double h) { return fdr_pub(ModelSpec{prior, PublicationRule{side, h, 1.0}}, options).value; };

    constexpr double kLo = 0.0;
    constexpr double kHi = 10.0;
    constexpr double kTol = 1e-4;
    if (fdr_at(kLo) <= q) return kLo;
    double at_hi = 1.0;
    try {
        at_hi = fdr_at(kHi);
    } catch (const DomainError&) {
        // Nothing is published at the top of the range, so no finite hurdle works.
    }
    if (at_hi > q) {
        throw NumericError("hurdle_for_fdr: FDR " + std::to_string(q) + " is not attainable on [0, 10]", kHi);
    }
    double lo = kLo, hi = kHi;
    while (hi - lo > kTol) {
        const double mid = 0.5 * (lo + hi);
        if (fdr_at(mid) <= q) hi = mid; else lo = mid;
    }
    return hi;
}

}  // namespace pubbias
