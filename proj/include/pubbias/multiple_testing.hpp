#pragma once

#include <string>
#include <vector>

#include "pubbias/prior_models.hpp"
#include "pubbias/quadrature.hpp"
#include "pubbias/types.hpp"

namespace pubbias {

struct PValueEntry {
    std::string id;
    double p = 1.0;
};

/// p-values with unique ids. Sorted order is by (p, id) so ties resolve
/// deterministically.
class PValueSet {
public:
    PValueSet() = default;
    /// Throws DataError on p outside (0, 1] or a duplicate id.
    explicit PValueSet(std::vector<PValueEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::vector<PValueEntry>& entries() const noexcept { return entries_; }
    const std::vector<std::size_t>& sorted_order() const noexcept { return order_; }

private:
    std::vector<PValueEntry> entries_;
    std::vector<std::size_t> order_;
};

enum class Procedure { Bonferroni, Holm, BH1995, BY2001 };

std::string_view to_string(Procedure p);
Procedure parse_procedure(std::string_view text);

struct TestDecision {
    std::string id;
    double p = 1.0;
    double adjusted_p = 1.0;
    bool rejected = false;
    Procedure method = Procedure::Bonferroni;
    double level = 0.05;
};

double tstat_to_pvalue(double t, Side side);

// All procedures return decisions in input order.
std::vector<TestDecision> bonferroni(const PValueSet& pvals, double alpha);
std::vector<TestDecision> holm(const PValueSet& pvals, double alpha);
std::vector<TestDecision> bh_1995(const PValueSet& pvals, double q);
/// Benjamini-Yekutieli Theorem 1.3: BH at level q / sum_{i<=m} 1/i.
std::vector<TestDecision> by_2001_thm13(const PValueSet& pvals, double q);
std::vector<TestDecision> run_procedure(Procedure method, const PValueSet& pvals, double level);

/// The |t| (or t) equivalent of a Bonferroni test over m hypotheses.
double bonferroni_hurdle(std::size_t m, double alpha, Side side);

/// Smallest cutoff h in [0, 10] with fdr_pub(prior, threshold h) <= q, found
/// by bisection to 1e-4. Throws NumericError when q is unattainable on [0, 10].
double hurdle_for_fdr(const PriorSpec& prior, double q, Side side, const QuadratureSpec& spec = {});

}  // namespace pubbias
