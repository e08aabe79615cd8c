#pragma once

#include <span>
#include <vector>

#include "defadv/core.hpp"

namespace defadv {

/// Exact pointwise optimum of a cost table: the query picks each row's best
/// advice, the router picks the best optimally-advised expert.
struct BayesDecision {
  int router = 0;               // j*
  std::vector<int> query;       // q*[j], one advice index per expert
  Action executed{};            // (j*, q*[j*])
  double risk = 0.0;            // table minimum
};

/// Row-wise best advice for expert `expert`; ties break to the smallest k.
int bayes_query(const CostTable& table, int expert);

/// Full Bayes decision; ties break to the smallest flat index.
BayesDecision bayes_policy(const CostTable& table);

/// Is any advice source worth its fee for this expert row?
/// `task_losses` holds the conditional task losses (length K+1, entry 0 is
/// the no-advice loss); `advice_fees` the effective fees (gamma[0] = 0).
struct AdviceWorth {
  bool worth = false;
  int best_advice = 0;
};
AdviceWorth advice_worth(std::span<const double> task_losses,
                         std::span<const double> advice_fees);

/// Minimum over the full composite space versus the no-advice column.
/// The first component never exceeds the second.
struct DominanceGap {
  double risk_with_advice = 0.0;
  double risk_no_advice = 0.0;
};
DominanceGap dominance_check(const CostTable& table);

/// Loss rewritten as an action-independent offset plus weighted mismatch
/// indicators:  cost_i = offset + sum_{i' != i} weights[i'].
struct MismatchDecomposition {
  double max_cost = 0.0;         // M
  double offset = 0.0;           // D = sum_i c_i - (|Pi|-1) M
  std::vector<double> weights;   // w_i = M - c_i >= 0

  double weight_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  /// D + sum_{i' != i} w_{i'}; equals cost_i exactly.
  double reconstruct(int flat_index) const;
};
MismatchDecomposition mismatch_decompose(const CostTable& table);

/// Conditional weights renormalized into a label distribution on the
/// composite space; degenerate zero mass yields the uniform distribution.
struct WeightedReduction {
  double weight_mass = 0.0;                 // ||w||_1
  std::vector<double> label_distribution;   // p, sums to 1
  double offset = 0.0;                      // d
};
WeightedReduction weighted_reduction(std::span<const double> mean_weights,
                                     double mean_offset);

}  // namespace defadv
