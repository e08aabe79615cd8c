#include "defadv/bayes.hpp"

#include <algorithm>

namespace defadv {

int bayes_query(const CostTable& table, int expert) {
  auto row = table.row(expert);
  int best = 0;
  for (int k = 1; k < static_cast<int>(row.size()); ++k) {
    if (row[k] < row[best]) best = k;
  }
  return best;
}

BayesDecision bayes_policy(const CostTable& table) {
  const ActionSpace sp = table.space();
  BayesDecision decision;
  decision.query.resize(sp.num_experts);
  double best_risk = 0.0;
  for (int j = 0; j < sp.num_experts; ++j) {
    const int k = bayes_query(table, j);
    decision.query[j] = k;
    const double risk = table.at(j, k);
    if (j == 0 || risk < best_risk) {
      best_risk = risk;
      decision.router = j;
    }
  }
  decision.executed = Action{decision.router, decision.query[decision.router]};
  decision.risk = best_risk;
  return decision;
}

AdviceWorth advice_worth(std::span<const double> task_losses,
                         std::span<const double> advice_fees) {
  if (task_losses.size() != advice_fees.size() || task_losses.empty()) {
    throw ValidationError("advice_worth: row and fee lengths must match");
  }
  if (advice_fees[0] != 0.0) {
    throw ValidationError("advice_worth: the no-advice fee must be 0");
  }
  AdviceWorth result;
  for (std::size_t k = 1; k < task_losses.size(); ++k) {
    // Strict inequality: an exact break-even source is not worth querying.
    if (task_losses[0] - task_losses[k] > advice_fees[k]) {
      result.worth = true;
      break;
    }
  }
  if (result.worth) {
    int best = 0;
    for (std::size_t k = 1; k < task_losses.size(); ++k) {
      if (task_losses[k] + advice_fees[k] <
          task_losses[best] + advice_fees[best]) {
        best = static_cast<int>(k);
      }
    }
    result.best_advice = best;
  }
  return result;
}

DominanceGap dominance_check(const CostTable& table) {
  const ActionSpace sp = table.space();
  DominanceGap gap;
  gap.risk_with_advice = table.at_flat(0);
  for (int i = 1; i < sp.num_actions(); ++i) {
    gap.risk_with_advice = std::min(gap.risk_with_advice, table.at_flat(i));
  }
  gap.risk_no_advice = table.at(0, 0);
  for (int j = 1; j < sp.num_experts; ++j) {
    gap.risk_no_advice = std::min(gap.risk_no_advice, table.at(j, 0));
  }
  return gap;
}

MismatchDecomposition mismatch_decompose(const CostTable& table) {
  const auto entries = table.entries();
  MismatchDecomposition d;
  d.max_cost = *std::max_element(entries.begin(), entries.end());
  d.weights.resize(entries.size());
  double total = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    d.weights[i] = d.max_cost - entries[i];
    total += entries[i];
  }
  d.offset = total - (static_cast<double>(entries.size()) - 1.0) * d.max_cost;
  return d;
}

double MismatchDecomposition::reconstruct(int flat_index) const {
  if (flat_index < 0 || flat_index >= static_cast<int>(weights.size())) {
    throw std::out_of_range("MismatchDecomposition: index out of range");
  }
  double sum_others = 0.0;
  for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
    if (i != flat_index) sum_others += weights[i];
  }
  return offset + sum_others;
}

WeightedReduction weighted_reduction(std::span<const double> mean_weights,
                                     double mean_offset) {
  if (mean_weights.empty()) {
    throw ValidationError("weighted_reduction: empty weight vector");
  }
  WeightedReduction r;
  r.offset = mean_offset;
  for (double w : mean_weights) {
    if (!(w >= 0.0)) {
      throw ValidationError("weighted_reduction: weights must be >= 0");
    }
    r.weight_mass += w;
  }
  r.label_distribution.resize(mean_weights.size());
  if (r.weight_mass > 0.0) {
    for (std::size_t i = 0; i < mean_weights.size(); ++i) {
      r.label_distribution[i] = mean_weights[i] / r.weight_mass;
    }
  } else {
    const double u = 1.0 / static_cast<double>(mean_weights.size());
    std::fill(r.label_distribution.begin(), r.label_distribution.end(), u);
  }
  return r;
}

}  // namespace defadv
