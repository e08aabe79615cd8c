#include "defadv/core.hpp"

#include <algorithm>
#include <cmath>

namespace defadv {

int flatten(Action a, ActionSpace space) {
  space.validate();
  if (a.expert < 0 || a.expert >= space.num_experts || a.advice < 0 ||
      a.advice > space.num_advice) {
    throw std::out_of_range("flatten: action outside the action space");
  }
  return a.expert * (space.num_advice + 1) + a.advice;
}

Action unflatten(int index, ActionSpace space) {
  space.validate();
  if (index < 0 || index >= space.num_actions()) {
    throw std::out_of_range("unflatten: flat index outside the action space");
  }
  const int width = space.num_advice + 1;
  return Action{index / width, index % width};
}

CostTable::CostTable(ActionSpace space, std::vector<double> costs, double bound)
    : space_(space), costs_(std::move(costs)), bound_(bound) {
  space_.validate();
  if (static_cast<int>(costs_.size()) != space_.num_actions()) {
    throw ValidationError("CostTable: entry count does not match J*(K+1)");
  }
  if (!(bound_ > 0.0)) {
    throw ValidationError("CostTable: bound C must be positive");
  }
  for (double c : costs_) {
    if (!std::isfinite(c) || c < 0.0 || c > bound_ * (1.0 + 1e-12) + 1e-12) {
      throw ValidationError("CostTable: entries must lie in [0, C]");
    }
  }
}

CostTable CostTable::from_rows(const std::vector<std::vector<double>>& rows,
                               std::optional<double> bound) {
  if (rows.empty() || rows.front().empty()) {
    throw ValidationError("CostTable: empty table");
  }
  ActionSpace space{static_cast<int>(rows.size()),
                    static_cast<int>(rows.front().size()) - 1};
  std::vector<double> flat;
  flat.reserve(space.num_actions());
  double max_entry = 0.0;
  for (const auto& row : rows) {
    if (row.size() != rows.front().size()) {
      throw ValidationError("CostTable: ragged rows");
    }
    for (double c : row) {
      flat.push_back(c);
      max_entry = std::max(max_entry, c);
    }
  }
  return CostTable(space, std::move(flat),
                   bound.value_or(std::max(max_entry, 1e-300)));
}

int CostTable::check_flat(int index) const {
  if (index < 0 || index >= space_.num_actions()) {
    throw std::out_of_range("CostTable: flat index out of range");
  }
  return index;
}

double CostTable::at(int expert, int advice) const {
  return costs_[flatten(Action{expert, advice}, space_)];
}

std::span<const double> CostTable::row(int expert) const {
  if (expert < 0 || expert >= space_.num_experts) {
    throw std::out_of_range("CostTable: expert index out of range");
  }
  const int width = space_.num_advice + 1;
  return {costs_.data() + static_cast<std::size_t>(expert) * width,
          static_cast<std::size_t>(width)};
}

double true_loss(Action action, const CostTable& table) {
  return table.at_flat(flatten(action, table.space()));
}

ActionSpace CostComponents::space() const {
  if (task_loss.empty() || task_loss.front().empty()) {
    throw ValidationError("CostComponents: empty task-loss matrix");
  }
  return ActionSpace{static_cast<int>(task_loss.size()),
                     static_cast<int>(task_loss.front().size()) - 1};
}

void CostComponents::validate() const {
  const ActionSpace sp = space();
  if (static_cast<int>(expert_fees.size()) != sp.num_experts) {
    throw ValidationError("CostComponents: expert fee count != J");
  }
  if (static_cast<int>(advice_fees.size()) != sp.num_advice + 1) {
    throw ValidationError("CostComponents: advice fee count != K+1");
  }
  if (advice_fees[0] != 0.0) {
    throw ValidationError("CostComponents: advice_fees[0] must be 0");
  }
  if (cost_multiplier < 0.0) {
    throw ValidationError("CostComponents: cost multiplier must be >= 0");
  }
  for (double b : expert_fees) {
    if (!(b >= 0.0)) throw ValidationError("CostComponents: negative expert fee");
  }
  for (double g : advice_fees) {
    if (!(g >= 0.0)) throw ValidationError("CostComponents: negative advice fee");
  }
  for (const auto& row : task_loss) {
    if (static_cast<int>(row.size()) != sp.num_advice + 1) {
      throw ValidationError("CostComponents: ragged task-loss matrix");
    }
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("CostComponents: task losses must lie in [0,1]");
      }
    }
  }
}

CostTable assemble_cost_table(const CostComponents& components) {
  components.validate();
  const ActionSpace sp = components.space();
  double max_beta = 0.0, max_gamma = 0.0;
  for (double b : components.expert_fees) max_beta = std::max(max_beta, b);
  for (double g : components.advice_fees) max_gamma = std::max(max_gamma, g);
  const double bound = 1.0 + max_beta + components.cost_multiplier * max_gamma;

  std::vector<double> flat;
  flat.reserve(sp.num_actions());
  for (int j = 0; j < sp.num_experts; ++j) {
    for (int k = 0; k <= sp.num_advice; ++k) {
      flat.push_back(components.task_loss[j][k] + components.expert_fees[j] +
                     components.cost_multiplier * components.advice_fees[k]);
    }
  }
  return CostTable(sp, std::move(flat), bound);
}

MaskedAdvice mask_advice(const std::vector<std::string>& full_advice, int k) {
  const int K = static_cast<int>(full_advice.size());
  if (k < 0 || k > K) {
    throw std::out_of_range("mask_advice: advice index out of range");
  }
  MaskedAdvice masked;
  masked.slots.assign(K, std::nullopt);
  if (k >= 1) masked.slots[k - 1] = full_advice[k - 1];
  return masked;
}

void Dataset::validate() const {
  space.validate();
  if (num_instances < 0) throw ValidationError("Dataset: negative size");
  if (static_cast<std::size_t>(num_instances) *
          static_cast<std::size_t>(feature_dim) != features.size()) {
    throw ValidationError("Dataset: feature buffer does not match n x d");
  }
  if (static_cast<std::size_t>(num_instances) *
          static_cast<std::size_t>(space.num_actions()) != costs.size()) {
    throw ValidationError("Dataset: cost buffer does not match n x J*(K+1)");
  }
  if (!region_tags.empty() &&
      static_cast<int>(region_tags.size()) != num_instances) {
    throw ValidationError("Dataset: region tag count does not match n");
  }
}

CostTable Dataset::cost_table(int i) const {
  if (i < 0 || i >= num_instances) {
    throw std::out_of_range("Dataset: instance index out of range");
  }
  auto row = cost_row(i);
  return CostTable(space, std::vector<double>(row.begin(), row.end()),
                   cost_bound);
}

}  // namespace defadv
