#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defadv/common.hpp"

namespace defadv {

/// Composite action set [J] x {0..K}. Advice index 0 means "no advice",
/// so there are J*(K+1) executed pairs.
struct ActionSpace {
  int num_experts = 1;  // J
  int num_advice = 0;   // K

  int num_actions() const { return num_experts * (num_advice + 1); }

  void validate() const {
    if (num_experts < 1) throw ValidationError("ActionSpace: J must be >= 1");
    if (num_advice < 0) throw ValidationError("ActionSpace: K must be >= 0");
  }

  bool operator==(const ActionSpace& o) const {
    return num_experts == o.num_experts && num_advice == o.num_advice;
  }
};

/// One executed expert-advice pair (expert j, advice k). 0-based.
struct Action {
  int expert = 0;
  int advice = 0;

  bool operator==(const Action& o) const {
    return expert == o.expert && advice == o.advice;
  }
};

/// Expert-major flat index j*(K+1)+k. Throws on out-of-range actions.
int flatten(Action a, ActionSpace space);
Action unflatten(int index, ActionSpace space);

/// Per-instance J x (K+1) matrix of executed costs, uniformly bounded by C.
class CostTable {
 public:
  CostTable() = default;
  CostTable(ActionSpace space, std::vector<double> costs, double bound);

  /// Builds a table from rows; bound defaults to the max entry.
  static CostTable from_rows(const std::vector<std::vector<double>>& rows,
                             std::optional<double> bound = std::nullopt);

  const ActionSpace& space() const { return space_; }
  double bound() const { return bound_; }
  int num_actions() const { return space_.num_actions(); }

  double at(int expert, int advice) const;
  double at_flat(int index) const { return costs_[check_flat(index)]; }
  std::span<const double> entries() const { return costs_; }
  std::span<const double> row(int expert) const;

 private:
  int check_flat(int index) const;

  ActionSpace space_{};
  std::vector<double> costs_{};
  double bound_ = 0.0;
};

/// Realized cost of executing `action`: the double indicator of the
/// deferral-advice loss selects exactly this entry.
double true_loss(Action action, const CostTable& table);

/// Additive decomposition of executed costs:
///   cost[j][k] = task_loss[j][k] + expert_fees[j] + multiplier * advice_fees[k].
struct CostComponents {
  std::vector<std::vector<double>> task_loss;  // J x (K+1), entries in [0,1]
  std::vector<double> expert_fees;             // beta, length J, >= 0
  std::vector<double> advice_fees;             // gamma_base, length K+1, [0]=0
  double cost_multiplier = 1.0;                // lambda >= 0

  ActionSpace space() const;
  void validate() const;
};

/// Assembles the executed-cost table. Bound is 1 + max fee + lambda * max
/// advice fee, carried explicitly.
CostTable assemble_cost_table(const CostComponents& components);

/// At most one advice slot is ever revealed; the rest stay masked.
struct MaskedAdvice {
  std::vector<std::optional<std::string>> slots;  // length K

  int present_count() const {
    int c = 0;
    for (const auto& s : slots) c += s.has_value() ? 1 : 0;
    return c;
  }
};

/// Masking operator: k=0 reveals nothing, k in [1..K] reveals slot k-1 only.
MaskedAdvice mask_advice(const std::vector<std::string>& full_advice, int k);

/// In-memory training/evaluation data: features plus one realized cost
/// table per instance (all sharing one action space).
struct Dataset {
  ActionSpace space{};
  int num_instances = 0;
  int feature_dim = 0;
  std::vector<double> features;  // n x d, row-major
  std::vector<double> costs;     // n x J*(K+1), row-major
  double cost_bound = 1.0;
  std::vector<int> region_tags;  // empty, or length n
  std::optional<CostComponents> components;

  void validate() const;
  bool has_regions() const {
    return static_cast<int>(region_tags.size()) == num_instances &&
           num_instances > 0;
  }

  std::span<const double> feature_row(int i) const {
    return {features.data() + static_cast<std::size_t>(i) * feature_dim,
            static_cast<std::size_t>(feature_dim)};
  }
  std::span<const double> cost_row(int i) const {
    const int a = space.num_actions();
    return {costs.data() + static_cast<std::size_t>(i) * a,
            static_cast<std::size_t>(a)};
  }
  CostTable cost_table(int i) const;
};

}  // namespace defadv
