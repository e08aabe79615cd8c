#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "defadv/core.hpp"
#include "defadv/losses.hpp"
#include "defadv/mlp.hpp"

namespace defadv {

enum class Method { augmented, l2d, separated };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class Scheduler { none, cosine_warmup };

/// Hyperparameters of one training run. Deterministic given the seed:
/// init, minibatch order and every update are derived from it.
struct TrainConfig {
  double learning_rate = 3e-3;
  double weight_decay = 0.0;
  double grad_clip_norm = 10.0;
  int epochs = 120;
  int batch_size = 256;
  double tau = 1.0;
  std::uint64_t seed = 0;
  Scheduler scheduler = Scheduler::none;
  double warmup_fraction = 0.05;
  std::vector<int> hidden_dims = {32, 32};
  HeadKind head = HeadKind::plain;

  void validate() const;
};

/// A trained scorer with its full provenance: method tag, architecture,
/// config snapshot and flat parameter vector.
struct TrainedPolicy {
  Method method = Method::augmented;
  ActionSpace space{};
  NetConfig net{};
  TrainConfig config{};
  std::vector<double> params;
  std::vector<double> epoch_losses;  // mean minibatch loss per epoch

  std::vector<double> scores(std::span<const double> x) const;
  Action act(std::span<const double> x) const;
};

/// Reusable forward-pass wrapper for evaluation loops; building one avoids
/// reconstructing the network per instance.
class PolicyRunner {
 public:
  explicit PolicyRunner(const TrainedPolicy& policy);

  std::vector<double> scores(std::span<const double> x) const;
  Action act(std::span<const double> x) const;

 private:
  ScorerNet net_;
  Method method_;
  ActionSpace space_;
};

/// Composite training: weights come from the mismatch decomposition of
/// each example's realized cost table and feed the comp-sum surrogate.
TrainedPolicy train_augmented(const Dataset& data, const TrainConfig& config);

/// Standard deferral baseline: the same pipeline restricted to the k=0
/// column (J actions, weights from the column's decomposition).
TrainedPolicy train_l2d(const Dataset& data, const TrainConfig& config);

/// Exact binary separated baseline (J=2, K=1): one shared backbone with a
/// three-score head trained under the logistic separated surrogate.
TrainedPolicy train_separated(const Dataset& data, const TrainConfig& config);

TrainedPolicy train_policy(Method method, const Dataset& data,
                           const TrainConfig& config);

/// Argmax over composite actions; ties break to the smallest flat index.
Action decode_composite(std::span<const double> scores, ActionSpace space);

/// Binary separated decode: expert 1 iff the router score is >= 0
/// (boundary inclusive), advice from the routed expert's own query score.
Action decode_separated(const SeparatedScores& scores);

}  // namespace defadv
