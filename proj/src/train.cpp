#include "defadv/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "defadv/bayes.hpp"

namespace defadv {

std::string method_name(Method m) {
  switch (m) {
    case Method::augmented: return "augmented";
    case Method::l2d: return "l2d";
    case Method::separated: return "separated";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "augmented") return Method::augmented;
  if (name == "l2d") return Method::l2d;
  if (name == "separated") return Method::separated;
  throw ValidationError("unknown method: " + name);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("TrainConfig: lr must be > 0");
  if (!(weight_decay >= 0.0)) throw ValidationError("TrainConfig: weight decay must be >= 0");
  if (!(grad_clip_norm > 0.0)) throw ValidationError("TrainConfig: clip norm must be > 0");
  if (epochs < 0) throw ValidationError("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("TrainConfig: batch size must be >= 1");
  if (!(tau >= 0.0)) throw ValidationError("TrainConfig: tau must be >= 0");
  if (hidden_dims.empty()) throw ValidationError("TrainConfig: need a hidden layer");
  if (scheduler == Scheduler::cosine_warmup &&
      !(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) {
    throw ValidationError("TrainConfig: warmup fraction must lie in [0,1]");
  }
}

Action decode_composite(std::span<const double> scores, ActionSpace space) {
  if (static_cast<int>(scores.size()) != space.num_actions()) {
    throw ValidationError("decode_composite: score count != |Pi|");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return unflatten(best, space);
}

Action decode_separated(const SeparatedScores& s) {
  const int expert = s.router >= 0.0 ? 1 : 0;
  const double q = expert == 0 ? s.query_1 : s.query_2;
  return Action{expert, q >= 0.0 ? 1 : 0};
}

namespace {

double scheduled_lr(const TrainConfig& cfg, std::int64_t step,
                    std::int64_t total_steps) {
  if (cfg.scheduler == Scheduler::none || total_steps <= 0) {
    return cfg.learning_rate;
  }
  const auto warmup = static_cast<std::int64_t>(
      std::llround(cfg.warmup_fraction * static_cast<double>(total_steps)));
  if (warmup > 0 && step <= warmup) {
    return cfg.learning_rate * static_cast<double>(step) /
           static_cast<double>(warmup);
  }
  const double progress =
      total_steps == warmup
          ? 1.0
          : static_cast<double>(step - warmup) /
                static_cast<double>(total_steps - warmup);
  constexpr double kPi = 3.14159265358979323846;
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(kPi * progress));
}

struct RunningLoss {
  double sum = 0.0;
  std::int64_t count = 0;
};

/// Shared minibatch loop; `score_grad` maps (instance, scores) to the
/// per-example loss and fills d(loss)/d(scores).
template <typename ScoreGrad>
TrainedPolicy run_training(Method method, const Dataset& data,
                           const TrainConfig& cfg, NetConfig net_cfg,
                           ScoreGrad&& score_grad) {
  cfg.validate();
  data.validate();
  if (data.num_instances == 0) {
    throw ValidationError("training: empty dataset");
  }

  ScorerNet net = ScorerNet::initialized(net_cfg, split_seed(cfg.seed, 1));
  Rng shuffle_rng(split_seed(cfg.seed, 2));

  const int n = data.num_instances;
  const int out_dim = net_cfg.output_dim();
  const int in_dim = net_cfg.input_dim;
  const std::int64_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::int64_t total_steps = batches_per_epoch * cfg.epochs;

  AdamWConfig opt{cfg.learning_rate, cfg.weight_decay, 0.9, 0.999, 1e-8,
                  cfg.grad_clip_norm};
  AdamWState state(net.param_count());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> batch_x(static_cast<std::size_t>(cfg.batch_size) * in_dim);
  std::vector<double> dscores(static_cast<std::size_t>(cfg.batch_size) * out_dim);
  std::vector<double> grad(net.param_count());
  ScorerNet::Cache cache;

  std::vector<double> epoch_losses;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    RunningLoss epoch_loss;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int batch = std::min(cfg.batch_size, n - start);
      for (int b = 0; b < batch; ++b) {
        const auto row = data.feature_row(order[start + b]);
        std::copy(row.begin(), row.end(),
                  batch_x.begin() + static_cast<std::size_t>(b) * in_dim);
      }
      net.forward_batch(batch_x, batch, cache);

      const double inv_batch = 1.0 / static_cast<double>(batch);
      for (int b = 0; b < batch; ++b) {
        std::span<double> ds(dscores.data() + static_cast<std::size_t>(b) * out_dim,
                             out_dim);
        std::span<const double> sc(
            cache.scores.data() + static_cast<std::size_t>(b) * out_dim, out_dim);
        const double loss = score_grad(order[start + b], sc, ds);
        for (double& g : ds) g *= inv_batch;
        epoch_loss.sum += loss;
        epoch_loss.count += 1;
      }

      std::fill(grad.begin(), grad.end(), 0.0);
      net.backward_batch(batch_x, batch, cache,
                         std::span<const double>(dscores.data(),
                                                 static_cast<std::size_t>(batch) * out_dim),
                         grad);
      step += 1;
      opt.learning_rate = scheduled_lr(cfg, step, total_steps);
      adamw_step(state, net.params(), grad, opt);
    }
    epoch_losses.push_back(epoch_loss.count > 0
                               ? epoch_loss.sum / static_cast<double>(epoch_loss.count)
                               : 0.0);
  }

  TrainedPolicy policy;
  policy.method = method;
  policy.space = data.space;
  policy.net = std::move(net_cfg);
  policy.config = cfg;
  policy.params = net.params();
  policy.epoch_losses = std::move(epoch_losses);
  return policy;
}

std::vector<double> mismatch_weights_full(const Dataset& data) {
  const int n = data.num_instances;
  const int a = data.space.num_actions();
  std::vector<double> weights(static_cast<std::size_t>(n) * a);
  for (int i = 0; i < n; ++i) {
    const auto row = data.cost_row(i);
    double max_cost = row[0];
    for (int t = 1; t < a; ++t) max_cost = std::max(max_cost, row[t]);
    for (int t = 0; t < a; ++t) {
      weights[static_cast<std::size_t>(i) * a + t] = max_cost - row[t];
    }
  }
  return weights;
}

std::vector<double> mismatch_weights_no_advice(const Dataset& data) {
  const int n = data.num_instances;
  const int J = data.space.num_experts;
  const int width = data.space.num_advice + 1;
  std::vector<double> weights(static_cast<std::size_t>(n) * J);
  for (int i = 0; i < n; ++i) {
    const auto row = data.cost_row(i);
    double max_cost = row[0];
    for (int j = 1; j < J; ++j) {
      max_cost = std::max(max_cost, row[static_cast<std::size_t>(j) * width]);
    }
    for (int j = 0; j < J; ++j) {
      weights[static_cast<std::size_t>(i) * J + j] =
          max_cost - row[static_cast<std::size_t>(j) * width];
    }
  }
  return weights;
}

}  // namespace

TrainedPolicy train_augmented(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  NetConfig net;
  net.input_dim = data.feature_dim;
  net.hidden_dims = cfg.hidden_dims;
  net.head = cfg.head;
  if (cfg.head == HeadKind::plain) {
    net.plain_output_dim = data.space.num_actions();
  } else {
    net.head_experts = data.space.num_experts;
    net.head_advice = data.space.num_advice;
  }
  const int a = data.space.num_actions();
  auto weights = mismatch_weights_full(data);
  return run_training(
      Method::augmented, data, cfg, std::move(net),
      [&, a](int i, std::span<const double> scores, std::span<double> ds) {
        std::span<const double> w(weights.data() + static_cast<std::size_t>(i) * a,
                                  a);
        return augmented_surrogate_into(scores, w, cfg.tau, ds);
      });
}

TrainedPolicy train_l2d(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (cfg.head != HeadKind::plain) {
    throw ValidationError("train_l2d: only the plain head is supported");
  }
  NetConfig net;
  net.input_dim = data.feature_dim;
  net.hidden_dims = cfg.hidden_dims;
  net.plain_output_dim = data.space.num_experts;
  const int J = data.space.num_experts;
  auto weights = mismatch_weights_no_advice(data);
  return run_training(
      Method::l2d, data, cfg, std::move(net),
      [&, J](int i, std::span<const double> scores, std::span<double> ds) {
        std::span<const double> w(weights.data() + static_cast<std::size_t>(i) * J,
                                  J);
        return augmented_surrogate_into(scores, w, cfg.tau, ds);
      });
}

TrainedPolicy train_separated(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (!(data.space == ActionSpace{2, 1})) {
    throw ValidationError("train_separated: requires J=2, K=1");
  }
  if (cfg.head != HeadKind::plain) {
    throw ValidationError("train_separated: only the plain head is supported");
  }
  NetConfig net;
  net.input_dim = data.feature_dim;
  net.hidden_dims = cfg.hidden_dims;
  net.plain_output_dim = 3;  // router, query_1, query_2
  return run_training(
      Method::separated, data, cfg, std::move(net),
      [&](int i, std::span<const double> scores, std::span<double> ds) {
        const SeparatedScores s{scores[0], scores[1], scores[2]};
        const auto vg = separated_surrogate(s, data.cost_row(i));
        ds[0] = vg.d_router;
        ds[1] = vg.d_query_1;
        ds[2] = vg.d_query_2;
        return vg.value;
      });
}

TrainedPolicy train_policy(Method method, const Dataset& data,
                           const TrainConfig& cfg) {
  switch (method) {
    case Method::augmented: return train_augmented(data, cfg);
    case Method::l2d: return train_l2d(data, cfg);
    case Method::separated: return train_separated(data, cfg);
  }
  throw ValidationError("train_policy: unknown method");
}

PolicyRunner::PolicyRunner(const TrainedPolicy& policy)
    : net_(policy.net), method_(policy.method), space_(policy.space) {
  if (static_cast<int>(policy.params.size()) != net_.param_count()) {
    throw ValidationError("PolicyRunner: parameter count mismatch");
  }
  net_.params() = policy.params;
}

std::vector<double> PolicyRunner::scores(std::span<const double> x) const {
  return net_.forward(x);
}

Action PolicyRunner::act(std::span<const double> x) const {
  const auto s = net_.forward(x);
  switch (method_) {
    case Method::augmented:
      return decode_composite(s, space_);
    case Method::l2d: {
      int best = 0;
      for (int j = 1; j < static_cast<int>(s.size()); ++j) {
        if (s[j] > s[best]) best = j;
      }
      return Action{best, 0};
    }
    case Method::separated:
      return decode_separated(SeparatedScores{s[0], s[1], s[2]});
  }
  throw ValidationError("PolicyRunner: unknown method");
}

std::vector<double> TrainedPolicy::scores(std::span<const double> x) const {
  return PolicyRunner(*this).scores(x);
}

Action TrainedPolicy::act(std::span<const double> x) const {
  return PolicyRunner(*this).act(x);
}

}  // namespace defadv
