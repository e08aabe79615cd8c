#include <doctest.h>

#include <cmath>

#include "defadv/bayes.hpp"
#include "defadv/train.hpp"
#include "test_util.hpp"

using namespace defadv;

namespace {

// One action uniformly dominates: its cost is 0, every other is 1, so the
// per-example mismatch weights are one-hot on it.
Dataset dominant_action_dataset(int n, int dominant_flat, ActionSpace space,
                                std::uint64_t seed) {
  Dataset data;
  data.space = space;
  data.num_instances = n;
  data.feature_dim = 2;
  data.cost_bound = 1.0;
  data.features.resize(static_cast<std::size_t>(n) * 2);
  data.costs.resize(static_cast<std::size_t>(n) * space.num_actions());
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    data.features[i * 2] = rng.uniform(-1.0, 1.0);
    data.features[i * 2 + 1] = rng.uniform(-1.0, 1.0);
    for (int a = 0; a < space.num_actions(); ++a) {
      data.costs[static_cast<std::size_t>(i) * space.num_actions() + a] =
          a == dominant_flat ? 0.0 : 1.0;
    }
  }
  return data;
}

TrainConfig quick_config(std::uint64_t seed, int epochs = 40) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.hidden_dims = {16, 16};
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("decode_composite takes the argmax with smallest-index ties") {
  const ActionSpace space{2, 2};
  std::vector<double> one_hot(6, 0.0);
  one_hot[4] = 1.0;
  CHECK(decode_composite(one_hot, space) == Action{1, 1});

  const std::vector<double> equal(6, 0.3);
  CHECK(decode_composite(equal, space) == Action{0, 0});

  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> scores(6);
    for (double& s : scores) s = 0.25 * rng.uniform_int(5);  // force ties
    int best = 0;
    for (int i = 1; i < 6; ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    CHECK(flatten(decode_composite(scores, space), space) == best);
  }
}

TEST_CASE("decode_separated uses only the routed expert's query score") {
  CHECK(decode_separated(SeparatedScores{-1.0, -1.0, 5.0}) == Action{0, 0});
  CHECK(decode_separated(SeparatedScores{-1.0, -1.0, -5.0}) == Action{0, 0});
  CHECK(decode_separated(SeparatedScores{0.0, -1.0, -1.0}) == Action{1, 0});
  CHECK(decode_separated(SeparatedScores{1.0, -3.0, 0.0}) == Action{1, 1});
  CHECK(decode_separated(SeparatedScores{-2.0, 0.0, -9.0}) == Action{0, 1});
}

TEST_CASE("training is deterministic under the seed") {
  const Dataset data = dominant_action_dataset(64, 2, ActionSpace{2, 1}, 3);
  const TrainConfig cfg = quick_config(11, 5);
  const TrainedPolicy a = train_augmented(data, cfg);
  const TrainedPolicy b = train_augmented(data, cfg);
  CHECK(a.params == b.params);  // bit-identical trajectories
  TrainConfig other = cfg;
  other.seed = 12;
  CHECK(train_augmented(data, other).params != a.params);
}

TEST_CASE("zero-epoch training returns the initialization unchanged") {
  const TrainConfig cfg = quick_config(21, 0);
  const Dataset d1 = dominant_action_dataset(32, 0, ActionSpace{2, 1}, 5);
  const Dataset d2 = dominant_action_dataset(32, 3, ActionSpace{2, 1}, 6);
  const TrainedPolicy p1 = train_augmented(d1, cfg);
  const TrainedPolicy p2 = train_augmented(d2, cfg);
  CHECK(p1.params == p2.params);  // init does not depend on the data
  CHECK(p1.epoch_losses.empty());
  bool any_nonzero = false;
  for (double v : p1.params) any_nonzero = any_nonzero || v != 0.0;
  CHECK(any_nonzero);

  TrainConfig one = cfg;
  one.epochs = 1;
  CHECK(train_augmented(d1, one).params != p1.params);
}

TEST_CASE("augmented training recovers a uniformly dominant action") {
  for (int dominant : {0, 3}) {
    const Dataset data =
        dominant_action_dataset(128, dominant, ActionSpace{2, 1}, 17);
    const TrainedPolicy policy = train_augmented(data, quick_config(1));
    const PolicyRunner runner(policy);
    int hits = 0;
    for (int i = 0; i < data.num_instances; ++i) {
      if (flatten(runner.act(data.feature_row(i)), data.space) == dominant) {
        ++hits;
      }
    }
    CHECK(hits == data.num_instances);
  }
}

TEST_CASE("training loss is non-increasing after warmup on the easy dataset") {
  const Dataset data = dominant_action_dataset(128, 1, ActionSpace{2, 1}, 23);
  const TrainedPolicy policy = train_augmented(data, quick_config(2, 30));
  REQUIRE(policy.epoch_losses.size() == 30);
  for (std::size_t e = 3; e + 1 < policy.epoch_losses.size(); ++e) {
    CHECK(policy.epoch_losses[e + 1] <= policy.epoch_losses[e] + 1e-6);
  }
}

TEST_CASE("l2d ignores advice columns and finds the dominant expert") {
  // Expert 1 dominates the no-advice column; advice entries are decoys.
  Dataset data;
  data.space = ActionSpace{2, 1};
  data.num_instances = 128;
  data.feature_dim = 2;
  data.cost_bound = 1.0;
  Rng rng(29);
  for (int i = 0; i < data.num_instances; ++i) {
    data.features.push_back(rng.uniform(-1.0, 1.0));
    data.features.push_back(rng.uniform(-1.0, 1.0));
    data.costs.insert(data.costs.end(), {1.0, 0.0, 0.2, 0.9});
  }
  const TrainedPolicy policy = train_l2d(data, quick_config(3));
  const PolicyRunner runner(policy);
  for (int i = 0; i < data.num_instances; ++i) {
    CHECK(runner.act(data.feature_row(i)) == Action{1, 0});
  }
}

TEST_CASE("with K=0 the augmented and l2d objectives coincide") {
  Dataset data;
  data.space = ActionSpace{3, 0};
  data.num_instances = 96;
  data.feature_dim = 2;
  data.cost_bound = 1.0;
  Rng rng(31);
  for (int i = 0; i < data.num_instances; ++i) {
    data.features.push_back(rng.uniform(-1.0, 1.0));
    data.features.push_back(rng.uniform(-1.0, 1.0));
    for (int j = 0; j < 3; ++j) data.costs.push_back(rng.uniform());
  }
  const TrainConfig cfg = quick_config(37, 8);
  CHECK(train_augmented(data, cfg).params == train_l2d(data, cfg).params);
}

TEST_CASE("separated training validates the action space and learns") {
  const Dataset bad = dominant_action_dataset(32, 0, ActionSpace{3, 1}, 41);
  CHECK_THROWS_AS(train_separated(bad, quick_config(1, 1)), ValidationError);

  // First expert free, second expert always cost one: the router score
  // must go negative and decode expert 0 everywhere.
  Dataset data;
  data.space = ActionSpace{2, 1};
  data.num_instances = 128;
  data.feature_dim = 2;
  data.cost_bound = 1.0;
  Rng rng(43);
  for (int i = 0; i < data.num_instances; ++i) {
    data.features.push_back(rng.uniform(-1.0, 1.0));
    data.features.push_back(rng.uniform(-1.0, 1.0));
    data.costs.insert(data.costs.end(), {0.0, 0.0, 1.0, 1.0});
  }
  const TrainedPolicy policy = train_separated(data, quick_config(5));
  const PolicyRunner runner(policy);
  for (int i = 0; i < data.num_instances; ++i) {
    CHECK(runner.act(data.feature_row(i)).expert == 0);
  }
}

TEST_CASE("empty dataset is rejected") {
  Dataset data;
  data.space = ActionSpace{2, 1};
  data.feature_dim = 2;
  CHECK_THROWS_AS(train_augmented(data, quick_config(1, 1)), ValidationError);
}

TEST_CASE("end-to-end parameter gradients match finite differences") {
  Rng rng(53);
  const Dataset data = [&] {
    Dataset d;
    d.space = ActionSpace{2, 1};
    d.num_instances = 5;
    d.feature_dim = 2;
    d.cost_bound = 1.0;
    for (int i = 0; i < d.num_instances; ++i) {
      d.features.push_back(rng.uniform(-1.0, 1.0));
      d.features.push_back(rng.uniform(-1.0, 1.0));
      for (int a = 0; a < 4; ++a) d.costs.push_back(rng.uniform());
    }
    return d;
  }();

  for (Method method : {Method::augmented, Method::l2d, Method::separated}) {
    NetConfig cfg;
    cfg.input_dim = 2;
    cfg.hidden_dims = {6, 5};
    cfg.plain_output_dim = method == Method::augmented ? 4
                           : method == Method::l2d    ? 2
                                                      : 3;
    ScorerNet net = ScorerNet::initialized(cfg, rng.next());
    const int out = cfg.output_dim();
    const int n = data.num_instances;

    auto batch_loss = [&](const std::vector<double>& params,
                          std::vector<double>* grad) {
      ScorerNet probe(cfg);
      probe.params() = params;
      ScorerNet::Cache cache;
      probe.forward_batch(data.features, n, cache);
      std::vector<double> dscores(static_cast<std::size_t>(n) * out, 0.0);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        std::span<const double> sc(cache.scores.data() +
                                       static_cast<std::size_t>(i) * out,
                                   out);
        std::span<double> ds(dscores.data() + static_cast<std::size_t>(i) * out,
                             out);
        const auto costs = data.cost_row(i);
        if (method == Method::separated) {
          const auto vg = separated_surrogate(
              SeparatedScores{sc[0], sc[1], sc[2]}, costs);
          total += vg.value;
          ds[0] = vg.d_router;
          ds[1] = vg.d_query_1;
          ds[2] = vg.d_query_2;
        } else {
          const int width = method == Method::augmented ? 4 : 2;
          std::vector<double> w(width);
          double max_cost = 0.0;
          for (int t = 0; t < width; ++t) {
            const double c =
                method == Method::augmented ? costs[t] : costs[t * 2];
            w[t] = c;
            max_cost = std::max(max_cost, c);
          }
          for (double& v : w) v = max_cost - v;
          total += augmented_surrogate_into(sc, w, 1.0, ds);
        }
      }
      for (double& v : dscores) v /= n;
      if (grad) {
        grad->assign(probe.param_count(), 0.0);
        probe.backward_batch(data.features, n, cache, dscores, *grad);
      }
      return total / n;
    };

    std::vector<double> analytic;
    batch_loss(net.params(), &analytic);
    const auto fd = test_util::finite_difference(
        [&](const std::vector<double>& p) { return batch_loss(p, nullptr); },
        net.params());
    CHECK(test_util::relative_error(analytic, fd) < 1e-4);
  }
}
