#include "defadv/synth.hpp"

#include <algorithm>
#include <cmath>

namespace defadv {

RegionSpec RegionSpec::defaults() {
  RegionSpec spec;
  spec.table_minus = {{0.38, 1.08}, {0.50, 0.51}};
  spec.table_plus = {{0.55, 0.18}, {0.30, 0.90}};
  spec.advice_fee = 0.08;
  return spec;
}

void RegionSpec::validate() const {
  if (!(advice_fee >= 0.0)) {
    throw ValidationError("RegionSpec: advice fee must be >= 0");
  }
  for (const auto* table : {&table_minus, &table_plus}) {
    if (table->size() != 2 || (*table)[0].size() != 2 || (*table)[1].size() != 2) {
      throw ValidationError("RegionSpec: tables must be 2x2");
    }
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double fee = k == 1 ? advice_fee : 0.0;
        const double p = (*table)[j][k] - fee;
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ValidationError(
              "RegionSpec: entry minus fee must be a Bernoulli mean in [0,1]");
        }
      }
    }
  }
}

CostTable RegionSpec::cost_table(int region) const {
  validate();
  const auto& t = region == 0 ? table_minus : table_plus;
  return CostTable(ActionSpace{2, 1}, {t[0][0], t[0][1], t[1][0], t[1][1]},
                   cost_bound());
}

Dataset generate_synthetic(int n, std::uint64_t seed, const RegionSpec& spec) {
  spec.validate();
  if (n < 1) throw ValidationError("generate_synthetic: n must be >= 1");
  Dataset data;
  data.space = ActionSpace{2, 1};
  data.num_instances = n;
  data.feature_dim = 2;
  data.cost_bound = spec.cost_bound();
  data.features.resize(static_cast<std::size_t>(n) * 2);
  data.costs.resize(static_cast<std::size_t>(n) * 4);
  data.region_tags.resize(n);

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double x1 = rng.uniform(-1.0, 1.0);
    const double x2 = rng.uniform(-1.0, 1.0);
    data.features[static_cast<std::size_t>(i) * 2] = x1;
    data.features[static_cast<std::size_t>(i) * 2 + 1] = x2;
    const int region = x1 < 0.0 ? 0 : 1;
    data.region_tags[i] = region;
    const auto& table = region == 0 ? spec.table_minus : spec.table_plus;
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double fee = k == 1 ? spec.advice_fee : 0.0;
        const double p = table[j][k] - fee;
        const double cost = (rng.bernoulli(p) ? 1.0 : 0.0) + fee;
        data.costs[static_cast<std::size_t>(i) * 4 + j * 2 + k] = cost;
      }
    }
  }
  return data;
}

BayesReference bayes_reference(const RegionSpec& spec) {
  spec.validate();
  const BayesDecision minus = bayes_policy(spec.cost_table(0));
  const BayesDecision plus = bayes_policy(spec.cost_table(1));
  BayesReference ref;
  ref.action_minus = minus.executed;
  ref.action_plus = plus.executed;
  ref.risk = 0.5 * minus.risk + 0.5 * plus.risk;
  return ref;
}

EvalMetrics evaluate_policy(const IndexedPolicy& policy, const Dataset& test,
                            const RegionSpec& spec) {
  test.validate();
  if (test.num_instances == 0) {
    throw ValidationError("evaluate_policy: empty test set");
  }
  const BayesReference ref = bayes_reference(spec);
  const int flat_minus = flatten(ref.action_minus, test.space);
  const int flat_plus = flatten(ref.action_plus, test.space);

  EvalMetrics m;
  m.has_regions = test.has_regions();
  double risk_sum = 0.0, advice_sum = 0.0, match_sum = 0.0;
  double region_risk[2] = {0.0, 0.0};
  double region_match[2] = {0.0, 0.0};
  int region_count[2] = {0, 0};

  for (int i = 0; i < test.num_instances; ++i) {
    const Action a = policy(i, test.feature_row(i));
    const int flat = flatten(a, test.space);
    const double cost = test.cost_row(i)[flat];
    risk_sum += cost;
    advice_sum += a.advice >= 1 ? 1.0 : 0.0;
    if (m.has_regions) {
      const int region = test.region_tags[i];
      const int bayes_flat = region == 0 ? flat_minus : flat_plus;
      const double match = flat == bayes_flat ? 1.0 : 0.0;
      match_sum += match;
      region_risk[region] += cost;
      region_match[region] += match;
      region_count[region] += 1;
    }
  }

  const double n = static_cast<double>(test.num_instances);
  m.risk = risk_sum / n;
  m.excess = m.risk - ref.risk;
  m.advice_rate = advice_sum / n;
  if (m.has_regions) {
    m.bayes_match = match_sum / n;
    for (int r = 0; r < 2; ++r) {
      if (region_count[r] > 0) {
        const double c = static_cast<double>(region_count[r]);
        (r == 0 ? m.risk_minus : m.risk_plus) = region_risk[r] / c;
        (r == 0 ? m.match_minus : m.match_plus) = region_match[r] / c;
      }
    }
  }
  return m;
}

IndexedPolicy oracle_policy(const RegionSpec& spec) {
  const BayesReference ref = bayes_reference(spec);
  return [ref](int, std::span<const double> x) {
    return x[0] < 0.0 ? ref.action_minus : ref.action_plus;
  };
}

IndexedPolicy constant_policy(Action action) {
  return [action](int, std::span<const double>) { return action; };
}

IndexedPolicy learned_policy(const PolicyRunner& runner) {
  return [&runner](int, std::span<const double> x) { return runner.act(x); };
}

namespace {

Action best_fixed_pair(const Dataset& train) {
  const int a = train.space.num_actions();
  std::vector<double> mean(a, 0.0);
  for (int i = 0; i < train.num_instances; ++i) {
    const auto row = train.cost_row(i);
    for (int t = 0; t < a; ++t) mean[t] += row[t];
  }
  int best = 0;
  for (int t = 1; t < a; ++t) {
    if (mean[t] < mean[best]) best = t;
  }
  return unflatten(best, train.space);
}

/// Pre-drawn random choices so each baseline is a pure function of
/// (seed, instance index).
std::vector<Action> draw_actions(int n, std::uint64_t seed, int num_experts,
                                 int num_advice, bool random_expert,
                                 bool random_advice) {
  Rng rng(seed);
  std::vector<Action> actions(n);
  for (int i = 0; i < n; ++i) {
    actions[i].expert = random_expert ? rng.uniform_int(num_experts) : 0;
    actions[i].advice = random_advice ? rng.uniform_int(num_advice + 1) : 0;
  }
  return actions;
}

}  // namespace

std::vector<BaselineResult> run_baselines(const Dataset& train,
                                          const Dataset& test,
                                          const PolicyRunner& learned,
                                          std::uint64_t seed,
                                          const RegionSpec& spec,
                                          BaselineSet set) {
  const int J = test.space.num_experts;
  const int K = test.space.num_advice;
  const int n = test.num_instances;
  std::vector<BaselineResult> results;

  const Action fixed = best_fixed_pair(train);
  results.push_back(
      {"best_fixed", evaluate_policy(constant_policy(fixed), test, spec)});

  const auto advice_draws =
      draw_actions(n, split_seed(seed, 11), J, K, false, true);
  results.push_back(
      {"learned_route_random_advice",
       evaluate_policy(
           [&](int i, std::span<const double> x) {
             return Action{learned.act(x).expert, advice_draws[i].advice};
           },
           test, spec)});

  if (set == BaselineSet::synthetic) {
    const auto route_draws =
        draw_actions(n, split_seed(seed, 12), J, K, true, false);
    results.push_back(
        {"random_route_no_advice",
         evaluate_policy(
             [&](int i, std::span<const double>) { return route_draws[i]; },
             test, spec)});
  } else {
    const auto route_draws =
        draw_actions(n, split_seed(seed, 12), J, K, true, false);
    results.push_back(
        {"random_route_learned_advice",
         evaluate_policy(
             [&](int i, std::span<const double> x) {
               return Action{route_draws[i].expert, learned.act(x).advice};
             },
             test, spec)});
  }

  const auto joint_draws =
      draw_actions(n, split_seed(seed, 13), J, K, true, true);
  results.push_back(
      {"random_pair",
       evaluate_policy(
           [&](int i, std::span<const double>) { return joint_draws[i]; },
           test, spec)});
  return results;
}

std::vector<int> decision_map(const IndexedPolicy& policy, int resolution) {
  if (resolution < 2) {
    throw ValidationError("decision_map: resolution must be >= 2");
  }
  std::vector<int> grid(static_cast<std::size_t>(resolution) * resolution);
  const ActionSpace space{2, 1};
  for (int r = 0; r < resolution; ++r) {
    const double x2 = -1.0 + 2.0 * r / (resolution - 1);
    for (int c = 0; c < resolution; ++c) {
      const double x1 = -1.0 + 2.0 * c / (resolution - 1);
      const double x[2] = {x1, x2};
      grid[static_cast<std::size_t>(r) * resolution + c] =
          flatten(policy(r * resolution + c, std::span<const double>(x, 2)),
                  space);
    }
  }
  return grid;
}

void BenchmarkConfig::validate() const {
  if (train_sizes.empty()) {
    throw ValidationError("BenchmarkConfig: need at least one train size");
  }
  for (int n : train_sizes) {
    if (n < 1) throw ValidationError("BenchmarkConfig: train sizes must be >= 1");
  }
  if (num_seeds < 1) throw ValidationError("BenchmarkConfig: need >= 1 seed");
  if (test_size < 1) throw ValidationError("BenchmarkConfig: test size must be >= 1");
  if (grid_resolution < 2) {
    throw ValidationError("BenchmarkConfig: grid resolution must be >= 2");
  }
  spec.validate();
  train.validate();
}

std::vector<MethodAggregate> aggregate_runs(const std::vector<RunRecord>& runs) {
  // Deterministic regardless of production order: bucket, then reduce in
  // sorted key order with seed-sorted members.
  std::map<std::pair<std::string, int>, std::vector<const RunRecord*>> buckets;
  for (const auto& run : runs) {
    buckets[{run.method, run.train_size}].push_back(&run);
  }
  std::vector<MethodAggregate> out;
  for (auto& [key, members] : buckets) {
    std::sort(members.begin(), members.end(),
              [](const RunRecord* a, const RunRecord* b) {
                return a->seed_index < b->seed_index;
              });
    MethodAggregate agg;
    agg.method = key.first;
    agg.train_size = key.second;
    agg.learned = members.front()->learned;
    agg.seeds = static_cast<int>(members.size());
    const double n = static_cast<double>(members.size());
    for (const auto* r : members) {
      agg.risk_mean += r->metrics.risk;
      agg.excess_mean += r->metrics.excess;
      agg.advice_rate_mean += r->metrics.advice_rate;
      agg.match_mean += r->metrics.bayes_match;
      agg.risk_minus_mean += r->metrics.risk_minus;
      agg.risk_plus_mean += r->metrics.risk_plus;
      agg.match_minus_mean += r->metrics.match_minus;
      agg.match_plus_mean += r->metrics.match_plus;
    }
    agg.risk_mean /= n;
    agg.excess_mean /= n;
    agg.advice_rate_mean /= n;
    agg.match_mean /= n;
    agg.risk_minus_mean /= n;
    agg.risk_plus_mean /= n;
    agg.match_minus_mean /= n;
    agg.match_plus_mean /= n;
    if (members.size() > 1) {
      double vr = 0.0, ve = 0.0;
      for (const auto* r : members) {
        vr += (r->metrics.risk - agg.risk_mean) * (r->metrics.risk - agg.risk_mean);
        ve += (r->metrics.excess - agg.excess_mean) *
              (r->metrics.excess - agg.excess_mean);
      }
      agg.risk_std = std::sqrt(vr / (n - 1.0));
      agg.excess_std = std::sqrt(ve / (n - 1.0));
    }
    out.push_back(std::move(agg));
  }
  return out;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkReport report;
  report.config = config;
  report.reference = bayes_reference(config.spec);
  report.bayes_risk_analytic = report.reference.risk;

  const Dataset test = generate_synthetic(
      config.test_size, split_seed(config.root_seed, 0x7e57), config.spec);
  report.bayes_oracle = evaluate_policy(oracle_policy(config.spec), test,
                                        config.spec);

  const int largest = *std::max_element(config.train_sizes.begin(),
                                        config.train_sizes.end());
  const Method methods[] = {Method::augmented, Method::separated, Method::l2d};

  for (std::size_t size_idx = 0; size_idx < config.train_sizes.size();
       ++size_idx) {
    const int n = config.train_sizes[size_idx];
    for (int s = 0; s < config.num_seeds; ++s) {
      const std::uint64_t cell_seed = split_seed(
          config.root_seed, 1000 + size_idx * config.num_seeds + s);
      const Dataset train =
          generate_synthetic(n, split_seed(cell_seed, 1), config.spec);

      TrainedPolicy augmented;  // reused by the partial-randomization baselines
      for (int mi = 0; mi < 3; ++mi) {
        TrainConfig tc = config.train;
        tc.seed = split_seed(cell_seed, 10 + mi);
        TrainedPolicy policy = train_policy(methods[mi], train, tc);
        PolicyRunner runner(policy);
        RunRecord record;
        record.method = method_name(methods[mi]);
        record.learned = true;
        record.train_size = n;
        record.seed_index = s;
        record.metrics = evaluate_policy(learned_policy(runner), test,
                                         config.spec);
        report.runs.push_back(std::move(record));

        if (methods[mi] == Method::augmented) {
          if (n == largest && s == 0) {
            report.decision_maps[method_name(methods[mi])] = decision_map(
                learned_policy(runner), config.grid_resolution);
          }
          augmented = std::move(policy);
        } else if (n == largest && s == 0) {
          report.decision_maps[method_name(methods[mi])] = decision_map(
              learned_policy(runner), config.grid_resolution);
        }
      }

      PolicyRunner learned(augmented);
      for (auto& baseline :
           run_baselines(train, test, learned, split_seed(cell_seed, 99),
                         config.spec, config.baselines)) {
        RunRecord record;
        record.method = baseline.name;
        record.learned = false;
        record.train_size = n;
        record.seed_index = s;
        record.metrics = baseline.metrics;
        report.runs.push_back(std::move(record));
      }
    }
  }

  report.decision_maps["bayes"] =
      decision_map(oracle_policy(config.spec), config.grid_resolution);
  report.aggregates = aggregate_runs(report.runs);
  return report;
}

}  // namespace defadv
