#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "defadv/bayes.hpp"
#include "defadv/core.hpp"
#include "defadv/train.hpp"

namespace defadv {

/// Two-region synthetic environment on [-1,1]^2, split on the first
/// coordinate. Each region carries a certified 2x2 conditional
/// executed-cost table; queried entries include a fixed advice fee and
/// every entry must be realizable as Bernoulli task loss plus fee.
struct RegionSpec {
  std::vector<std::vector<double>> table_minus;  // region x1 < 0
  std::vector<std::vector<double>> table_plus;   // region x1 >= 0
  double advice_fee = 0.08;                      // lambda_0

  static RegionSpec defaults();
  void validate() const;
  CostTable cost_table(int region) const;  // 0 = minus, 1 = plus
  double cost_bound() const { return 1.0 + advice_fee; }
};

/// Samples features uniformly from [-1,1]^2 and realizes one cost table
/// per instance: cost(j,k) = Bernoulli(p) + fee with p chosen so the
/// conditional mean matches the certified entry exactly.
Dataset generate_synthetic(int n, std::uint64_t seed, const RegionSpec& spec);

struct BayesReference {
  double risk = 0.0;  // 0.5 * (min T- + min T+)
  Action action_minus{};
  Action action_plus{};
};
BayesReference bayes_reference(const RegionSpec& spec);

/// Fractions are reported in [0,1]; the CSV/JSON writers scale to percent.
struct EvalMetrics {
  double risk = 0.0;
  double excess = 0.0;        // against the analytic Bayes risk
  double advice_rate = 0.0;   // fraction with k >= 1
  double bayes_match = 0.0;   // decoded action equals the region's Bayes action
  bool has_regions = false;
  double risk_minus = 0.0, risk_plus = 0.0;
  double match_minus = 0.0, match_plus = 0.0;
};

/// Policies get the instance index so randomized baselines can stay
/// deterministic under a seed.
using IndexedPolicy = std::function<Action(int index, std::span<const double> x)>;

EvalMetrics evaluate_policy(const IndexedPolicy& policy, const Dataset& test,
                            const RegionSpec& spec);

IndexedPolicy oracle_policy(const RegionSpec& spec);
IndexedPolicy constant_policy(Action action);
IndexedPolicy learned_policy(const PolicyRunner& runner);

enum class BaselineSet { synthetic, main };

struct BaselineResult {
  std::string name;
  EvalMetrics metrics;
};

/// Reference floors and partial-randomization ablations. The learned
/// policy supplies the kept half of each ablation.
std::vector<BaselineResult> run_baselines(const Dataset& train,
                                          const Dataset& test,
                                          const PolicyRunner& learned,
                                          std::uint64_t seed,
                                          const RegionSpec& spec,
                                          BaselineSet set);

/// Grid of decoded flat action indices over [-1,1]^2, row-major; row r
/// fixes x2 and columns sweep x1.
std::vector<int> decision_map(const IndexedPolicy& policy, int resolution);

struct BenchmarkConfig {
  std::vector<int> train_sizes = {250, 500, 1000, 2500, 5000};
  int num_seeds = 5;
  std::uint64_t root_seed = 1;
  int test_size = 100000;
  int grid_resolution = 201;
  RegionSpec spec = RegionSpec::defaults();
  TrainConfig train{};  // protocol defaults: lr 3e-3, 120 epochs, batch 256
  BaselineSet baselines = BaselineSet::synthetic;

  void validate() const;
};

struct RunRecord {
  std::string method;  // learned method or baseline name
  bool learned = false;
  int train_size = 0;
  int seed_index = 0;
  EvalMetrics metrics;
};

struct MethodAggregate {
  std::string method;
  bool learned = false;
  int train_size = 0;
  int seeds = 0;
  double risk_mean = 0.0, risk_std = 0.0;
  double excess_mean = 0.0, excess_std = 0.0;
  double advice_rate_mean = 0.0;
  double match_mean = 0.0;
  double risk_minus_mean = 0.0, risk_plus_mean = 0.0;
  double match_minus_mean = 0.0, match_plus_mean = 0.0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  double bayes_risk_analytic = 0.0;
  BayesReference reference;
  EvalMetrics bayes_oracle;         // oracle evaluated on the test split
  std::vector<RunRecord> runs;      // every (method, n, seed) cell
  std::vector<MethodAggregate> aggregates;
  // Decoded maps at the largest train size (first seed), keyed by method,
  // plus the Bayes map under key "bayes".
  std::map<std::string, std::vector<int>> decision_maps;
};

/// Order-independent reduction of run records into per-(method, n) means
/// and standard deviations over seeds.
std::vector<MethodAggregate> aggregate_runs(const std::vector<RunRecord>& runs);

/// Full sweep: trains augmented, separated and l2d per (n, seed), evaluates
/// on one shared test split, runs the baselines, aggregates.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

}  // namespace defadv
