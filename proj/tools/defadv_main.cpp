// defadv: learning-to-defer with advice acquisition.
//
// Subcommands: synth, bayes, train, eval, fisher, report.
// Exit codes: 0 success, 2 usage error, 3 file parse error,
// 4 validation error, 5 runtime error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "defadv/bayes.hpp"
#include "defadv/io.hpp"
#include "defadv/losses.hpp"
#include "defadv/synth.hpp"
#include "defadv/train.hpp"

namespace {

using namespace defadv;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitValidation = 4;
constexpr int kExitRuntime = 5;

struct TrainFlags {
  double learning_rate = 3e-3;
  double weight_decay = 0.0;
  double grad_clip_norm = 10.0;
  int epochs = 120;
  int batch_size = 256;
  double tau = 1.0;
  std::vector<int> hidden_dims = {32, 32};
  std::string head = "plain";
  std::string scheduler = "none";
  double warmup_fraction = 0.05;

  TrainConfig to_config(std::uint64_t seed) const {
    TrainConfig c;
    c.learning_rate = learning_rate;
    c.weight_decay = weight_decay;
    c.grad_clip_norm = grad_clip_norm;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.tau = tau;
    c.seed = seed;
    c.hidden_dims = hidden_dims;
    c.head = head == "structured" ? HeadKind::structured : HeadKind::plain;
    c.scheduler = scheduler == "cosine" || scheduler == "cosine_warmup"
                      ? Scheduler::cosine_warmup
                      : Scheduler::none;
    c.warmup_fraction = warmup_fraction;
    return c;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--lr", flags.learning_rate, "learning rate");
  cmd->add_option("--weight-decay", flags.weight_decay, "decoupled weight decay");
  cmd->add_option("--clip", flags.grad_clip_norm, "global gradient clip norm");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--batch-size", flags.batch_size, "minibatch size");
  cmd->add_option("--tau", flags.tau, "comp-sum parameter");
  cmd->add_option("--hidden", flags.hidden_dims, "hidden layer widths");
  cmd->add_option("--head", flags.head, "score head: plain|structured")
      ->check(CLI::IsMember({"plain", "structured"}));
  cmd->add_option("--scheduler", flags.scheduler,
                  "learning-rate schedule: none|cosine")
      ->check(CLI::IsMember({"none", "cosine", "cosine_warmup"}));
  cmd->add_option("--warmup-frac", flags.warmup_fraction,
                  "warmup fraction for the cosine schedule");
}

RegionSpec load_spec(const std::string& spec_file) {
  return spec_file.empty() ? RegionSpec::defaults()
                           : read_region_spec(spec_file);
}

json dataset_provenance(const std::string& kind, const std::string& source,
                        int n, double lambda, std::uint64_t seed) {
  json j;
  j["kind"] = kind;
  j["source"] = source;
  j["num_instances"] = n;
  j["lambda"] = lambda;
  j["seed"] = seed;
  return j;
}

int run_synth(const std::vector<int>& sizes, int seeds, std::uint64_t seed,
              int test_size, int grid, const std::string& spec_file,
              const std::string& baseline_set, const std::string& out_dir,
              const TrainFlags& flags) {
  BenchmarkConfig config;
  if (!sizes.empty()) config.train_sizes = sizes;
  config.num_seeds = seeds;
  config.root_seed = seed;
  config.test_size = test_size;
  config.grid_resolution = grid;
  config.spec = load_spec(spec_file);
  config.train = flags.to_config(seed);
  config.baselines = baseline_set == "main" ? BaselineSet::main
                                            : BaselineSet::synthetic;

  const BenchmarkReport report = run_benchmark(config);
  write_benchmark_report(out_dir, report);
  print_report((std::filesystem::path(out_dir) / "report.json").string(),
               std::cout);
  std::cout << "\nwrote " << out_dir << "/report.json, report.csv, "
            << "excess_vs_n.csv and decision maps\n";
  return 0;
}

int run_bayes(const std::string& tensor_path, double lambda,
              const std::string& out_path) {
  const CostTensorFile tensor = read_cost_tensor(tensor_path);
  const Dataset data = tensor_to_dataset(tensor, lambda);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + out_path);
  out << "instance,expert,advice,risk\n";
  out << std::setprecision(17);
  double advice_risk = 0.0, no_advice_risk = 0.0;
  for (int i = 0; i < data.num_instances; ++i) {
    const CostTable table = data.cost_table(i);
    const BayesDecision decision = bayes_policy(table);
    const DominanceGap gap = dominance_check(table);
    advice_risk += decision.risk;
    no_advice_risk += gap.risk_no_advice;
    out << i << ',' << decision.executed.expert << ','
        << decision.executed.advice << ',' << decision.risk << '\n';
  }
  const double n = static_cast<double>(data.num_instances);
  std::cout << std::setprecision(10);
  std::cout << "instances:                " << data.num_instances << "\n";
  std::cout << "lambda:                   " << lambda << "\n";
  std::cout << "mean bayes risk:          " << advice_risk / n << "\n";
  std::cout << "mean k=0 restricted risk: " << no_advice_risk / n << "\n";
  std::cout << "dominance gap:            "
            << (no_advice_risk - advice_risk) / n << "\n";
  std::cout << "decisions written to " << out_path << "\n";
  return 0;
}

int run_train(const std::string& method_name_str, const std::string& tensor_path,
              int synth_n, const std::string& spec_file, double lambda,
              std::uint64_t seed, const TrainFlags& flags,
              const std::string& out_path) {
  const Method method = method_from_name(method_name_str);
  Dataset data;
  json provenance;
  if (!tensor_path.empty()) {
    data = tensor_to_dataset(read_cost_tensor(tensor_path), lambda);
    provenance = dataset_provenance("tensor", tensor_path, data.num_instances,
                                    lambda, seed);
  } else if (synth_n > 0) {
    const RegionSpec spec = load_spec(spec_file);
    data = generate_synthetic(synth_n, split_seed(seed, 0xda7a), spec);
    provenance = dataset_provenance("synthetic", spec_file.empty() ? "default"
                                                                   : spec_file,
                                    synth_n, 0.0, seed);
  } else {
    throw ValidationError("train: provide --tensor or --synth-n");
  }

  const TrainConfig config = flags.to_config(split_seed(seed, 0x77));
  const TrainedPolicy policy = train_policy(method, data, config);
  write_policy(out_path, policy);
  std::cout << "trained " << method_name(method) << " on "
            << data.num_instances << " instances ("
            << policy.params.size() << " parameters)\n";
  if (!policy.epoch_losses.empty()) {
    std::cout << "final epoch mean loss: " << policy.epoch_losses.back()
              << "\n";
  }
  std::cout << "policy written to " << out_path << "\n";
  return 0;
}

int run_eval(const std::string& policy_path, const std::string& tensor_path,
             int synth_test, const std::string& spec_file, double lambda,
             std::uint64_t seed, const std::string& out_path) {
  const TrainedPolicy policy = read_policy(policy_path);
  const PolicyRunner runner(policy);

  json result;
  result["policy_file"] = policy_path;
  result["method"] = method_name(policy.method);
  result["config"] = {{"lambda", lambda}, {"seed", seed}};

  Dataset data;
  std::optional<RegionSpec> spec;
  if (!tensor_path.empty()) {
    data = tensor_to_dataset(read_cost_tensor(tensor_path), lambda);
    result["data"] = dataset_provenance("tensor", tensor_path,
                                        data.num_instances, lambda, seed);
  } else {
    spec = load_spec(spec_file);
    data = generate_synthetic(synth_test, split_seed(seed, 0x7e57), *spec);
    result["data"] = dataset_provenance(
        "synthetic", spec_file.empty() ? "default" : spec_file, synth_test,
        0.0, seed);
  }
  if (!(policy.space == data.space)) {
    throw ValidationError("eval: policy and data action spaces differ");
  }

  const int width = data.space.num_advice + 1;
  std::vector<std::int64_t> histogram(data.space.num_actions(), 0);
  double risk = 0.0, advice = 0.0;
  for (int i = 0; i < data.num_instances; ++i) {
    const Action a = runner.act(data.feature_row(i));
    const int flat = flatten(a, data.space);
    histogram[flat] += 1;
    risk += data.cost_row(i)[flat];
    advice += a.advice >= 1 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(data.num_instances);
  result["num_instances"] = data.num_instances;
  result["risk"] = risk / n;
  result["advice_rate_pct"] = 100.0 * advice / n;
  json hist = json::array();
  for (int j = 0; j < data.space.num_experts; ++j) {
    json row = json::array();
    for (int k = 0; k < width; ++k) row.push_back(histogram[j * width + k]);
    hist.push_back(row);
  }
  result["selection_histogram"] = hist;

  if (spec) {
    const EvalMetrics m =
        evaluate_policy(learned_policy(runner), data, *spec);
    result["excess_risk"] = m.excess;
    result["bayes_match_pct"] = 100.0 * m.bayes_match;
    result["risk_region_minus"] = m.risk_minus;
    result["risk_region_plus"] = m.risk_plus;
    result["bayes_match_region_minus_pct"] = 100.0 * m.match_minus;
    result["bayes_match_region_plus_pct"] = 100.0 * m.match_plus;
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + out_path);
  out << result.dump(2) << "\n";
  std::cout << "risk: " << risk / n << "  advice rate: "
            << 100.0 * advice / n << "%\n";
  std::cout << "metrics written to " << out_path << "\n";
  return 0;
}

int run_fisher(double b, double eps, double big_c,
               std::optional<double> delta, const std::string& out_path) {
  const FisherCertificate cert = fisher_counterexample(b, eps, big_c, delta);
  write_fisher_certificate(out_path, cert, b, eps, big_c);
  std::cout << std::setprecision(6);
  std::cout << "delta: " << cert.delta << "\n";
  std::cout << "table: [[" << cert.table.at(0, 0) << ", " << cert.table.at(0, 1)
            << "], [" << cert.table.at(1, 0) << ", " << cert.table.at(1, 1)
            << "]]\n";
  std::cout << "profiled summaries: expert1 " << cert.summary_top
            << "  expert2 " << cert.summary_bottom << "\n";
  std::cout << "bayes expert: " << cert.bayes.executed.expert + 1
            << "  surrogate expert: " << cert.surrogate_action.expert + 1
            << "\n";
  std::cout << "certificate written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-to-defer with expert-conditioned advice"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "run the synthetic benchmark");
  std::vector<int> sizes;
  int seeds = 5, test_size = 100000, grid = 201;
  std::uint64_t seed = 1;
  std::string spec_file, baseline_set = "synthetic", out_dir = "synth_out";
  TrainFlags synth_flags;
  synth->add_option("--sizes", sizes, "train sizes (default 250..5000)");
  synth->add_option("--seeds", seeds, "number of seeds per cell");
  synth->add_option("--seed", seed, "root seed");
  synth->add_option("--test-size", test_size, "held-out test instances");
  synth->add_option("--grid", grid, "decision-map resolution");
  synth->add_option("--spec-file", spec_file, "region spec JSON");
  synth->add_option("--baseline-set", baseline_set, "synthetic|main")
      ->check(CLI::IsMember({"synthetic", "main"}));
  synth->add_option("--out", out_dir, "output directory");
  add_train_flags(synth, synth_flags);

  // bayes
  auto* bayes = app.add_subcommand("bayes", "per-instance Bayes decisions");
  std::string bayes_tensor, bayes_out = "bayes_decisions.csv";
  double bayes_lambda = 0.0;
  bayes->add_option("--tensor", bayes_tensor, "cost tensor file")->required();
  bayes->add_option("--lambda", bayes_lambda, "advice cost multiplier");
  bayes->add_option("--out", bayes_out, "decision CSV path");

  // train
  auto* train = app.add_subcommand("train", "train a scorer");
  std::string train_method, train_tensor, train_spec, train_out = "policy.json";
  int train_synth_n = 0;
  double train_lambda = 0.0;
  std::uint64_t train_seed = 1;
  TrainFlags train_flags;
  train->add_option("--method", train_method, "augmented|l2d|separated")
      ->required()
      ->check(CLI::IsMember({"augmented", "l2d", "separated"}));
  train->add_option("--tensor", train_tensor, "cost tensor file");
  train->add_option("--synth-n", train_synth_n, "synthetic train size");
  train->add_option("--spec-file", train_spec, "region spec JSON");
  train->add_option("--lambda", train_lambda, "advice cost multiplier");
  train->add_option("--seed", train_seed, "root seed");
  train->add_option("--out", train_out, "policy output path");
  add_train_flags(train, train_flags);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a trained policy");
  std::string eval_policy, eval_tensor, eval_spec, eval_out = "metrics.json";
  int eval_synth_test = 100000;
  double eval_lambda = 0.0;
  std::uint64_t eval_seed = 1;
  eval->add_option("--policy", eval_policy, "policy file")->required();
  eval->add_option("--tensor", eval_tensor, "cost tensor file");
  eval->add_option("--synth-test", eval_synth_test,
                   "synthetic test size (used without --tensor)");
  eval->add_option("--spec-file", eval_spec, "region spec JSON");
  eval->add_option("--lambda", eval_lambda, "advice cost multiplier");
  eval->add_option("--seed", eval_seed, "root seed");
  eval->add_option("--out", eval_out, "metrics output path");

  // fisher
  auto* fisher = app.add_subcommand(
      "fisher", "emit a separated-surrogate counterexample certificate");
  double fb = 0.5, feps = 0.01, fC = 1.08;
  double fdelta = -1.0;
  std::string fisher_out = "fisher_certificate.json";
  fisher->add_option("-b,--b", fb, "row minimum b")->required();
  fisher->add_option("-e,--eps", feps, "second-row gap eps")->required();
  fisher->add_option("-C,--bound", fC, "cost bound C")->required();
  fisher->add_option("--delta", fdelta,
                     "explicit delta in (0, b); default: bisection");
  fisher->add_option("--out", fisher_out, "certificate output path");

  // report
  auto* rep = app.add_subcommand("report", "pretty-print a benchmark report");
  std::string report_in;
  rep->add_option("--in", report_in, "report.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      return run_synth(sizes, seeds, seed, test_size, grid, spec_file,
                       baseline_set, out_dir, synth_flags);
    }
    if (bayes->parsed()) {
      return run_bayes(bayes_tensor, bayes_lambda, bayes_out);
    }
    if (train->parsed()) {
      return run_train(train_method, train_tensor, train_synth_n, train_spec,
                       train_lambda, train_seed, train_flags, train_out);
    }
    if (eval->parsed()) {
      return run_eval(eval_policy, eval_tensor, eval_synth_test, eval_spec,
                      eval_lambda, eval_seed, eval_out);
    }
    if (fisher->parsed()) {
      std::optional<double> delta;
      if (fdelta > 0.0) delta = fdelta;
      return run_fisher(fb, feps, fC, delta, fisher_out);
    }
    if (rep->parsed()) {
      print_report(report_in, std::cout);
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
