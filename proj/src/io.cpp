#include "defadv/io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace defadv {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'D', 'A', 'C', 'T'};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(context + ": " + e.what());
  }
}

json parse_json_file(const std::string& path) {
  return parse_json(read_file(path), path);
}

template <typename T>
T require(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) {
    throw ParseError(context + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(context + ": bad field '" + key + "': " + e.what());
  }
}

void append_f64(std::string& out, const std::vector<double>& v) {
  const std::size_t old = out.size();
  out.resize(old + v.size() * sizeof(double));
  std::memcpy(out.data() + old, v.data(), v.size() * sizeof(double));
}

void append_i32(std::string& out, const std::vector<int>& v) {
  std::vector<std::int32_t> tmp(v.begin(), v.end());
  const std::size_t old = out.size();
  out.resize(old + tmp.size() * sizeof(std::int32_t));
  std::memcpy(out.data() + old, tmp.data(), tmp.size() * sizeof(std::int32_t));
}

std::vector<std::vector<double>> nested_rows(const std::vector<double>& flat,
                                             int rows, int cols) {
  std::vector<std::vector<double>> out(rows);
  for (int r = 0; r < rows; ++r) {
    out[r].assign(flat.begin() + static_cast<std::ptrdiff_t>(r) * cols,
                  flat.begin() + static_cast<std::ptrdiff_t>(r + 1) * cols);
  }
  return out;
}

json tensor_header(const CostTensorFile& t) {
  json h;
  h["version"] = t.version;
  h["num_experts"] = t.space.num_experts;
  h["num_advice"] = t.space.num_advice;
  h["num_instances"] = t.num_instances;
  h["feature_dim"] = t.feature_dim;
  h["has_regions"] = !t.region_tags.empty();
  if (!t.labels.empty()) h["labels"] = t.labels;
  if (t.gamma_base) h["gamma_base"] = *t.gamma_base;
  if (t.expert_fees) h["expert_fees"] = *t.expert_fees;
  if (t.lambda_grid) h["lambda_grid"] = *t.lambda_grid;
  return h;
}

void tensor_from_header(const json& h, const std::string& context,
                        CostTensorFile& t) {
  t.version = require<int>(h, "version", context);
  t.space = ActionSpace{require<int>(h, "num_experts", context),
                        require<int>(h, "num_advice", context)};
  t.num_instances = require<int>(h, "num_instances", context);
  t.feature_dim = require<int>(h, "feature_dim", context);
  if (h.contains("labels")) t.labels = h.at("labels").get<std::vector<std::string>>();
  if (h.contains("gamma_base")) {
    t.gamma_base = h.at("gamma_base").get<std::vector<double>>();
  }
  if (h.contains("expert_fees")) {
    t.expert_fees = h.at("expert_fees").get<std::vector<double>>();
  }
  if (h.contains("lambda_grid")) {
    t.lambda_grid = h.at("lambda_grid").get<std::vector<double>>();
  }
}

std::string scheduler_name(Scheduler s) {
  return s == Scheduler::none ? "none" : "cosine_warmup";
}

Scheduler scheduler_from_name(const std::string& name) {
  if (name == "none") return Scheduler::none;
  if (name == "cosine_warmup") return Scheduler::cosine_warmup;
  throw ParseError("unknown scheduler: " + name);
}

std::string head_name(HeadKind h) {
  return h == HeadKind::plain ? "plain" : "structured";
}

HeadKind head_from_name(const std::string& name) {
  if (name == "plain") return HeadKind::plain;
  if (name == "structured") return HeadKind::structured;
  throw ParseError("unknown head kind: " + name);
}

json train_config_to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["weight_decay"] = c.weight_decay;
  j["grad_clip_norm"] = c.grad_clip_norm;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["tau"] = c.tau;
  j["seed"] = c.seed;
  j["scheduler"] = scheduler_name(c.scheduler);
  j["warmup_fraction"] = c.warmup_fraction;
  j["hidden_dims"] = c.hidden_dims;
  j["head"] = head_name(c.head);
  return j;
}

TrainConfig train_config_from_json(const json& j, const std::string& context) {
  TrainConfig c;
  c.learning_rate = require<double>(j, "learning_rate", context);
  c.weight_decay = require<double>(j, "weight_decay", context);
  c.grad_clip_norm = require<double>(j, "grad_clip_norm", context);
  c.epochs = require<int>(j, "epochs", context);
  c.batch_size = require<int>(j, "batch_size", context);
  c.tau = require<double>(j, "tau", context);
  c.seed = require<std::uint64_t>(j, "seed", context);
  c.scheduler = scheduler_from_name(require<std::string>(j, "scheduler", context));
  c.warmup_fraction = require<double>(j, "warmup_fraction", context);
  c.hidden_dims = require<std::vector<int>>(j, "hidden_dims", context);
  c.head = head_from_name(require<std::string>(j, "head", context));
  return c;
}

json metrics_to_json(const EvalMetrics& m) {
  json j;
  j["risk"] = m.risk;
  j["excess_risk"] = m.excess;
  j["advice_rate_pct"] = 100.0 * m.advice_rate;
  j["bayes_match_pct"] = 100.0 * m.bayes_match;
  if (m.has_regions) {
    j["risk_region_minus"] = m.risk_minus;
    j["risk_region_plus"] = m.risk_plus;
    j["bayes_match_region_minus_pct"] = 100.0 * m.match_minus;
    j["bayes_match_region_plus_pct"] = 100.0 * m.match_plus;
  }
  return j;
}

json region_spec_to_json(const RegionSpec& spec) {
  json j;
  j["table_minus"] = spec.table_minus;
  j["table_plus"] = spec.table_plus;
  j["advice_fee"] = spec.advice_fee;
  return j;
}

RegionSpec region_spec_from_json(const json& j, const std::string& context) {
  RegionSpec spec;
  spec.table_minus =
      require<std::vector<std::vector<double>>>(j, "table_minus", context);
  spec.table_plus =
      require<std::vector<std::vector<double>>>(j, "table_plus", context);
  spec.advice_fee = require<double>(j, "advice_fee", context);
  spec.validate();
  return spec;
}

}  // namespace

void CostTensorFile::validate() const {
  space.validate();
  if (num_instances < 1) {
    throw ValidationError("CostTensorFile: need at least one instance");
  }
  if (feature_dim < 0) throw ValidationError("CostTensorFile: negative dim");
  if (features.size() != static_cast<std::size_t>(num_instances) * feature_dim) {
    throw ValidationError("CostTensorFile: feature payload does not match n x d");
  }
  if (costs.size() !=
      static_cast<std::size_t>(num_instances) * space.num_actions()) {
    throw ValidationError("CostTensorFile: cost payload does not match shape");
  }
  if (!region_tags.empty() &&
      static_cast<int>(region_tags.size()) != num_instances) {
    throw ValidationError("CostTensorFile: region tag count does not match n");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != num_instances) {
    throw ValidationError("CostTensorFile: label count does not match n");
  }
  if (gamma_base) {
    if (static_cast<int>(gamma_base->size()) != space.num_advice + 1) {
      throw ValidationError("CostTensorFile: gamma_base length must be K+1");
    }
    if ((*gamma_base)[0] != 0.0) {
      throw ValidationError("CostTensorFile: gamma_base[0] must be 0");
    }
  }
  if (expert_fees &&
      static_cast<int>(expert_fees->size()) != space.num_experts) {
    throw ValidationError("CostTensorFile: expert fee length must be J");
  }
}

void write_cost_tensor(const std::string& path, const CostTensorFile& tensor,
                       TensorFormat format) {
  tensor.validate();
  if (format == TensorFormat::json) {
    json j = tensor_header(tensor);
    j["format"] = "dact-json";
    j["features"] = nested_rows(tensor.features, tensor.num_instances,
                                tensor.feature_dim);
    std::vector<json> cost_rows(tensor.num_instances);
    const int width = tensor.space.num_advice + 1;
    for (int i = 0; i < tensor.num_instances; ++i) {
      const auto row =
          std::vector<double>(tensor.costs.begin() +
                                  static_cast<std::ptrdiff_t>(i) *
                                      tensor.space.num_actions(),
                              tensor.costs.begin() +
                                  static_cast<std::ptrdiff_t>(i + 1) *
                                      tensor.space.num_actions());
      cost_rows[i] = nested_rows(row, tensor.space.num_experts, width);
    }
    j["costs"] = cost_rows;
    if (!tensor.region_tags.empty()) j["region_tags"] = tensor.region_tags;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << j.dump(2) << "\n";
    return;
  }

  const std::string header = tensor_header(tensor).dump();
  std::string blob;
  blob.append(kMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  blob.append(reinterpret_cast<const char*>(&len), 4);
  blob.append(header);
  append_f64(blob, tensor.features);
  append_f64(blob, tensor.costs);
  if (!tensor.region_tags.empty()) append_i32(blob, tensor.region_tags);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

CostTensorFile read_cost_tensor(const std::string& path) {
  const std::string blob = read_file(path);
  CostTensorFile t;
  if (blob.size() >= 4 && std::memcmp(blob.data(), kMagic, 4) == 0) {
    if (blob.size() < 8) throw ParseError(path + ": truncated header");
    std::uint32_t len = 0;
    std::memcpy(&len, blob.data() + 4, 4);
    if (blob.size() < 8 + static_cast<std::size_t>(len)) {
      throw ParseError(path + ": truncated header (offset 8)");
    }
    const json h = parse_json(blob.substr(8, len), path + " header");
    tensor_from_header(h, path, t);
    const bool has_regions = h.contains("has_regions") &&
                             h.at("has_regions").get<bool>();
    const std::size_t n_features =
        static_cast<std::size_t>(t.num_instances) * t.feature_dim;
    const std::size_t n_costs =
        static_cast<std::size_t>(t.num_instances) * t.space.num_actions();
    std::size_t expected = 8 + len + (n_features + n_costs) * sizeof(double) +
                           (has_regions ? t.num_instances * sizeof(std::int32_t)
                                        : 0u);
    if (blob.size() != expected) {
      throw ParseError(path + ": payload size mismatch at offset " +
                       std::to_string(8 + len));
    }
    std::size_t off = 8 + len;
    t.features.resize(n_features);
    std::memcpy(t.features.data(), blob.data() + off,
                n_features * sizeof(double));
    off += n_features * sizeof(double);
    t.costs.resize(n_costs);
    std::memcpy(t.costs.data(), blob.data() + off, n_costs * sizeof(double));
    off += n_costs * sizeof(double);
    if (has_regions) {
      std::vector<std::int32_t> tags(t.num_instances);
      std::memcpy(tags.data(), blob.data() + off,
                  tags.size() * sizeof(std::int32_t));
      t.region_tags.assign(tags.begin(), tags.end());
    }
  } else {
    const json j = parse_json(blob, path);
    if (!j.contains("format") || j.at("format") != "dact-json") {
      throw ParseError(path + ": not a cost tensor file");
    }
    tensor_from_header(j, path, t);
    const auto features =
        require<std::vector<std::vector<double>>>(j, "features", path);
    for (const auto& row : features) {
      t.features.insert(t.features.end(), row.begin(), row.end());
    }
    const auto costs =
        require<std::vector<std::vector<std::vector<double>>>>(j, "costs", path);
    for (const auto& table : costs) {
      for (const auto& row : table) {
        t.costs.insert(t.costs.end(), row.begin(), row.end());
      }
    }
    if (j.contains("region_tags")) {
      t.region_tags = j.at("region_tags").get<std::vector<int>>();
    }
  }
  t.validate();
  return t;
}

Dataset tensor_to_dataset(const CostTensorFile& tensor, double lambda) {
  tensor.validate();
  if (lambda != 0.0 && !tensor.gamma_base) {
    throw ValidationError(
        "tensor_to_dataset: lambda rescaling requires gamma_base");
  }
  if (lambda < 0.0) {
    throw ValidationError("tensor_to_dataset: lambda must be >= 0");
  }
  Dataset data;
  data.space = tensor.space;
  data.num_instances = tensor.num_instances;
  data.feature_dim = tensor.feature_dim;
  data.features = tensor.features;
  data.costs = tensor.costs;
  data.region_tags = tensor.region_tags;
  if (lambda != 0.0) {
    const int width = tensor.space.num_advice + 1;
    const auto& gamma = *tensor.gamma_base;
    for (int i = 0; i < data.num_instances; ++i) {
      double* row = data.costs.data() +
                    static_cast<std::size_t>(i) * data.space.num_actions();
      for (int j = 0; j < data.space.num_experts; ++j) {
        for (int k = 0; k < width; ++k) row[j * width + k] += lambda * gamma[k];
      }
    }
  }
  double max_entry = 0.0;
  for (double c : data.costs) {
    if (!(c >= 0.0)) {
      throw ValidationError("tensor_to_dataset: negative executed cost");
    }
    max_entry = std::max(max_entry, c);
  }
  data.cost_bound = std::max(max_entry, 1e-300);
  data.validate();
  return data;
}

void write_policy(const std::string& path, const TrainedPolicy& policy) {
  json j;
  j["format"] = "defadv-policy";
  j["version"] = 1;
  j["method"] = method_name(policy.method);
  j["space"] = {{"num_experts", policy.space.num_experts},
                {"num_advice", policy.space.num_advice}};
  json net;
  net["input_dim"] = policy.net.input_dim;
  net["hidden_dims"] = policy.net.hidden_dims;
  net["head"] = head_name(policy.net.head);
  net["plain_output_dim"] = policy.net.plain_output_dim;
  net["head_experts"] = policy.net.head_experts;
  net["head_advice"] = policy.net.head_advice;
  j["net"] = net;
  j["config"] = train_config_to_json(policy.config);
  j["params"] = policy.params;
  j["epoch_losses"] = policy.epoch_losses;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << j.dump() << "\n";
}

TrainedPolicy read_policy(const std::string& path) {
  const json j = parse_json_file(path);
  if (!j.contains("format") || j.at("format") != "defadv-policy") {
    throw ParseError(path + ": not a policy file");
  }
  if (require<int>(j, "version", path) != 1) {
    throw ParseError(path + ": unsupported policy version");
  }
  TrainedPolicy p;
  p.method = method_from_name(require<std::string>(j, "method", path));
  const json& sp = j.at("space");
  p.space = ActionSpace{require<int>(sp, "num_experts", path),
                        require<int>(sp, "num_advice", path)};
  const json& net = j.at("net");
  p.net.input_dim = require<int>(net, "input_dim", path);
  p.net.hidden_dims = require<std::vector<int>>(net, "hidden_dims", path);
  p.net.head = head_from_name(require<std::string>(net, "head", path));
  p.net.plain_output_dim = require<int>(net, "plain_output_dim", path);
  p.net.head_experts = require<int>(net, "head_experts", path);
  p.net.head_advice = require<int>(net, "head_advice", path);
  p.config = train_config_from_json(j.at("config"), path);
  p.params = require<std::vector<double>>(j, "params", path);
  if (j.contains("epoch_losses")) {
    p.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  }
  ScorerNet check(p.net);
  if (check.param_count() != static_cast<int>(p.params.size())) {
    throw ParseError(path + ": parameter count does not match architecture");
  }
  return p;
}

RegionSpec read_region_spec(const std::string& path) {
  return region_spec_from_json(parse_json_file(path), path);
}

void write_region_spec(const std::string& path, const RegionSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << region_spec_to_json(spec).dump(2) << "\n";
}

namespace {

json benchmark_config_to_json(const BenchmarkConfig& c) {
  json j;
  j["train_sizes"] = c.train_sizes;
  j["num_seeds"] = c.num_seeds;
  j["root_seed"] = c.root_seed;
  j["test_size"] = c.test_size;
  j["grid_resolution"] = c.grid_resolution;
  j["spec"] = region_spec_to_json(c.spec);
  j["train"] = train_config_to_json(c.train);
  j["baseline_set"] =
      c.baselines == BaselineSet::synthetic ? "synthetic" : "main";
  return j;
}

json aggregate_to_json(const MethodAggregate& a) {
  json j;
  j["method"] = a.method;
  j["learned"] = a.learned;
  j["train_size"] = a.train_size;
  j["seeds"] = a.seeds;
  j["risk_mean"] = a.risk_mean;
  j["risk_std"] = a.risk_std;
  j["excess_mean"] = a.excess_mean;
  j["excess_std"] = a.excess_std;
  j["advice_rate_pct"] = 100.0 * a.advice_rate_mean;
  j["bayes_match_pct"] = 100.0 * a.match_mean;
  j["risk_region_minus"] = a.risk_minus_mean;
  j["risk_region_plus"] = a.risk_plus_mean;
  j["bayes_match_region_minus_pct"] = 100.0 * a.match_minus_mean;
  j["bayes_match_region_plus_pct"] = 100.0 * a.match_plus_mean;
  return j;
}

void write_decision_map_csv(const std::string& path,
                            const std::vector<int>& grid, int resolution) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      out << grid[static_cast<std::size_t>(r) * resolution + c];
      out << (c + 1 == resolution ? '\n' : ',');
    }
  }
}

}  // namespace

void write_benchmark_report(const std::string& out_dir,
                            const BenchmarkReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  json j;
  j["format"] = "defadv-report";
  j["version"] = 1;
  j["config"] = benchmark_config_to_json(report.config);
  j["bayes"] = {{"risk_analytic", report.bayes_risk_analytic},
                {"action_minus",
                 {{"expert", report.reference.action_minus.expert},
                  {"advice", report.reference.action_minus.advice}}},
                {"action_plus",
                 {{"expert", report.reference.action_plus.expert},
                  {"advice", report.reference.action_plus.advice}}},
                {"oracle", metrics_to_json(report.bayes_oracle)}};
  json aggs = json::array();
  for (const auto& a : report.aggregates) aggs.push_back(aggregate_to_json(a));
  j["aggregates"] = aggs;
  json runs = json::array();
  for (const auto& r : report.runs) {
    json rr = metrics_to_json(r.metrics);
    rr["method"] = r.method;
    rr["learned"] = r.learned;
    rr["train_size"] = r.train_size;
    rr["seed_index"] = r.seed_index;
    runs.push_back(rr);
  }
  j["runs"] = runs;
  {
    std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
    if (!out) throw ParseError("cannot write report.json");
    out << j.dump(2) << "\n";
  }

  {
    std::ofstream out(fs::path(out_dir) / "report.csv", std::ios::binary);
    if (!out) throw ParseError("cannot write report.csv");
    out << "method,learned,train_size,seeds,risk_mean,risk_std,excess_mean,"
           "excess_std,advice_rate_pct,bayes_match_pct,risk_region_minus,"
           "risk_region_plus,match_region_minus_pct,match_region_plus_pct\n";
    out << std::setprecision(10);
    for (const auto& a : report.aggregates) {
      out << a.method << ',' << (a.learned ? 1 : 0) << ',' << a.train_size
          << ',' << a.seeds << ',' << a.risk_mean << ',' << a.risk_std << ','
          << a.excess_mean << ',' << a.excess_std << ','
          << 100.0 * a.advice_rate_mean << ',' << 100.0 * a.match_mean << ','
          << a.risk_minus_mean << ',' << a.risk_plus_mean << ','
          << 100.0 * a.match_minus_mean << ',' << 100.0 * a.match_plus_mean
          << '\n';
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "excess_vs_n.csv", std::ios::binary);
    if (!out) throw ParseError("cannot write excess_vs_n.csv");
    out << "train_size,method,excess_mean,excess_std\n";
    out << std::setprecision(10);
    for (const auto& a : report.aggregates) {
      if (!a.learned) continue;
      out << a.train_size << ',' << a.method << ',' << a.excess_mean << ','
          << a.excess_std << '\n';
    }
  }

  for (const auto& [name, grid] : report.decision_maps) {
    write_decision_map_csv((fs::path(out_dir) / ("map_" + name + ".csv")).string(),
                           grid, report.config.grid_resolution);
  }
}

void print_report(const std::string& report_json_path, std::ostream& os) {
  const json j = parse_json_file(report_json_path);
  if (!j.contains("format") || j.at("format") != "defadv-report") {
    throw ParseError(report_json_path + ": not a benchmark report");
  }
  const double bayes = j.at("bayes").at("risk_analytic").get<double>();
  os << "Analytic Bayes risk: " << bayes << "\n";
  os << "Oracle test risk:    "
     << j.at("bayes").at("oracle").at("risk").get<double>() << "\n\n";

  std::vector<int> sizes;
  for (const auto& a : j.at("aggregates")) {
    const int n = a.at("train_size").get<int>();
    if (std::find(sizes.begin(), sizes.end(), n) == sizes.end()) {
      sizes.push_back(n);
    }
  }
  std::sort(sizes.begin(), sizes.end());
  for (int n : sizes) {
    os << "train size " << n << "\n";
    os << "  " << std::left << std::setw(30) << "method" << std::right
       << std::setw(10) << "risk" << std::setw(10) << "excess" << std::setw(10)
       << "advice%" << std::setw(10) << "match%" << "\n";
    for (const auto& a : j.at("aggregates")) {
      if (a.at("train_size").get<int>() != n) continue;
      std::ostringstream row;
      row << "  " << std::left << std::setw(30)
          << a.at("method").get<std::string>() << std::right << std::fixed
          << std::setprecision(3) << std::setw(10) << a.at("risk_mean").get<double>()
          << std::setw(10) << a.at("excess_mean").get<double>() << std::setw(10)
          << a.at("advice_rate_pct").get<double>() << std::setw(10)
          << a.at("bayes_match_pct").get<double>();
      os << row.str() << "\n";
    }
  }
}

void write_fisher_certificate(const std::string& path,
                              const FisherCertificate& cert, double b,
                              double eps, double bound_c) {
  json j;
  j["format"] = "defadv-fisher-certificate";
  j["version"] = 1;
  j["inputs"] = {{"b", b}, {"eps", eps}, {"C", bound_c}};
  j["delta"] = cert.delta;
  j["table"] = {{cert.table.at(0, 0), cert.table.at(0, 1)},
                {cert.table.at(1, 0), cert.table.at(1, 1)}};
  j["profiled_summary_expert_1"] = cert.summary_top;
  j["profiled_summary_expert_2"] = cert.summary_bottom;
  j["router_minimizer"] = cert.router_score;
  j["router_minimizer_sign"] = cert.router_score > 0.0
                                   ? "positive (decodes to expert 2)"
                                   : "non-positive (decodes to expert 1)";
  j["bayes"] = {{"expert", cert.bayes.executed.expert},
                {"advice", cert.bayes.executed.advice},
                {"risk", cert.bayes.risk}};
  j["surrogate_minimizer"] = {{"router", cert.surrogate_scores.router},
                              {"query_1", cert.surrogate_scores.query_1},
                              {"query_2", cert.surrogate_scores.query_2},
                              {"value", cert.surrogate_value}};
  j["surrogate_action"] = {{"expert", cert.surrogate_action.expert},
                           {"advice", cert.surrogate_action.advice}};
  j["disagreement"] =
      cert.bayes.executed.expert != cert.surrogate_action.expert;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace defadv
