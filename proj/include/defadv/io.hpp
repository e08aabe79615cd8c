#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defadv/core.hpp"
#include "defadv/losses.hpp"
#include "defadv/synth.hpp"
#include "defadv/train.hpp"

namespace defadv {

/// Precomputed executed-pair cost tensor for replaying evaluations.
/// When `gamma_base` is present the stored costs are at lambda = 0 and the
/// advice fees are applied at load time.
struct CostTensorFile {
  int version = 1;
  ActionSpace space{};
  int num_instances = 0;
  int feature_dim = 0;
  std::vector<double> features;  // n x d, row-major
  std::vector<double> costs;     // n x J*(K+1), row-major
  std::vector<int> region_tags;            // optional, length n
  std::vector<std::string> labels;         // optional, length n
  std::optional<std::vector<double>> gamma_base;   // length K+1, [0] = 0
  std::optional<std::vector<double>> expert_fees;  // length J
  std::optional<std::vector<double>> lambda_grid;  // suggested sweep

  void validate() const;
};

enum class TensorFormat { binary, json };

/// Binary container: "DACT" magic, little-endian u32 header length, JSON
/// header, then float64 payload. The JSON variant holds everything inline
/// for small human-readable fixtures. Reading sniffs the magic.
void write_cost_tensor(const std::string& path, const CostTensorFile& tensor,
                       TensorFormat format);
CostTensorFile read_cost_tensor(const std::string& path);

/// Materializes a dataset at the requested cost multiplier. A nonzero
/// lambda requires gamma_base.
Dataset tensor_to_dataset(const CostTensorFile& tensor, double lambda);

/// Versioned JSON policy blob: method tag, config snapshot, parameters.
void write_policy(const std::string& path, const TrainedPolicy& policy);
TrainedPolicy read_policy(const std::string& path);

RegionSpec read_region_spec(const std::string& path);
void write_region_spec(const std::string& path, const RegionSpec& spec);

/// Emits report.json, report.csv, excess_vs_n.csv and one decision-map CSV
/// per entry into `out_dir` (created if missing).
void write_benchmark_report(const std::string& out_dir,
                            const BenchmarkReport& report);

/// Formats the per-method tables of a previously written report.json.
void print_report(const std::string& report_json_path, std::ostream& os);

/// JSON certificate for the separated-surrogate counterexample.
void write_fisher_certificate(const std::string& path,
                              const FisherCertificate& cert, double b,
                              double eps, double bound_c);

}  // namespace defadv
