#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "defadv/common.hpp"

namespace defadv {

enum class HeadKind { plain, structured };

/// Architecture of a score network: ReLU MLP backbone plus either a plain
/// linear output layer or the structured routing/advice head
///   s(x,(j,k)) = rho_j + <a_j, z> + delta_k + <m_j, g_k (*) z>
/// where z is the last hidden activation and (*) is the elementwise product.
struct NetConfig {
  int input_dim = 2;
  std::vector<int> hidden_dims = {32, 32};
  HeadKind head = HeadKind::plain;
  int plain_output_dim = 0;  // head == plain
  int head_experts = 0;      // head == structured
  int head_advice = 0;

  int latent_dim() const { return hidden_dims.back(); }
  int output_dim() const {
    return head == HeadKind::plain ? plain_output_dim
                                   : head_experts * (head_advice + 1);
  }
  void validate() const;
};

/// Feedforward scorer with explicit flat parameters and exact reverse-mode
/// gradients. No autodiff framework; the batch paths are the training hot
/// loop.
class ScorerNet {
 public:
  explicit ScorerNet(NetConfig config);

  /// Seeded init, uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)] per layer.
  static ScorerNet initialized(NetConfig config, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  int param_count() const { return static_cast<int>(params_.size()); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  /// Parameter slice [begin, end) holding the structured head's advice
  /// parameters (delta then g). Zeroing it removes the advice adjustment.
  std::pair<int, int> advice_param_range() const;

  void forward(std::span<const double> x, std::span<double> scores) const;
  std::vector<double> forward(std::span<const double> x) const;

  struct Cache {
    std::vector<std::vector<double>> acts;   // per hidden layer, batch x dim
    std::vector<std::vector<double>> dacts;  // scratch for backward
    std::vector<double> scores;              // batch x output_dim
  };

  /// X is batch x input_dim, row-major. Fills cache.scores.
  void forward_batch(std::span<const double> X, int batch, Cache& cache) const;

  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(scores).
  void backward_batch(std::span<const double> X, int batch, Cache& cache,
                      std::span<const double> dscores,
                      std::span<double> grad) const;

 private:
  struct Layer {
    int in = 0, out = 0;
    int w_offset = 0, b_offset = 0;
  };

  NetConfig cfg_;
  std::vector<Layer> layers_;  // backbone; plain head appended as last layer
  // Structured head offsets (valid when head == structured).
  int rho_off_ = 0, a_off_ = 0, delta_off_ = 0, g_off_ = 0, m_off_ = 0;
  std::vector<double> params_;

  void head_forward(const double* z, double* scores) const;
  void head_backward(const double* z, const double* dscores, double* dz,
                     double* grad) const;
};

/// Decoupled-weight-decay adaptive-moment optimizer with bias correction.
struct AdamWConfig {
  double learning_rate = 3e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip_norm = 10.0;
};

struct AdamWState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;

  explicit AdamWState(int param_count)
      : first_moment(param_count, 0.0), second_moment(param_count, 0.0) {}
};

/// One update. The gradient is clipped to the configured global norm in
/// place before the moment update.
void adamw_step(AdamWState& state, std::span<double> params,
                std::span<double> grads, const AdamWConfig& config);

}  // namespace defadv
