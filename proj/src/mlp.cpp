#include "defadv/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace defadv {

void NetConfig::validate() const {
  if (input_dim < 1) throw ValidationError("NetConfig: input_dim must be >= 1");
  if (hidden_dims.empty()) {
    throw ValidationError("NetConfig: at least one hidden layer required");
  }
  for (int h : hidden_dims) {
    if (h < 1) throw ValidationError("NetConfig: hidden widths must be >= 1");
  }
  if (head == HeadKind::plain) {
    if (plain_output_dim < 1) {
      throw ValidationError("NetConfig: plain head needs output_dim >= 1");
    }
  } else {
    if (head_experts < 1 || head_advice < 0) {
      throw ValidationError("NetConfig: structured head needs J >= 1, K >= 0");
    }
  }
}

ScorerNet::ScorerNet(NetConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  int offset = 0;
  int in = cfg_.input_dim;
  for (int h : cfg_.hidden_dims) {
    layers_.push_back(Layer{in, h, offset, offset + in * h});
    offset += in * h + h;
    in = h;
  }
  if (cfg_.head == HeadKind::plain) {
    const int out = cfg_.plain_output_dim;
    layers_.push_back(Layer{in, out, offset, offset + in * out});
    offset += in * out + out;
  } else {
    const int d = cfg_.latent_dim();
    const int J = cfg_.head_experts;
    const int Kp1 = cfg_.head_advice + 1;
    rho_off_ = offset;
    a_off_ = rho_off_ + J;
    delta_off_ = a_off_ + J * d;
    g_off_ = delta_off_ + Kp1;
    m_off_ = g_off_ + Kp1 * d;
    offset = m_off_ + J * d;
  }
  params_.assign(offset, 0.0);
}

ScorerNet ScorerNet::initialized(NetConfig config, std::uint64_t seed) {
  ScorerNet net(std::move(config));
  Rng rng(seed);
  auto fill = [&](int begin, int count, double bound) {
    for (int i = 0; i < count; ++i) {
      net.params_[begin + i] = rng.uniform(-bound, bound);
    }
  };
  for (const Layer& l : net.layers_) {
    const double bound = std::sqrt(1.0 / l.in);
    fill(l.w_offset, l.in * l.out, bound);
    fill(l.b_offset, l.out, bound);
  }
  if (net.cfg_.head == HeadKind::structured) {
    const int d = net.cfg_.latent_dim();
    const int J = net.cfg_.head_experts;
    const int Kp1 = net.cfg_.head_advice + 1;
    const double bound = std::sqrt(1.0 / d);
    fill(net.rho_off_, J, bound);
    fill(net.a_off_, J * d, bound);
    fill(net.delta_off_, Kp1, bound);
    fill(net.g_off_, Kp1 * d, bound);
    fill(net.m_off_, J * d, bound);
  }
  return net;
}

std::pair<int, int> ScorerNet::advice_param_range() const {
  if (cfg_.head != HeadKind::structured) {
    throw ValidationError("advice_param_range: plain head has no advice block");
  }
  return {delta_off_, m_off_};  // delta and g are contiguous
}

void ScorerNet::head_forward(const double* z, double* scores) const {
  const int d = cfg_.latent_dim();
  const int J = cfg_.head_experts;
  const int Kp1 = cfg_.head_advice + 1;
  const double* rho = params_.data() + rho_off_;
  const double* a = params_.data() + a_off_;
  const double* delta = params_.data() + delta_off_;
  const double* g = params_.data() + g_off_;
  const double* m = params_.data() + m_off_;
  for (int j = 0; j < J; ++j) {
    double routing = rho[j];
    for (int t = 0; t < d; ++t) routing += a[j * d + t] * z[t];
    for (int k = 0; k < Kp1; ++k) {
      double adjust = delta[k];
      for (int t = 0; t < d; ++t) adjust += m[j * d + t] * g[k * d + t] * z[t];
      scores[j * Kp1 + k] = routing + adjust;
    }
  }
}

void ScorerNet::head_backward(const double* z, const double* dscores,
                              double* dz, double* grad) const {
  const int d = cfg_.latent_dim();
  const int J = cfg_.head_experts;
  const int Kp1 = cfg_.head_advice + 1;
  const double* a = params_.data() + a_off_;
  const double* g = params_.data() + g_off_;
  const double* m = params_.data() + m_off_;
  double* drho = grad + rho_off_;
  double* da = grad + a_off_;
  double* ddelta = grad + delta_off_;
  double* dg = grad + g_off_;
  double* dm = grad + m_off_;
  for (int j = 0; j < J; ++j) {
    double row_sum = 0.0;
    for (int k = 0; k < Kp1; ++k) {
      const double ds = dscores[j * Kp1 + k];
      row_sum += ds;
      ddelta[k] += ds;
      for (int t = 0; t < d; ++t) {
        const double zt = z[t];
        dm[j * d + t] += ds * g[k * d + t] * zt;
        dg[k * d + t] += ds * m[j * d + t] * zt;
        dz[t] += ds * m[j * d + t] * g[k * d + t];
      }
    }
    drho[j] += row_sum;
    for (int t = 0; t < d; ++t) {
      da[j * d + t] += row_sum * z[t];
      dz[t] += row_sum * a[j * d + t];
    }
  }
}

void ScorerNet::forward(std::span<const double> x,
                        std::span<double> scores) const {
  if (static_cast<int>(x.size()) != cfg_.input_dim) {
    throw ValidationError("ScorerNet::forward: feature dimension mismatch");
  }
  if (static_cast<int>(scores.size()) != cfg_.output_dim()) {
    throw ValidationError("ScorerNet::forward: score buffer size mismatch");
  }
  Cache cache;
  forward_batch(x, 1, cache);
  std::copy(cache.scores.begin(), cache.scores.end(), scores.begin());
}

std::vector<double> ScorerNet::forward(std::span<const double> x) const {
  std::vector<double> out(cfg_.output_dim());
  forward(x, out);
  return out;
}

void ScorerNet::forward_batch(std::span<const double> X, int batch,
                              Cache& cache) const {
  const int num_hidden = static_cast<int>(cfg_.hidden_dims.size());
  cache.acts.resize(num_hidden);
  cache.scores.assign(static_cast<std::size_t>(batch) * cfg_.output_dim(), 0.0);

  const double* cur = X.data();
  int cur_dim = cfg_.input_dim;
  for (int l = 0; l < num_hidden; ++l) {
    const Layer& layer = layers_[l];
    auto& act = cache.acts[l];
    act.assign(static_cast<std::size_t>(batch) * layer.out, 0.0);
    const double* W = params_.data() + layer.w_offset;
    const double* bias = params_.data() + layer.b_offset;
    for (int b = 0; b < batch; ++b) {
      const double* xin = cur + static_cast<std::size_t>(b) * cur_dim;
      double* xout = act.data() + static_cast<std::size_t>(b) * layer.out;
      for (int o = 0; o < layer.out; ++o) {
        double s = bias[o];
        const double* w = W + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) s += w[i] * xin[i];
        xout[o] = s > 0.0 ? s : 0.0;
      }
    }
    cur = act.data();
    cur_dim = layer.out;
  }

  const int out_dim = cfg_.output_dim();
  if (cfg_.head == HeadKind::plain) {
    const Layer& layer = layers_.back();
    const double* W = params_.data() + layer.w_offset;
    const double* bias = params_.data() + layer.b_offset;
    for (int b = 0; b < batch; ++b) {
      const double* z = cur + static_cast<std::size_t>(b) * cur_dim;
      double* s = cache.scores.data() + static_cast<std::size_t>(b) * out_dim;
      for (int o = 0; o < layer.out; ++o) {
        double v = bias[o];
        const double* w = W + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) v += w[i] * z[i];
        s[o] = v;
      }
    }
  } else {
    for (int b = 0; b < batch; ++b) {
      head_forward(cur + static_cast<std::size_t>(b) * cur_dim,
                   cache.scores.data() + static_cast<std::size_t>(b) * out_dim);
    }
  }
}

void ScorerNet::backward_batch(std::span<const double> X, int batch,
                               Cache& cache, std::span<const double> dscores,
                               std::span<double> grad) const {
  const int num_hidden = static_cast<int>(cfg_.hidden_dims.size());
  cache.dacts.resize(num_hidden);
  for (int l = 0; l < num_hidden; ++l) {
    cache.dacts[l].assign(cache.acts[l].size(), 0.0);
  }

  const double* z = cache.acts[num_hidden - 1].data();
  const int latent = cfg_.latent_dim();
  double* dz = cache.dacts[num_hidden - 1].data();
  const int out_dim = cfg_.output_dim();

  if (cfg_.head == HeadKind::plain) {
    const Layer& layer = layers_.back();
    const double* W = params_.data() + layer.w_offset;
    double* dW = grad.data() + layer.w_offset;
    double* db = grad.data() + layer.b_offset;
    for (int b = 0; b < batch; ++b) {
      const double* zb = z + static_cast<std::size_t>(b) * latent;
      double* dzb = dz + static_cast<std::size_t>(b) * latent;
      const double* ds = dscores.data() + static_cast<std::size_t>(b) * out_dim;
      for (int o = 0; o < layer.out; ++o) {
        const double d = ds[o];
        if (d == 0.0) continue;
        db[o] += d;
        const double* w = W + static_cast<std::size_t>(o) * layer.in;
        double* dw = dW + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) {
          dw[i] += d * zb[i];
          dzb[i] += d * w[i];
        }
      }
    }
  } else {
    for (int b = 0; b < batch; ++b) {
      head_backward(z + static_cast<std::size_t>(b) * latent,
                    dscores.data() + static_cast<std::size_t>(b) * out_dim,
                    dz + static_cast<std::size_t>(b) * latent, grad.data());
    }
  }

  // Backbone, last hidden layer down to the input.
  for (int l = num_hidden - 1; l >= 0; --l) {
    const Layer& layer = layers_[l];
    const double* act = cache.acts[l].data();
    double* dact = cache.dacts[l].data();
    const double* below =
        l == 0 ? X.data() : cache.acts[l - 1].data();
    double* dbelow = l == 0 ? nullptr : cache.dacts[l - 1].data();
    const int in_dim = layer.in;
    const double* W = params_.data() + layer.w_offset;
    double* dW = grad.data() + layer.w_offset;
    double* db = grad.data() + layer.b_offset;
    for (int b = 0; b < batch; ++b) {
      const double* ab = act + static_cast<std::size_t>(b) * layer.out;
      double* dab = dact + static_cast<std::size_t>(b) * layer.out;
      const double* xb = below + static_cast<std::size_t>(b) * in_dim;
      double* dxb =
          dbelow ? dbelow + static_cast<std::size_t>(b) * in_dim : nullptr;
      for (int o = 0; o < layer.out; ++o) {
        // ReLU mask: activation zero means the unit was clamped.
        const double d = ab[o] > 0.0 ? dab[o] : 0.0;
        if (d == 0.0) continue;
        db[o] += d;
        const double* w = W + static_cast<std::size_t>(o) * in_dim;
        double* dw = dW + static_cast<std::size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) {
          dw[i] += d * xb[i];
          if (dxb) dxb[i] += d * w[i];
        }
      }
    }
  }
}

void adamw_step(AdamWState& state, std::span<double> params,
                std::span<double> grads, const AdamWConfig& config) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw ValidationError("adamw_step: size mismatch");
  }
  if (config.grad_clip_norm > 0.0) {
    double norm_sq = 0.0;
    for (double g : grads) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    if (norm > config.grad_clip_norm) {
      const double scale = config.grad_clip_norm / norm;
      for (double& g : grads) g *= scale;
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first_moment[i] =
        config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * grads[i];
    state.second_moment[i] = config.beta2 * state.second_moment[i] +
                             (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = state.first_moment[i] / bc1;
    const double v_hat = state.second_moment[i] / bc2;
    params[i] -= config.learning_rate *
                 (m_hat / (std::sqrt(v_hat) + config.epsilon) +
                  config.weight_decay * params[i]);
  }
}

}  // namespace defadv
