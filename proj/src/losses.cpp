#include "defadv/losses.hpp"

#include <algorithm>
#include <cmath>

namespace defadv {

namespace {

void check_tau(double tau) {
  if (!(tau >= 0.0)) throw ValidationError("comp-sum: tau must be >= 0");
}

void check_binary_table(const CostTable& table) {
  if (!(table.space() == ActionSpace{2, 1})) {
    throw ValidationError("separated surrogate: table must be 2x2 (J=2, K=1)");
  }
}

}  // namespace

LossValueGrad comp_sum(std::span<const double> scores, int label, double tau) {
  check_tau(tau);
  const int n = static_cast<int>(scores.size());
  if (n == 0) throw ValidationError("comp_sum: empty score vector");
  if (label < 0 || label >= n) {
    throw std::out_of_range("comp_sum: label out of range");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("comp_sum: non-finite score");
  }

  // lse = log sum_i exp(s_i - s_label) >= 0, computed via a shared softmax.
  const double lse_all = logsumexp(scores);
  const double lse = lse_all - scores[label];

  LossValueGrad out;
  out.grad.resize(n);
  double scale;  // d(value)/d(lse) = exp((1 - tau) * lse)
  if (tau == 1.0) {
    out.value = lse;
    scale = 1.0;
  } else {
    scale = std::exp((1.0 - tau) * lse);
    out.value = (scale - 1.0) / (1.0 - tau);
  }
  for (int i = 0; i < n; ++i) {
    const double p = std::exp(scores[i] - lse_all);  // softmax
    out.grad[i] = scale * (p - (i == label ? 1.0 : 0.0));
  }
  return out;
}

double augmented_surrogate_into(std::span<const double> scores,
                                std::span<const double> weights, double tau,
                                std::span<double> grad_out) {
  check_tau(tau);
  const int n = static_cast<int>(scores.size());
  if (n == 0 || weights.size() != scores.size() ||
      grad_out.size() != scores.size()) {
    throw ValidationError("augmented surrogate: size mismatch");
  }
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw ValidationError("augmented surrogate: weights must be >= 0");
    }
  }

  const double lse_all = logsumexp(scores);
  double value = 0.0;
  double weighted_scale = 0.0;  // sum_i w_i * exp((1-tau) * lse_i)
  std::vector<double> scale(n);
  for (int i = 0; i < n; ++i) {
    const double lse_i = lse_all - scores[i];
    if (tau == 1.0) {
      scale[i] = 1.0;
      value += weights[i] * lse_i;
    } else {
      scale[i] = std::exp((1.0 - tau) * lse_i);
      value += weights[i] * (scale[i] - 1.0) / (1.0 - tau);
    }
    weighted_scale += weights[i] * scale[i];
  }
  for (int i = 0; i < n; ++i) {
    const double p = std::exp(scores[i] - lse_all);
    grad_out[i] = weighted_scale * p - weights[i] * scale[i];
  }
  return value;
}

LossValueGrad augmented_surrogate(std::span<const double> scores,
                                  std::span<const double> weights, double tau) {
  LossValueGrad out;
  out.grad.resize(scores.size());
  out.value = augmented_surrogate_into(scores, weights, tau, out.grad);
  return out;
}

SeparatedValueGrad separated_surrogate(const SeparatedScores& scores,
                                       const CostTable& table) {
  check_binary_table(table);
  return separated_surrogate(scores, table.entries());
}

SeparatedValueGrad separated_surrogate(const SeparatedScores& scores,
                                       std::span<const double> costs) {
  if (costs.size() != 4) {
    throw ValidationError("separated surrogate: expected 4 cost entries");
  }
  const double c00 = costs[0], c01 = costs[1];
  const double c10 = costs[2], c11 = costs[3];

  const double phi0_r = softplus(-scores.router);
  const double phi1_r = softplus(scores.router);
  const double bracket_1 =
      c00 * softplus(-scores.query_1) + c01 * softplus(scores.query_1);
  const double bracket_2 =
      c10 * softplus(-scores.query_2) + c11 * softplus(scores.query_2);

  SeparatedValueGrad out;
  out.value = phi0_r * bracket_1 + phi1_r * bracket_2;
  // d/du softplus(-u) = -sigmoid(-u), d/du softplus(u) = sigmoid(u).
  out.d_router =
      -sigmoid(-scores.router) * bracket_1 + sigmoid(scores.router) * bracket_2;
  out.d_query_1 = phi0_r * (-c00 * sigmoid(-scores.query_1) +
                            c01 * sigmoid(scores.query_1));
  out.d_query_2 = phi1_r * (-c10 * sigmoid(-scores.query_2) +
                            c11 * sigmoid(scores.query_2));
  return out;
}

ProfiledSummary profiled_summary(double u, double v, bool cross_check) {
  if (!(u > 0.0) || !(v > 0.0)) {
    throw ValidationError("profiled_summary: u and v must be positive");
  }
  ProfiledSummary s;
  s.minimizer = std::log(u / v);
  s.value = (u + v) * std::log(u + v) - u * std::log(u) - v * std::log(v);
  if (cross_check) {
    auto objective = [&](double t) {
      return u * softplus(-t) + v * softplus(t);
    };
    const double t_num = minimize_scalar(objective, -60.0, 60.0, 1e-12);
    const double f_num = objective(t_num);
    if (std::abs(f_num - s.value) > 1e-8) {
      throw std::logic_error(
          "profiled_summary: closed form disagrees with numeric minimizer");
    }
  }
  return s;
}

double router_minimizer(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw ValidationError("router_minimizer: inputs must be positive");
  }
  return std::log(a / b);
}

SeparatedScores minimize_separated(const CostTable& table) {
  check_binary_table(table);
  const double c00 = table.at(0, 0), c01 = table.at(0, 1);
  const double c10 = table.at(1, 0), c11 = table.at(1, 1);

  auto row_objective = [](double a, double b) {
    return [a, b](double t) { return a * softplus(-t) + b * softplus(t); };
  };
  SeparatedScores s;
  s.query_1 = minimize_scalar(row_objective(c00, c01), -60.0, 60.0, 1e-12);
  s.query_2 = minimize_scalar(row_objective(c10, c11), -60.0, 60.0, 1e-12);

  // The query minimizers do not depend on the router score, so the router
  // objective profiles to a 1-D problem over the minimized brackets.
  const double bracket_1 =
      c00 * softplus(-s.query_1) + c01 * softplus(s.query_1);
  const double bracket_2 =
      c10 * softplus(-s.query_2) + c11 * softplus(s.query_2);
  s.router =
      minimize_scalar(row_objective(bracket_1, bracket_2), -60.0, 60.0, 1e-12);
  return s;
}

FisherCertificate fisher_counterexample(double b, double eps, double bound_c,
                                        std::optional<double> delta) {
  if (!(b > 0.0) || !(b < bound_c)) {
    throw ValidationError("fisher_counterexample: need 0 < b < C");
  }
  if (!(eps > 0.0) || !(eps < bound_c - b)) {
    throw ValidationError("fisher_counterexample: need 0 < eps < C - b");
  }

  const double target = profiled_summary(b, b + eps).value;  // F(b, b+eps)
  auto gap = [&](double d) {
    return profiled_summary(b - d, bound_c).value - target;
  };

  double chosen;
  if (delta.has_value()) {
    chosen = *delta;
    if (!(chosen > 0.0) || !(chosen < b)) {
      throw ValidationError("fisher_counterexample: delta must lie in (0, b)");
    }
    if (!(gap(chosen) > 0.0)) {
      throw ValidationError(
          "fisher_counterexample: delta too large, profiled gap not positive");
    }
  } else {
    // gap(0) > 0 since C > b + eps and F is strictly increasing in v;
    // gap(delta) decreases to -F(b, b+eps) as delta -> b. Bisect for the
    // root and keep half of it so the strict inequality holds.
    double lo = 0.0, hi = b * (1.0 - 1e-12);
    if (gap(hi) > 0.0) {
      chosen = 0.5 * hi;
    } else {
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
      }
      chosen = 0.5 * lo;
    }
    if (!(chosen > 0.0)) {
      throw ValidationError("fisher_counterexample: no feasible delta found");
    }
  }

  FisherCertificate cert;
  cert.delta = chosen;
  cert.table = CostTable(ActionSpace{2, 1},
                         {b - chosen, bound_c, b, b + eps}, bound_c);
  cert.summary_top = profiled_summary(b - chosen, bound_c).value;
  cert.summary_bottom = target;
  cert.router_score = router_minimizer(cert.summary_top, cert.summary_bottom);
  cert.bayes = bayes_policy(cert.table);
  cert.surrogate_scores = minimize_separated(cert.table);
  cert.surrogate_value =
      separated_surrogate(cert.surrogate_scores, cert.table).value;
  const int expert = cert.surrogate_scores.router >= 0.0 ? 1 : 0;
  const double q =
      expert == 0 ? cert.surrogate_scores.query_1 : cert.surrogate_scores.query_2;
  cert.surrogate_action = Action{expert, q >= 0.0 ? 1 : 0};
  return cert;
}

double transfer_gamma(double u, double tau, int cardinality) {
  check_tau(tau);
  if (!(u >= 0.0)) throw ValidationError("transfer_gamma: u must be >= 0");
  if (cardinality < 2) {
    throw ValidationError("transfer_gamma: cardinality must be >= 2");
  }
  const double n = static_cast<double>(cardinality);
  if (tau < 1.0) return std::sqrt(std::pow(2.0, tau) * (2.0 - tau) * u);
  if (tau < 2.0) return std::sqrt(2.0 * std::pow(n, tau - 1.0) * u);
  return (tau - 1.0) * std::pow(n, tau - 1.0) * u;
}

double transfer_gamma_tilde(double u, double tau, int cardinality,
                            double weight_mass) {
  if (!(weight_mass > 0.0)) {
    throw ValidationError("transfer_gamma_tilde: weight mass must be positive");
  }
  return weight_mass * transfer_gamma(u / weight_mass, tau, cardinality);
}

}  // namespace defadv
