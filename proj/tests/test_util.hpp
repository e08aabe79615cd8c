#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "defadv/common.hpp"
#include "defadv/core.hpp"

namespace test_util {

/// Central finite differences, the independent gradient oracle.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double step = 1e-5) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double hi = f(x);
    x[i] = saved - step;
    const double lo = f(x);
    x[i] = saved;
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

/// L2-relative distance with a floor to tolerate near-zero gradients.
inline double relative_error(const std::vector<double>& a,
                             const std::vector<double>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / (std::sqrt(ref) + 1e-8);
}

inline defadv::CostTable random_table(defadv::Rng& rng, int num_experts,
                                      int num_advice, bool quantized = false) {
  const defadv::ActionSpace space{num_experts, num_advice};
  std::vector<double> costs(space.num_actions());
  for (double& c : costs) {
    // Quantized entries force ties so tie-break rules get exercised.
    c = quantized ? 0.1 * rng.uniform_int(11) : rng.uniform();
  }
  return defadv::CostTable(space, std::move(costs), 1.0 + 1e-12);
}

/// The 3x3 realized cost table of the single-instance walkthrough.
inline defadv::CostTable worked_example_table() {
  return defadv::CostTable(defadv::ActionSpace{3, 2},
                           {0.35, 0.42, 0.38, 0.40, 0.20, 0.45, 0.50, 0.48,
                            0.25},
                           1.0);
}

}  // namespace test_util
