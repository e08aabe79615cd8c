#pragma once

#include <optional>
#include <span>
#include <vector>

#include "defadv/bayes.hpp"
#include "defadv/core.hpp"

namespace defadv {

struct LossValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Comp-sum multiclass loss at parameter tau >= 0 with its exact gradient.
/// tau = 1 is the log-softmax loss; tau = 0 the sum-exponential; tau = 2
/// the MAE-like bounded member. Stabilized so uniformly large scores do
/// not overflow.
LossValueGrad comp_sum(std::span<const double> scores, int label, double tau);

/// Weighted sum of comp-sum terms, one per composite action. Shares the
/// softmax across labels, so it costs O(|Pi|) rather than O(|Pi|^2).
LossValueGrad augmented_surrogate(std::span<const double> scores,
                                  std::span<const double> weights, double tau);

/// Same computation writing the gradient into a caller buffer (training
/// hot path). Returns the loss value.
double augmented_surrogate_into(std::span<const double> scores,
                                std::span<const double> weights, double tau,
                                std::span<double> grad_out);

/// Scores of the binary separated router/query parameterization
/// (two experts, one advice source).
struct SeparatedScores {
  double router = 0.0;
  double query_1 = 0.0;  // expert 0's query score
  double query_2 = 0.0;  // expert 1's query score
};

struct SeparatedValueGrad {
  double value = 0.0;
  double d_router = 0.0;
  double d_query_1 = 0.0;
  double d_query_2 = 0.0;
};

/// Logistic-envelope separated surrogate on a 2x2 cost table:
///   Phi0(s_r) * [c00*Phi0(q1) + c01*Phi1(q1)]
/// + Phi1(s_r) * [c10*Phi0(q2) + c11*Phi1(q2)]
/// with Phi0(u) = log(1+e^-u), Phi1(u) = log(1+e^u).
SeparatedValueGrad separated_surrogate(const SeparatedScores& scores,
                                       const CostTable& table);

/// Overload on a flat 4-entry cost row (c00, c01, c10, c11).
SeparatedValueGrad separated_surrogate(const SeparatedScores& scores,
                                       std::span<const double> costs);

/// Row summary after profiling out a query score:
///   F(u, v) = inf_t [ u*Phi0(t) + v*Phi1(t) ]
/// Closed form (u+v)log(u+v) - u*log(u) - v*log(v), attained at
/// t* = log(u/v). With `cross_check` the closed form is validated against
/// a 1-D numeric minimizer.
struct ProfiledSummary {
  double value = 0.0;
  double minimizer = 0.0;
};
ProfiledSummary profiled_summary(double u, double v, bool cross_check = false);

/// Minimizer of a*Phi0(t) + b*Phi1(t): t* = log(a/b). Positive sign means
/// the second expert wins the profiled comparison.
double router_minimizer(double a, double b);

/// Numeric minimizer of the full three-score separated surrogate on a
/// 2x2 table (query scores first, then the profiled router objective).
SeparatedScores minimize_separated(const CostTable& table);

/// Constructive Fisher-inconsistency certificate: a bounded 2x2 table
/// whose Bayes decision routes to expert 0 while the unique separated
/// surrogate minimizer decodes to expert 1.
struct FisherCertificate {
  double delta = 0.0;
  CostTable table;
  double summary_top = 0.0;     // F(b - delta, C)
  double summary_bottom = 0.0;  // F(b, b + eps)
  double router_score = 0.0;    // minimizer of the profiled router objective
  BayesDecision bayes;
  SeparatedScores surrogate_scores;  // numeric full minimization
  double surrogate_value = 0.0;
  Action surrogate_action{};
};

/// Builds the certificate for parameters 0 < b < C, 0 < eps < C - b.
/// The default delta is half the largest feasible value, located by
/// bisection on F(b - delta, C) - F(b, b + eps); pass `delta` to pin it.
FisherCertificate fisher_counterexample(double b, double eps, double bound_c,
                                        std::optional<double> delta = {});

/// Piecewise concave transfer function of the comp-sum consistency bound.
double transfer_gamma(double u, double tau, int cardinality);

/// Weight-mass-scaled transfer: mass * Gamma(u / mass).
double transfer_gamma_tilde(double u, double tau, int cardinality,
                            double weight_mass);

}  // namespace defadv
