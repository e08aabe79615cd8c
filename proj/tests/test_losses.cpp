#include <doctest.h>

#include <cmath>

#include "defadv/losses.hpp"
#include "test_util.hpp"

using namespace defadv;

namespace {

std::vector<double> random_scores(Rng& rng, int n, double scale = 2.0) {
  std::vector<double> s(n);
  for (double& x : s) x = rng.uniform(-scale, scale);
  return s;
}

// Naive direct formula, the reference the stabilized path is checked
// against on moderate inputs.
double comp_sum_direct(const std::vector<double>& scores, int label,
                       double tau) {
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - scores[label]);
  if (tau == 1.0) return std::log(sum);
  return (std::pow(sum, 1.0 - tau) - 1.0) / (1.0 - tau);
}

}  // namespace

TEST_CASE("comp_sum on uniform scores") {
  const std::vector<double> scores(4, 0.7);
  CHECK(comp_sum(scores, 0, 1.0).value == doctest::Approx(std::log(4.0)));
  CHECK(comp_sum(scores, 2, 0.0).value == doctest::Approx(3.0));

  // Stabilization: uniformly huge scores must not overflow.
  const std::vector<double> huge(4, 1.0e4);
  CHECK(comp_sum(huge, 1, 1.0).value == doctest::Approx(std::log(4.0)));
  CHECK(comp_sum(huge, 1, 0.0).value == doctest::Approx(3.0));
  CHECK(std::isfinite(comp_sum(huge, 1, 3.0).value));
}

TEST_CASE("comp_sum matches the direct formula") {
  const std::vector<double> scores{2.0, 0.0, 0.0, 0.0};
  CHECK(comp_sum(scores, 0, 1.0).value ==
        doctest::Approx(std::log(1.0 + 3.0 * std::exp(-2.0))));

  Rng rng(42);
  for (double tau : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto scores = random_scores(rng, 2 + rng.uniform_int(8));
      const int label = rng.uniform_int(static_cast<int>(scores.size()));
      CHECK(comp_sum(scores, label, tau).value ==
            doctest::Approx(comp_sum_direct(scores, label, tau)).epsilon(1e-10));
    }
  }
}

TEST_CASE("comp_sum validation and positivity") {
  const std::vector<double> scores{0.0, 1.0};
  CHECK_THROWS_AS(comp_sum(scores, 0, -0.5), ValidationError);
  CHECK_THROWS_AS(comp_sum(scores, 2, 1.0), std::out_of_range);

  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = random_scores(rng, 2 + rng.uniform_int(6), 5.0);
    const int label = rng.uniform_int(static_cast<int>(s.size()));
    for (double tau : {0.0, 0.7, 1.0, 2.5}) {
      CHECK(comp_sum(s, label, tau).value >= 0.0);
    }
  }

  // Vanishes only when the label score dominates all others.
  std::vector<double> dominated{30.0, 0.0, -1.0, 0.5};
  for (double tau : {0.0, 0.5, 1.0, 2.0}) {
    CHECK(comp_sum(dominated, 0, tau).value < 1e-6);
  }
}

TEST_CASE("comp_sum is continuous in tau at the log branch") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scores(rng, 2 + rng.uniform_int(8));
    const int label = rng.uniform_int(static_cast<int>(s.size()));
    const double at_one = comp_sum(s, label, 1.0).value;
    CHECK(std::abs(comp_sum(s, label, 1.0 + 1e-4).value - at_one) <= 1e-3);
    CHECK(std::abs(comp_sum(s, label, 1.0 - 1e-4).value - at_one) <= 1e-3);
  }
}

TEST_CASE("comp_sum gradients match finite differences") {
  Rng rng(7);
  for (double tau : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto scores = random_scores(rng, 2 + rng.uniform_int(8));
      const int label = rng.uniform_int(static_cast<int>(scores.size()));
      const auto grad = comp_sum(scores, label, tau).grad;
      const auto fd = test_util::finite_difference(
          [&](const std::vector<double>& s) {
            return comp_sum(s, label, tau).value;
          },
          scores);
      CHECK(test_util::relative_error(grad, fd) < 1e-4);
    }
  }
}

TEST_CASE("augmented surrogate is the weighted comp-sum mixture") {
  Rng rng(13);
  SUBCASE("zero weights give zero") {
    const auto s = random_scores(rng, 5);
    const std::vector<double> w(5, 0.0);
    const auto r = augmented_surrogate(s, w, 1.0);
    CHECK(r.value == 0.0);
    for (double g : r.grad) CHECK(g == 0.0);
  }
  SUBCASE("one-hot weight reduces to comp_sum") {
    for (double tau : {0.0, 1.0, 2.0}) {
      const auto s = random_scores(rng, 6);
      std::vector<double> w(6, 0.0);
      w[3] = 1.0;
      const auto r = augmented_surrogate(s, w, tau);
      const auto c = comp_sum(s, 3, tau);
      CHECK(r.value == doctest::Approx(c.value));
      for (int i = 0; i < 6; ++i) CHECK(r.grad[i] == doctest::Approx(c.grad[i]));
    }
  }
  SUBCASE("worked-example weights at uniform scores") {
    const auto d = mismatch_decompose(test_util::worked_example_table());
    const std::vector<double> s(9, 0.0);
    const auto r = augmented_surrogate(s, d.weights, 1.0);
    // Every comp-sum term is log 9 at uniform scores, so the value is
    // the weight mass 1.07 times log 9.
    CHECK(r.value == doctest::Approx(1.07 * std::log(9.0)));
  }
  SUBCASE("linearity against an explicit per-label loop") {
    for (double tau : {0.0, 0.5, 1.0, 2.0}) {
      const auto s = random_scores(rng, 7);
      std::vector<double> w(7);
      for (double& x : w) x = rng.uniform();
      const auto r = augmented_surrogate(s, w, tau);
      double expected = 0.0;
      std::vector<double> expected_grad(7, 0.0);
      for (int i = 0; i < 7; ++i) {
        const auto c = comp_sum(s, i, tau);
        expected += w[i] * c.value;
        for (int t = 0; t < 7; ++t) expected_grad[t] += w[i] * c.grad[t];
      }
      CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
      CHECK(test_util::relative_error(r.grad, expected_grad) < 1e-10);
    }
  }
  SUBCASE("negative weight is rejected") {
    const auto s = random_scores(rng, 3);
    const std::vector<double> w{0.5, -0.1, 0.2};
    CHECK_THROWS_AS(augmented_surrogate(s, w, 1.0), ValidationError);
  }
  SUBCASE("gradient matches finite differences") {
    for (double tau : {0.0, 0.5, 1.0, 2.0}) {
      const auto s = random_scores(rng, 6);
      std::vector<double> w(6);
      for (double& x : w) x = rng.uniform();
      const auto r = augmented_surrogate(s, w, tau);
      const auto fd = test_util::finite_difference(
          [&](const std::vector<double>& sc) {
            return augmented_surrogate(sc, w, tau).value;
          },
          s);
      CHECK(test_util::relative_error(r.grad, fd) < 1e-4);
    }
  }
}

TEST_CASE("separated surrogate values and gradients") {
  const CostTable ones(ActionSpace{2, 1}, {1.0, 1.0, 1.0, 1.0}, 1.0);
  const double log2 = std::log(2.0);
  CHECK(separated_surrogate(SeparatedScores{0, 0, 0}, ones).value ==
        doctest::Approx(4.0 * log2 * log2));

  // Router pushed to -inf keeps only the first expert's bracket.
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const CostTable table = test_util::random_table(rng, 2, 1);
    const double q1 = rng.uniform(-2.0, 2.0), q2 = rng.uniform(-2.0, 2.0);
    const double value =
        separated_surrogate(SeparatedScores{-30.0, q1, q2}, table).value;
    const double bracket = table.at(0, 0) * softplus(-q1) +
                           table.at(0, 1) * softplus(q1);
    CHECK(std::abs(value - bracket) < 1e-9);
  }

  for (int trial = 0; trial < 30; ++trial) {
    const CostTable table = test_util::random_table(rng, 2, 1);
    const SeparatedScores s{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                            rng.uniform(-3.0, 3.0)};
    const auto vg = separated_surrogate(s, table);
    const std::vector<double> analytic{vg.d_router, vg.d_query_1, vg.d_query_2};
    const auto fd = test_util::finite_difference(
        [&](const std::vector<double>& x) {
          return separated_surrogate(SeparatedScores{x[0], x[1], x[2]}, table)
              .value;
        },
        {s.router, s.query_1, s.query_2});
    CHECK(test_util::relative_error(analytic, fd) < 1e-4);
  }

  const CostTable wrong(ActionSpace{3, 1}, std::vector<double>(6, 0.5), 1.0);
  CHECK_THROWS_AS(separated_surrogate(SeparatedScores{0, 0, 0}, wrong),
                  ValidationError);
}

TEST_CASE("profiled summary closed form") {
  CHECK(profiled_summary(0.38, 1.08).value == doctest::Approx(0.8371).epsilon(1e-3));
  CHECK(profiled_summary(0.50, 0.51).value == doctest::Approx(0.7000).epsilon(1e-3));

  for (double c : {0.2, 0.5, 0.9}) {
    const ProfiledSummary s = profiled_summary(c, c);
    CHECK(s.value == doctest::Approx(2.0 * c * std::log(2.0)));
    CHECK(s.minimizer == doctest::Approx(0.0));
  }

  CHECK_THROWS_AS(profiled_summary(0.0, 0.5), ValidationError);
  CHECK_THROWS_AS(profiled_summary(0.5, -0.1), ValidationError);

  // Numeric minimizer cross-check, plus certificate of local minimality.
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const double u = 0.01 + rng.uniform();
    const double v = 0.01 + rng.uniform();
    const ProfiledSummary s = profiled_summary(u, v, /*cross_check=*/true);
    auto objective = [&](double t) { return u * softplus(-t) + v * softplus(t); };
    CHECK(s.value <= objective(s.minimizer + 0.1) + 1e-12);
    CHECK(s.value <= objective(s.minimizer - 0.1) + 1e-12);
    const double t_num = minimize_scalar(objective, -60.0, 60.0);
    CHECK(std::abs(objective(t_num) - s.value) < 1e-8);
  }
}

TEST_CASE("profiled summary is strictly increasing in the non-minimal entry") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const double u = 0.05 + 0.9 * rng.uniform();
    double v1 = 0.05 + 0.9 * rng.uniform();
    double v2 = 0.05 + 0.9 * rng.uniform();
    if (v1 == v2) continue;
    if (v1 > v2) std::swap(v1, v2);
    CHECK(profiled_summary(u, v1).value < profiled_summary(u, v2).value);
  }
}

TEST_CASE("router minimizer sign tracks the smaller summary") {
  CHECK(router_minimizer(0.5, 0.5) == doctest::Approx(0.0));
  CHECK(router_minimizer(0.8371, 0.7000) > 0.0);  // favors expert 2
  const double b = 0.37;
  CHECK(router_minimizer(std::exp(1.0) * b, b) == doctest::Approx(1.0));
  // Numeric cross-check of the closed form.
  auto objective = [](double a, double bb) {
    return [a, bb](double t) { return a * softplus(-t) + bb * softplus(t); };
  };
  const double t = minimize_scalar(objective(0.8371, 0.7000), -60.0, 60.0);
  CHECK(t == doctest::Approx(router_minimizer(0.8371, 0.7000)).epsilon(1e-6));
  CHECK_THROWS_AS(router_minimizer(0.0, 1.0), ValidationError);
}

TEST_CASE("fisher counterexample certifies the disagreement") {
  const FisherCertificate cert = fisher_counterexample(0.5, 0.01, 1.08);
  CHECK(cert.delta > 0.0);
  CHECK(cert.delta < 0.5);
  CHECK(cert.bayes.executed.expert == 0);
  CHECK(cert.surrogate_action.expert == 1);
  CHECK(cert.router_score > 0.0);
  CHECK(cert.summary_top > cert.summary_bottom);

  // Pinning delta = 0.12 reproduces the certified synthetic table exactly.
  const FisherCertificate pinned = fisher_counterexample(0.5, 0.01, 1.08, 0.12);
  CHECK(pinned.table.at(0, 0) == doctest::Approx(0.38));
  CHECK(pinned.table.at(0, 1) == doctest::Approx(1.08));
  CHECK(pinned.table.at(1, 0) == doctest::Approx(0.50));
  CHECK(pinned.table.at(1, 1) == doctest::Approx(0.51));
  CHECK(pinned.summary_top == doctest::Approx(0.8371).epsilon(1e-3));
  CHECK(pinned.summary_bottom == doctest::Approx(0.7000).epsilon(1e-3));
  CHECK(pinned.bayes.executed.expert == 0);
  CHECK(pinned.surrogate_action.expert == 1);

  CHECK_THROWS_AS(fisher_counterexample(0.5, 0.7, 1.08), ValidationError);
  CHECK_THROWS_AS(fisher_counterexample(0.0, 0.01, 1.08), ValidationError);
  CHECK_THROWS_AS(fisher_counterexample(1.2, 0.01, 1.08), ValidationError);
}

TEST_CASE("fisher counterexample holds on random feasible parameters") {
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const double C = 0.5 + 1.5 * rng.uniform();
    const double b = 0.05 + (C - 0.15) * rng.uniform();
    const double eps = 0.01 + (C - b - 0.02) * rng.uniform();
    const FisherCertificate cert = fisher_counterexample(b, eps, C);
    CHECK(cert.bayes.executed.expert == 0);
    CHECK(cert.surrogate_action.expert == 1);
    // Brute-force confirmation via the full numeric minimizer.
    const SeparatedScores s = minimize_separated(cert.table);
    CHECK((s.router >= 0.0 ? 1 : 0) == 1);
  }
}

TEST_CASE("transfer functions") {
  CHECK(transfer_gamma(0.5, 1.0, 4) == doctest::Approx(1.0));
  for (double tau : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    CHECK(transfer_gamma(0.0, tau, 4) == 0.0);
  }
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double u = 10.0 * rng.uniform();
    CHECK(transfer_gamma(u, 0.0, 6) ==
          doctest::Approx(std::sqrt(2.0 * u)));  // 2^0 * (2 - 0) = 2
    // Continuity across the log-loss boundary.
    CHECK(std::abs(transfer_gamma(u, 1.0 - 1e-9, 4) -
                   transfer_gamma(u, 1.0, 4)) < 1e-3);
    // Scaled transfer identity and its tau=1 simplification.
    const double m = 0.1 + 3.0 * rng.uniform();
    CHECK(transfer_gamma_tilde(u, 1.0, 4, m) ==
          doctest::Approx(std::sqrt(2.0 * u * m)));
    for (double tau : {0.0, 0.5, 1.0, 2.0}) {
      CHECK(transfer_gamma_tilde(u, tau, 4, m) ==
            doctest::Approx(m * transfer_gamma(u / m, tau, 4)));
    }
    CHECK(transfer_gamma_tilde(0.0, 1.0, 4, m) == 0.0);
    CHECK(transfer_gamma_tilde(u, 1.0, 4, 1.0) ==
          doctest::Approx(transfer_gamma(u, 1.0, 4)));
  }
  CHECK_THROWS_AS(transfer_gamma(-0.1, 1.0, 4), ValidationError);
  CHECK_THROWS_AS(transfer_gamma(0.5, -1.0, 4), ValidationError);
  CHECK_THROWS_AS(transfer_gamma_tilde(0.5, 1.0, 4, 0.0), ValidationError);
}
