#include <doctest.h>

#include "defadv/core.hpp"
#include "test_util.hpp"

using namespace defadv;

TEST_CASE("flatten uses expert-major order") {
  const ActionSpace space{3, 2};
  CHECK(flatten(Action{0, 0}, space) == 0);
  CHECK(flatten(Action{2, 2}, space) == 8);  // last action, J(K+1)-1

  // Enumeration oracle: walk all 9 pairs and check the bijection.
  int expected = 0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k <= 2; ++k) {
      CHECK(flatten(Action{j, k}, space) == expected);
      CHECK(unflatten(expected, space) == Action{j, k});
      ++expected;
    }
  }
  CHECK(flatten(Action{1, 0}, space) == 3);
}

TEST_CASE("flatten round-trips over random spaces") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const ActionSpace space{1 + rng.uniform_int(8), rng.uniform_int(9)};
    for (int i = 0; i < space.num_actions(); ++i) {
      CHECK(flatten(unflatten(i, space), space) == i);
    }
  }
}

TEST_CASE("flatten rejects out-of-range actions") {
  const ActionSpace space{3, 2};
  CHECK_THROWS_AS(flatten(Action{3, 0}, space), std::out_of_range);
  CHECK_THROWS_AS(flatten(Action{0, 3}, space), std::out_of_range);
  CHECK_THROWS_AS(flatten(Action{-1, 0}, space), std::out_of_range);
  CHECK_THROWS_AS(unflatten(9, space), std::out_of_range);
  CHECK_THROWS_AS(unflatten(-1, space), std::out_of_range);
}

TEST_CASE("mask_advice reveals at most one slot") {
  const std::vector<std::string> advice{"a1", "a2"};

  const MaskedAdvice none = mask_advice(advice, 0);
  CHECK(none.present_count() == 0);

  const MaskedAdvice first = mask_advice(advice, 1);
  CHECK(first.present_count() == 1);
  CHECK(first.slots[0] == "a1");
  CHECK(!first.slots[1].has_value());

  const MaskedAdvice second = mask_advice(advice, 2);
  CHECK(second.present_count() == 1);
  CHECK(!second.slots[0].has_value());
  CHECK(second.slots[1] == "a2");

  CHECK_THROWS_AS(mask_advice(advice, 3), std::out_of_range);
  CHECK_THROWS_AS(mask_advice(advice, -1), std::out_of_range);

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 1 + rng.uniform_int(6);
    std::vector<std::string> full(K, "x");
    for (int k = 0; k <= K; ++k) {
      CHECK(mask_advice(full, k).present_count() <= 1);
    }
  }
}

TEST_CASE("true_loss picks exactly the executed entry") {
  const CostTable table = test_util::worked_example_table();
  CHECK(true_loss(Action{0, 0}, table) == doctest::Approx(0.35));

  // Perturbing every non-executed entry leaves the loss unchanged.
  Rng rng(11);
  std::vector<double> perturbed(table.entries().begin(), table.entries().end());
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    if (i != 0) perturbed[i] = rng.uniform();
  }
  const CostTable other(table.space(), perturbed, 1.0);
  CHECK(true_loss(Action{0, 0}, other) == true_loss(Action{0, 0}, table));

  // The argmin entry attains the table minimum.
  double best = table.at_flat(0);
  int best_idx = 0;
  for (int i = 1; i < table.num_actions(); ++i) {
    if (table.at_flat(i) < best) {
      best = table.at_flat(i);
      best_idx = i;
    }
  }
  CHECK(true_loss(unflatten(best_idx, table.space()), table) ==
        doctest::Approx(best));
}

TEST_CASE("K=0 restriction recovers the plain deferral loss") {
  Rng rng(5);
  const ActionSpace space{4, 0};
  std::vector<double> costs(4);
  for (double& c : costs) c = rng.uniform();
  const CostTable table(space, costs, 1.0);
  double min_pi = table.at_flat(0), min_experts = table.at(0, 0);
  for (int i = 1; i < 4; ++i) {
    min_pi = std::min(min_pi, table.at_flat(i));
    min_experts = std::min(min_experts, table.at(i, 0));
  }
  CHECK(min_pi == min_experts);
  for (int j = 0; j < 4; ++j) {
    CHECK(true_loss(Action{j, 0}, table) == costs[j]);
  }
}

TEST_CASE("assemble_cost_table adds task loss, expert fee and advice fee") {
  SUBCASE("all-zero components") {
    CostComponents c;
    c.task_loss = {{0.0, 0.0}, {0.0, 0.0}};
    c.expert_fees = {0.0, 0.0};
    c.advice_fees = {0.0, 0.0};
    c.cost_multiplier = 0.0;
    const CostTable t = assemble_cost_table(c);
    for (int i = 0; i < t.num_actions(); ++i) CHECK(t.at_flat(i) == 0.0);
  }

  SUBCASE("single entry arithmetic") {
    // Hand oracle: 0.30 + 0.05 + 2 * 0.02 = 0.39.
    CostComponents c;
    c.task_loss = {{0.1, 0.30}};
    c.expert_fees = {0.05};
    c.advice_fees = {0.0, 0.02};
    c.cost_multiplier = 2.0;
    const CostTable t = assemble_cost_table(c);
    CHECK(t.at(0, 1) == doctest::Approx(0.39));
    CHECK(t.at(0, 0) == doctest::Approx(0.15));
  }

  SUBCASE("indicator task loss with per-expert and per-advice fees") {
    CostComponents c;
    c.task_loss = {{1, 0, 1, 0, 1}, {0, 1, 0, 1, 0}, {1, 1, 0, 0, 1}};
    c.expert_fees = {0.03, 0.05, 0.04};
    c.advice_fees = {0.0, 0.015, 0.02, 0.03, 0.01};
    c.cost_multiplier = 1.0;
    const CostTable t = assemble_cost_table(c);
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k <= 4; ++k) {
        CHECK(t.at(j, k) == doctest::Approx(c.task_loss[j][k] +
                                            c.expert_fees[j] +
                                            c.advice_fees[k]));
      }
    }
    CHECK(t.bound() == doctest::Approx(1.0 + 0.05 + 0.03));
  }

  SUBCASE("validation") {
    CostComponents c;
    c.task_loss = {{0.0, 0.0}};
    c.expert_fees = {-0.1};
    c.advice_fees = {0.0, 0.1};
    CHECK_THROWS_AS(assemble_cost_table(c), ValidationError);
    c.expert_fees = {0.1};
    c.advice_fees = {0.5, 0.1};  // gamma_0 must stay 0
    CHECK_THROWS_AS(assemble_cost_table(c), ValidationError);
    c.advice_fees = {0.0, 0.1};
    c.task_loss = {{0.0, 1.5}};
    CHECK_THROWS_AS(assemble_cost_table(c), ValidationError);
  }
}

TEST_CASE("cost table validation") {
  CHECK_THROWS_AS(CostTable(ActionSpace{2, 1}, {0.1, 0.2, 0.3}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(CostTable(ActionSpace{2, 0}, {0.1, 1.5}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(CostTable(ActionSpace{2, 0}, {-0.1, 0.5}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(CostTable(ActionSpace{2, 0}, {0.1, 0.5}, 0.0),
                  ValidationError);
}

TEST_CASE("dataset shape validation") {
  Dataset data;
  data.space = ActionSpace{2, 1};
  data.num_instances = 2;
  data.feature_dim = 3;
  data.features.assign(6, 0.0);
  data.costs.assign(8, 0.5);
  data.validate();

  data.features.pop_back();
  CHECK_THROWS_AS(data.validate(), ValidationError);
  data.features.push_back(0.0);
  data.region_tags = {0};
  CHECK_THROWS_AS(data.validate(), ValidationError);
}
