#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "ccesim/error.hpp"
#include "ccesim/experiments.hpp"
#include "ccesim/rng.hpp"

using namespace ccesim;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig e;
  e.base.n = 200;
  e.base.steps = 60;
  e.base.effects = {0.2, 0.05, 0.5, 0.5};
  e.base.adopters = {{0, StrategyId::Complement, 0.1}};
  e.repetitions = 5;
  e.master_seed = 11;
  return e;
}

}  // namespace

TEST_CASE("sweep values are applied by path") {
  PopulationConfig c;
  c.adopters = {{0, StrategyId::Complement, 0.1}};
  apply_sweep_value(c, "in_group_rate", 0.85);
  apply_sweep_value(c, "groups", 3.0);
  apply_sweep_value(c, "effects.r_beta_s", 0.4);
  apply_sweep_value(c, "adopters[0].strategy", std::string("substitute"));
  apply_sweep_value(c, "adopters[0].fraction", 0.2);
  CHECK(c.in_group_rate == 0.85);
  CHECK(c.groups == 3);
  CHECK(c.effects.r_beta_s == 0.4);
  CHECK(c.adopters[0].strategy == StrategyId::Substitute);
  CHECK(c.adopters[0].fraction == 0.2);

  CHECK_THROWS_AS(apply_sweep_value(c, "gamma", 1.0), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(c, "groups", 2.5), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(c, "alpha", std::string("x")), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(c, "adopters[3].fraction", 0.1), ConfigError);
  CHECK_THROWS_AS(apply_sweep_value(c, "adopters[0].strategy", std::string("both")), ConfigError);
}

TEST_CASE("cyclic adopter layout") {
  const auto three = cyclic_adopters(3, 0.1);
  REQUIRE(three.size() == 2);
  CHECK(three[0].group == 1);
  CHECK(three[0].strategy == StrategyId::Complement);
  CHECK(three[1].group == 2);
  CHECK(three[1].strategy == StrategyId::Substitute);
  const auto ten = cyclic_adopters(10, 0.1);
  CHECK(ten.size() == 6);
  CHECK(cyclic_adopters(1, 0.1).size() == 2);
}

TEST_CASE("sweep enumeration") {
  ExperimentConfig e = small_experiment();
  e.axes = {{"groups", {1.0, 3.0, 10.0}}, {"in_group_rate", {0.5, 0.9}}};
  CHECK(sweep_size(e) == 6);
  const auto c = sweep_coords(e, 3);
  CHECK(std::get<double>(c[0]) == 3.0);
  CHECK(std::get<double>(c[1]) == 0.9);
  const PopulationConfig p = point_config(e, 5, 2);
  CHECK(p.groups == 10);
  CHECK(p.in_group_rate == 0.9);
  CHECK(p.seed == derive_seed(11, 5, 2));

  e.budget = 30;
  CHECK_THROWS_AS(validate(e), ConfigError);
  e.budget = 31;
  CHECK_NOTHROW(validate(e));
  e.repetitions = 0;
  CHECK_THROWS_AS(validate(e), ConfigError);
}

TEST_CASE("single repetition aggregates to the run itself") {
  ExperimentConfig e = small_experiment();
  e.repetitions = 1;
  const auto records = run_experiment(e);
  REQUIRE(records.size() == 1);
  const auto single = run(point_config(e, 0, 0));
  REQUIRE(records[0].median_of_medians.size() == single.size());
  for (std::size_t t = 0; t < single.size(); ++t) {
    CHECK(records[0].median_of_medians[t] == single[t].population().median_skill);
    CHECK(records[0].median_se[t] == 0.0);
    CHECK(records[0].mean_shares[t] == single[t].population().shares);
  }
}

TEST_CASE("record count matches the sweep and results ignore thread count") {
  ExperimentConfig e = small_experiment();
  e.axes = {{"adopters[0].strategy", {std::string("complement"), std::string("substitute")}},
            {"delta", {5.0, 10.0}}};
  const auto one = run_experiment(e, 1);
  const auto many = run_experiment(e, 4);
  REQUIRE(one.size() == 4);
  REQUIRE(many.size() == 4);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].median_of_medians == many[i].median_of_medians);
    CHECK(one[i].median_se == many[i].median_se);
    CHECK(one[i].mean_shares == many[i].mean_shares);
    CHECK(one[i].dominance_counts == many[i].dominance_counts);
    CHECK(one[i].sweep_index == i);
  }
}

TEST_CASE("aggregation is order independent and matches a direct computation") {
  ExperimentConfig e = small_experiment();
  e.repetitions = 7;
  std::vector<RunSummary> runs;
  for (std::size_t r = 0; r < e.repetitions; ++r) runs.push_back(summarize_run(run(point_config(e, 0, r))));
  const auto agg = aggregate(0, {}, runs);

  std::mt19937_64 gen(1);
  auto shuffled = runs;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  const auto again = aggregate(0, {}, shuffled);
  CHECK(agg.median_of_medians == again.median_of_medians);
  CHECK(agg.median_se == again.median_se);
  CHECK(agg.mean_shares == again.mean_shares);
  CHECK(agg.dominance_counts == again.dominance_counts);

  const std::size_t t = 40;
  std::vector<double> col;
  for (const auto& r : runs) col.push_back(r.median[t]);
  std::sort(col.begin(), col.end());
  CHECK(agg.median_of_medians[t] == col[3]);
  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= 7.0;
  double ss = 0.0;
  for (double v : col) ss += (v - mean) * (v - mean);
  CHECK(agg.median_se[t] == doctest::Approx(std::sqrt(ss / 6.0) / std::sqrt(7.0)).epsilon(1e-12));

  std::size_t total = 0;
  for (std::size_t c : agg.dominance_counts) total += c;
  CHECK(total == 7);
}

TEST_CASE("dominance labels") {
  CHECK(dominant_strategy({0.2, 0.51, 0.29}) == StrategyId::Complement);
  CHECK_FALSE(dominant_strategy({0.5, 0.5, 0.0}).has_value());
  CHECK_FALSE(dominant_strategy({0.34, 0.33, 0.33}).has_value());
}

TEST_CASE("crossover detection") {
  std::vector<double> a(30, 0.0), b(30, 1.0);
  CHECK_FALSE(crossover_generation(a, b).has_value());
  for (std::size_t t = 5; t < 30; ++t) a[t] = 2.0;
  CHECK(crossover_generation(a, b) == 5);
  // A brief excursion shorter than the window is ignored.
  a[3] = 2.0;
  CHECK(crossover_generation(a, b) == 5);
  a[10] = 0.0;
  CHECK(crossover_generation(a, b) == 11);
  // Equal values do not count as exceeding.
  std::vector<double> c(30, 1.0);
  CHECK_FALSE(crossover_generation(c, b).has_value());
  std::vector<double> shortly(12, 2.0);
  CHECK(crossover_generation(shortly, b) == 0);
  CHECK_FALSE(crossover_generation(std::vector<double>(9, 2.0), b).has_value());
}

TEST_CASE("complement arm ends ahead of the substitute arm") {
  ExperimentConfig e = small_experiment();
  e.base.n = 1000;
  e.base.steps = 200;
  e.repetitions = 10;
  e.axes = {{"adopters[0].strategy", {std::string("complement"), std::string("substitute")}}};
  const auto r = run_experiment(e);
  CHECK(r[0].median_of_medians.back() > r[1].median_of_medians.back());
  CHECK(r[0].dominant == StrategyId::Complement);
  CHECK(r[1].dominant == StrategyId::Substitute);
}

TEST_CASE("threshold sweep requires the standard rates") {
  ExperimentConfig e = small_experiment();
  CHECK_THROWS_AS(dominance_threshold(e, {0.5, 0.9}), ConfigError);
}

TEST_CASE("neutral effects give no threshold") {
  ExperimentConfig e;
  e.base.n = 150;
  e.base.steps = 100;
  e.base.groups = 3;
  e.base.effects = {};
  e.base.allow_unordered_effects = true;
  e.layout = AdopterLayout::Cyclic;
  e.repetitions = 8;
  const auto result = dominance_threshold(e, {kDefaultInGroupRates.begin(), kDefaultInGroupRates.end()});
  REQUIRE(result.rows.size() == 7);
  CHECK_FALSE(result.threshold.has_value());
  for (const auto& row : result.rows) {
    double total = 0.0;
    for (double f : row.dominance_fraction) total += f;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("heatmap grid validation") {
  const std::vector<double> five{0.0, 0.2, 0.4, 0.6, 0.8};
  CHECK(heatmap_grid(five, five).size() == 25);
  CHECK_THROWS_AS(heatmap_grid({0.0, 0.5}, five), ConfigError);
  CHECK_THROWS_AS(heatmap_grid(five, {0.0, 0.2, 0.4, 0.6, 1.0}), ConfigError);
  const auto cells = heatmap_uniform_cells(50, 3);
  CHECK(cells.size() == 50);
  for (auto [a, b] : cells) {
    CHECK(a >= 0.0);
    CHECK(b < 1.0);
  }
  CHECK(heatmap_uniform_cells(50, 3) == cells);
}

TEST_CASE("heatmap identity cell and growth sign") {
  PopulationConfig base;
  base.steps = 100;
  base.seed = 5;
  const std::vector<double> d_beta{0.0, 0.2, 0.4, 0.6, 0.8, 0.9};
  std::vector<std::pair<double, double>> cells;
  for (double b : d_beta) cells.emplace_back(0.0, b);
  const auto out = skill_heatmap(base, cells);
  REQUIRE(out.size() == cells.size());

  PopulationConfig baseline = base;
  baseline.allow_unordered_effects = true;
  baseline.effects = {};
  double final_median = 0.0;
  run(baseline, [&](const StepRecord& r) { final_median = r.population().median_skill; });
  CHECK(out[0].final_median_skill == final_median);

  // beta (1 - d_beta)(gamma + ln N) < alpha once d_beta exceeds about 0.733.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (d_beta[i] < 0.7) CHECK(out[i].final_median_skill > 0.0);
    else CHECK(out[i].final_median_skill < 0.0);
    if (i > 0) CHECK(out[i].final_median_skill < out[i - 1].final_median_skill);
  }
  CHECK_THROWS_AS(skill_heatmap(base, cells, 1, 6), ConfigError);
}
