// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here; the exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ccesim/config.hpp"
#include "ccesim/experiments.hpp"
#include "ccesim/output.hpp"
#include "ccesim/parallel.hpp"
#include "ccesim/replicator.hpp"
#include "ccesim/rng.hpp"

using namespace ccesim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome gumbel_moments() {
  constexpr std::size_t kDraws = 1'000'000;
  constexpr double kMeanTol = 0.01;
  constexpr double kVarRelTol = 0.05;
  constexpr double kMaxSeconds = 5.0;

  const auto start = std::chrono::steady_clock::now();
  const StrategyParams p{StrategyId::NoAI, 1.0, 0.5};
  Rng rng(20240601);
  std::vector<double> xs(kDraws);
  for (double& x : xs) x = sample_learning_outcome(0.0, p, rng);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= kDraws;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= kDraws - 1;
  const double secs = seconds_since(start);

  const double mean_ref = -1.0 + 0.5 * std::numbers::egamma;
  const double var_ref = 0.25 * std::numbers::pi * std::numbers::pi / 6.0;
  const bool ok = std::abs(mean - mean_ref) <= kMeanTol && std::abs(var / var_ref - 1.0) <= kVarRelTol &&
                  secs < kMaxSeconds;
  return {ok, fmt("mean %.5f (ref %.5f), var %.5f (ref %.5f), %.2fs", mean, mean_ref, var, var_ref, secs)};
}

Outcome logistic_rule() {
  constexpr int kPairs = 10'000;
  constexpr double kTol = 1e-12;
  constexpr double kMaxSeconds = 1.0;

  const auto start = std::chrono::steady_clock::now();
  Rng rng(7);
  double worst = 0.0;
  bool midpoint = true;
  for (int i = 0; i < kPairs; ++i) {
    const double a = (rng.uniform() - 0.5) * 40.0;
    const double b = (rng.uniform() - 0.5) * 40.0;
    const double delta = 0.01 + rng.uniform() * 50.0;
    worst = std::max(worst, std::abs(adoption_probability(a, b, delta) + adoption_probability(b, a, delta) - 1.0));
    midpoint = midpoint && adoption_probability(a, a, delta) == 0.5;
  }
  const double secs = seconds_since(start);
  return {worst <= kTol && midpoint && secs < kMaxSeconds,
          fmt("max |p(a,b)+p(b,a)-1| = %.3g, midpoint exact: %s, %.3fs", worst, midpoint ? "yes" : "no", secs)};
}

Outcome growth_rate() {
  constexpr double kRelTol = 0.10;
  constexpr double kMaxSeconds = 30.0;

  const auto start = std::chrono::steady_clock::now();
  PopulationConfig c;
  c.n = 1000;
  c.steps = 1000;
  std::vector<double> x, y;
  run(c, [&](const StepRecord& r) {
    if (r.step >= 100) {
      x.push_back(static_cast<double>(r.step));
      y.push_back(r.population().max_skill);
    }
  });
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  const double oracle = 0.5 * (std::numbers::egamma + std::log(1000.0)) - 1.0;
  const double secs = seconds_since(start);
  return {std::abs(slope / oracle - 1.0) <= kRelTol && secs < kMaxSeconds,
          fmt("slope %.4f vs oracle %.4f, %.2fs", slope, oracle, secs)};
}

Outcome fig4_crossover(std::size_t threads) {
  constexpr std::size_t kLow = 8;
  constexpr std::size_t kHigh = 40;

  const ConfigDocument doc = preset_document("fig4");
  const auto records = run_experiment(doc.experiment, threads);
  const auto& c = records[0].median_of_medians;
  const auto& s = records[1].median_of_medians;
  const auto g = crossover_generation(c, s);
  bool stays = g.has_value();
  if (g) {
    for (std::size_t t = *g; t < c.size(); ++t) stays = stays && c[t] > s[t];
  }
  const bool ok = g && *g >= kLow && *g <= kHigh && stays;
  return {ok, fmt("crossover generation %s (window [%zu, %zu]), complement stays above through step %zu: %s",
                  g ? std::to_string(*g).c_str() : "none", kLow, kHigh, c.size() - 1, stays ? "yes" : "no")};
}

Outcome fig5_attractor(std::size_t threads) {
  constexpr double kL1Tol = 0.05;
  constexpr double kTangencyTol = 1e-9;

  const ConfigDocument doc = preset_document("fig5");
  const auto& r = doc.replicator;
  const bool setup = r.grid == 15 && r.payoff.replicates == 1000 && r.payoff.warmup_steps == 5 && r.starts.size() == 10;

  const FieldResult field = build_field(r.grid, doc.experiment.base, r.payoff, doc.experiment.master_seed, threads);
  double worst_sum = 0.0;
  bool vertices_fixed = true;
  std::size_t vertices = 0;
  for (const FieldSample& f : field.samples) {
    worst_sum = std::max(worst_sum, std::abs(f.velocity[0] + f.velocity[1] + f.velocity[2]));
    if (f.point[0] == 1.0 || f.point[1] == 1.0 || f.point[2] == 1.0) {
      ++vertices;
      vertices_fixed = vertices_fixed && f.speed == 0.0;
    }
  }

  PayoffCache cache(doc.experiment.base, r.payoff, r.grid, doc.experiment.master_seed);
  std::vector<Trajectory> trajectories(r.starts.size());
  parallel_for(r.starts.size(), threads,
               [&](std::size_t i) { trajectories[i] = integrate_trajectory(r.starts[i], cache, r.trajectory); });
  double worst_l1 = 0.0;
  for (const Trajectory& t : trajectories) {
    worst_l1 = std::max(worst_l1, l1_distance(t.points.back().x, SimplexPoint::vertex(StrategyId::Substitute)));
  }
  const bool ok = setup && field.samples.size() == 136 && vertices == 3 && vertices_fixed &&
                  worst_sum <= kTangencyTol && worst_l1 <= kL1Tol;
  return {ok, fmt("%zu trajectories, max L1 to Substitute %.3g; %zu field points, vertices fixed: %s, "
                  "max |sum v| %.3g",
                  trajectories.size(), worst_l1, field.samples.size(), vertices_fixed ? "yes" : "no", worst_sum)};
}

Outcome fig6_dichotomy(std::size_t threads) {
  constexpr std::size_t kRequired = 70;

  const ConfigDocument doc = preset_document("fig6");
  const auto records = run_experiment(doc.experiment, threads);
  const std::size_t structured = records[0].dominance_counts[index_of(StrategyId::Complement)];
  const std::size_t mixed = records[1].dominance_counts[index_of(StrategyId::Substitute)];
  const auto& mc = records[1].dominance_counts;
  const bool ok = records[0].repetitions == 100 && structured >= kRequired && mixed >= kRequired;
  return {ok, fmt("structured G=0.85: %zu/100 Complement-dominant; mixed G=0: %zu/100 Substitute-dominant "
                  "(noai %zu, complement %zu, none %zu); need >= %zu each",
                  structured, mixed, mc[0], mc[1], mc[3], kRequired)};
}

Outcome fig7c_threshold(std::size_t threads) {
  const ConfigDocument doc = preset_document("fig7c");
  const ThresholdResult result = dominance_threshold(doc.experiment, doc.threshold_rates, threads);
  std::string rows;
  for (const ThresholdRow& row : result.rows)
    rows += fmt(" G=%.2f:%.2f", row.in_group_rate, row.dominance_fraction[index_of(StrategyId::Complement)]);
  const bool ok = result.threshold && (*result.threshold == 0.9 || *result.threshold == 0.99);
  return {ok, fmt("threshold %s, expected 0.9 or 0.99; Complement-dominant fraction per G:%s",
                  result.threshold ? fmt("%.2f", *result.threshold).c_str() : "none", rows.c_str())};
}

Outcome supp2_generalization(std::size_t threads) {
  ConfigDocument doc = preset_document("supp2");
  doc.experiment.axes = {{"in_group_rate", {0.85}}};
  const auto records = run_experiment(doc.experiment, threads);
  const std::size_t wins = records[0].dominance_counts[index_of(StrategyId::Complement)];
  const std::size_t reps = records[0].repetitions;
  return {reps == 50 && 2 * wins > reps,
          fmt("m=%zu structured: %zu/%zu Complement-dominant", doc.experiment.base.groups, wins, reps)};
}

Outcome determinism() {
  // Every output path, rendered to CSV bytes, at 1 and 4 threads, twice.
  auto render_all = [](std::size_t threads) {
    std::string out;
    ConfigDocument doc = preset_document("fig6");
    doc.experiment.base.n = 150;
    doc.experiment.base.steps = 40;
    doc.experiment.repetitions = 4;
    doc.experiment.master_seed = 42;
    const auto run_records = run(single_run_config(doc));
    out += step_records_table(run_records).render();
    for (std::size_t g = 0; g < 3; ++g) out += strip_table(run_records, g).render();

    const auto agg = run_experiment(doc.experiment, threads);
    out += aggregates_table(doc.experiment, agg).render();
    out += dominance_table(doc.experiment, agg).render();
    out += threshold_table(dominance_threshold(doc.experiment, doc.threshold_rates, threads)).render();

    PopulationConfig base = doc.experiment.base;
    out += heatmap_table(skill_heatmap(base, heatmap_grid({0, 0.2, 0.4, 0.6, 0.8}, {0, 0.2, 0.4, 0.6, 0.8}), threads))
               .render();

    ConfigDocument rep = preset_document("fig5");
    rep.experiment.base.n = 100;
    rep.replicator.grid = 5;
    rep.replicator.payoff = {30, 3};
    rep.replicator.trajectory.t_max = 5.0;
    out += field_samples_table(build_field(rep.replicator.grid, rep.experiment.base, rep.replicator.payoff, 42,
                                           threads))
               .render();
    PayoffCache cache(rep.experiment.base, rep.replicator.payoff, rep.replicator.grid, 42);
    std::vector<Trajectory> traj(rep.replicator.starts.size());
    parallel_for(traj.size(), threads, [&](std::size_t i) {
      traj[i] = integrate_trajectory(rep.replicator.starts[i], cache, rep.replicator.trajectory);
    });
    out += trajectories_table(traj).render();
    out += equilibria_table(traj).render();
    return out;
  };
  const std::string a = render_all(1);
  const std::string b = render_all(4);
  const std::string c = render_all(1);
  return {a == b && a == c, fmt("%zu bytes of CSV, 1 vs 4 threads identical: %s, rerun identical: %s", a.size(),
                                a == b ? "yes" : "no", a == c ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::size_t threads = resolve_threads(0);
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"gumbel-moments", gumbel_moments},
      {"logistic-rule", logistic_rule},
      {"growth-rate-oracle", growth_rate},
      {"fig4-crossover", [&] { return fig4_crossover(threads); }},
      {"fig5-attractor", [&] { return fig5_attractor(threads); }},
      {"fig6-dichotomy", [&] { return fig6_dichotomy(threads); }},
      {"fig7c-threshold", [&] { return fig7c_threshold(threads); }},
      {"supp2-generalization", [&] { return supp2_generalization(threads); }},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %-22s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  return failures == 0 ? 0 : 1;
}
