#include "ccesim/replicator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccesim/error.hpp"
#include "ccesim/parallel.hpp"
#include "ccesim/rng.hpp"

namespace ccesim {

SimplexPoint::SimplexPoint(double x0, double xc, double xs) : x_{x0, xc, xs} {
  for (double v : x_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("point", "components must lie in [0, 1]");
  }
  if (std::abs(x0 + xc + xs - 1.0) > 1e-12) throw ConfigError("point", "components must sum to 1");
}

SimplexPoint SimplexPoint::projected(const Triple& x) {
  Triple y;
  double sum = 0.0;
  for (std::size_t i = 0; i < kStrategyCount; ++i) {
    y[i] = std::max(0.0, x[i]);
    sum += y[i];
  }
  if (!(sum > 0.0)) return SimplexPoint{};
  for (double& v : y) v /= sum;
  return SimplexPoint(y);
}

SimplexPoint SimplexPoint::vertex(StrategyId s) {
  Triple y{};
  y[index_of(s)] = 1.0;
  return SimplexPoint(y);
}

double l1_distance(const SimplexPoint& a, const SimplexPoint& b) noexcept {
  double d = 0.0;
  for (std::size_t i = 0; i < kStrategyCount; ++i) d += std::abs(a[i] - b[i]);
  return d;
}

Counts apportion(const SimplexPoint& x, std::size_t total) noexcept {
  Counts counts{};
  Triple remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < kStrategyCount; ++i) {
    const double quota = x[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, kStrategyCount> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % kStrategyCount) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

PayoffEstimate estimate_payoffs(const SimplexPoint& x, const PopulationConfig& config,
                                const PayoffSettings& settings, std::uint64_t seed) {
  const Counts counts = apportion(x, config.n);
  const double half_agent = 0.5 / static_cast<double>(config.n);
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    if (counts[s] == 0 && x[s] > half_agent)
      throw ConfigError("point", "composition cannot be represented with n agents");
  }
  PayoffEstimate est = estimate_payoffs(counts, config, settings, seed);
  est.point = x;
  return est;
}

PayoffEstimate estimate_payoffs(const Counts& counts, const PopulationConfig& config,
                                const PayoffSettings& settings, std::uint64_t seed) {
  if (settings.replicates < 1) throw ConfigError("replicator.replicates", "must be >= 1");
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n != config.n) throw ConfigError("point", "agent counts must sum to n");

  const StrategyTable params = derive_strategy_table(config.base, config.effects);
  PayoffEstimate est;
  est.counts = counts;
  est.replicates = settings.replicates;
  Triple freq{};
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    est.present[s] = counts[s] > 0;
    freq[s] = static_cast<double>(counts[s]) / static_cast<double>(n);
  }
  est.point = SimplexPoint::projected(freq);

  // Agents are laid out NoAI, Complement, Substitute in contiguous blocks.
  std::array<std::size_t, kStrategyCount + 1> offset{};
  for (std::size_t s = 0; s < kStrategyCount; ++s) offset[s + 1] = offset[s] + counts[s];

  std::vector<double> skill(n, 0.0);
  Rng rng(seed);
  auto learn = [&](Triple* block_sums) {
    const double model = *std::max_element(skill.begin(), skill.end());
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      double sum = 0.0;
      for (std::size_t i = offset[s]; i < offset[s + 1]; ++i) {
        skill[i] = sample_learning_outcome(model, params[s], rng);
        sum += skill[i];
      }
      if (block_sums) (*block_sums)[s] = sum;
    }
  };

  Triple sum{}, sum_sq{}, gap_sum{}, gap_sq{};
  constexpr std::array<std::array<std::size_t, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t r = 0; r < settings.replicates; ++r) {
    std::fill(skill.begin(), skill.end(), 0.0);
    for (std::size_t w = 0; w < settings.warmup_steps; ++w) learn(nullptr);
    Triple block{};
    learn(&block);
    Triple mean{};
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      if (!est.present[s]) continue;
      mean[s] = block[s] / static_cast<double>(counts[s]);
      sum[s] += mean[s];
      sum_sq[s] += mean[s] * mean[s];
    }
    for (std::size_t p = 0; p < kPairs.size(); ++p) {
      const double d = mean[kPairs[p][0]] - mean[kPairs[p][1]];
      gap_sum[p] += d;
      gap_sq[p] += d * d;
    }
  }

  const double reps = static_cast<double>(settings.replicates);
  auto standard_error = [&](double s1, double s2) {
    if (settings.replicates < 2) return 0.0;
    const double var = std::max(0.0, (s2 - s1 * s1 / reps) / (reps - 1.0));
    return std::sqrt(var / reps);
  };
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    if (!est.present[s]) continue;
    est.payoff[s] = sum[s] / reps;
    est.se[s] = standard_error(sum[s], sum_sq[s]);
  }
  for (std::size_t p = 0; p < kPairs.size(); ++p)
    est.gap_se[p] = standard_error(gap_sum[p], gap_sq[p]);
  return est;
}

FieldSample replicator_velocity(const SimplexPoint& x, const PayoffEstimate& payoffs) {
  FieldSample sample;
  sample.point = x;
  double weight = 0.0;
  double mean = 0.0;
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    if (!payoffs.present[s]) continue;
    weight += x[s];
    mean += x[s] * payoffs.payoff[s];
  }
  if (weight > 0.0) mean /= weight;
  double speed_sq = 0.0;
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    sample.velocity[s] = payoffs.present[s] ? x[s] * (payoffs.payoff[s] - mean) : 0.0;
    speed_sq += sample.velocity[s] * sample.velocity[s];
  }
  sample.speed = std::sqrt(speed_sq);

  constexpr std::array<std::array<std::size_t, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    const auto [a, b] = kPairs[p];
    if (!payoffs.present[a] || !payoffs.present[b] || x[a] == 0.0 || x[b] == 0.0) continue;
    if (std::abs(payoffs.payoff[a] - payoffs.payoff[b]) < 2.0 * payoffs.gap_se[p])
      sample.confidence = Confidence::Low;
  }
  return sample;
}

std::vector<SimplexPoint> simplex_grid(std::size_t resolution) {
  if (resolution < 2) throw ConfigError("replicator.grid", "must be >= 2");
  std::vector<SimplexPoint> grid;
  grid.reserve((resolution + 1) * (resolution + 2) / 2);
  const double g = static_cast<double>(resolution);
  for (std::size_t i = 0; i <= resolution; ++i) {
    for (std::size_t j = 0; i + j <= resolution; ++j) {
      const std::size_t k = resolution - i - j;
      grid.push_back(SimplexPoint::projected(
          {static_cast<double>(i) / g, static_cast<double>(j) / g, static_cast<double>(k) / g}));
    }
  }
  return grid;
}

FieldResult build_field(std::size_t resolution, const PopulationConfig& config,
                        const PayoffSettings& settings, std::uint64_t seed, std::size_t threads) {
  const std::vector<SimplexPoint> grid = simplex_grid(resolution);
  std::vector<std::optional<FieldSample>> slots(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    try {
      const PayoffEstimate est = estimate_payoffs(grid[i], config, settings, derive_seed(seed, i, 0));
      slots[i] = replicator_velocity(grid[i], est);
    } catch (const ConfigError& e) {
      if (e.field() != "point") throw;
    }
  });
  FieldResult result;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (slots[i])
      result.samples.push_back(*slots[i]);
    else
      result.skipped.push_back(grid[i]);
  }
  return result;
}

PayoffCache::PayoffCache(PopulationConfig config, PayoffSettings settings, std::size_t resolution,
                         std::uint64_t seed)
    : config_(std::move(config)), settings_(settings), resolution_(resolution), seed_(seed) {
  if (resolution_ < 1) throw ConfigError("replicator.grid", "must be >= 1");
}

PayoffEstimate PayoffCache::lookup(const SimplexPoint& x) {
  const Counts cell = apportion(x, resolution_);
  Counts counts = apportion(SimplexPoint::projected({static_cast<double>(cell[0]),
                                                     static_cast<double>(cell[1]),
                                                     static_cast<double>(cell[2])}),
                            config_.n);
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    if (x[s] > 0.0 && counts[s] == 0) {
      auto donor = std::max_element(counts.begin(), counts.end());
      --*donor;
      counts[s] = 1;
    }
  }
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(counts); it != entries_.end()) return it->second;
  }
  const std::uint64_t key_seed = derive_seed(seed_, counts[0] * (config_.n + 1) + counts[1], counts[2]);
  PayoffEstimate est = estimate_payoffs(counts, config_, settings_, key_seed);
  std::lock_guard lock(mutex_);
  return entries_.emplace(counts, std::move(est)).first->second;
}

std::size_t PayoffCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

namespace {

Triple velocity_at(const SimplexPoint& x, PayoffCache& payoffs) {
  return replicator_velocity(x, payoffs.lookup(x)).velocity;
}

SimplexPoint advance(const SimplexPoint& x, const Triple& k, double h) {
  Triple y;
  for (std::size_t s = 0; s < kStrategyCount; ++s) y[s] = x[s] + h * k[s];
  return SimplexPoint::projected(y);
}

}  // namespace

Trajectory integrate_trajectory(const SimplexPoint& start, PayoffCache& payoffs,
                                const TrajectorySettings& settings) {
  if (!(settings.dt > 0.0)) throw ConfigError("trajectory.dt", "must be > 0");
  if (!(settings.t_max >= 0.0)) throw ConfigError("trajectory.t_max", "must be >= 0");
  if (settings.record_every == 0) throw ConfigError("trajectory.record_every", "must be >= 1");
  Trajectory traj;
  SimplexPoint x = start;
  double t = 0.0;
  traj.points.push_back({t, x});
  const auto max_steps = static_cast<std::size_t>(std::ceil(settings.t_max / settings.dt - 1e-9));
  const double h = settings.dt;
  for (std::size_t step = 1; step <= max_steps; ++step) {
    const Triple k1 = velocity_at(x, payoffs);
    const double speed = std::sqrt(k1[0] * k1[0] + k1[1] * k1[1] + k1[2] * k1[2]);
    if (speed < settings.speed_tolerance) break;
    const Triple k2 = velocity_at(advance(x, k1, h / 2), payoffs);
    const Triple k3 = velocity_at(advance(x, k2, h / 2), payoffs);
    const Triple k4 = velocity_at(advance(x, k3, h), payoffs);
    Triple incr;
    for (std::size_t s = 0; s < kStrategyCount; ++s)
      incr[s] = (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]) / 6.0;
    x = advance(x, incr, h);
    t = static_cast<double>(step) * h;
    if (step % settings.record_every == 0 || step == max_steps) traj.points.push_back({t, x});
  }
  if (traj.points.back().t != t) traj.points.push_back({t, x});
  traj.attractor = classify_equilibrium(x);
  return traj;
}

std::optional<StrategyId> classify_equilibrium(const SimplexPoint& x, double tolerance) {
  for (StrategyId s : kAllStrategies) {
    if (l1_distance(x, SimplexPoint::vertex(s)) <= tolerance) return s;
  }
  return std::nullopt;
}

}  // namespace ccesim
