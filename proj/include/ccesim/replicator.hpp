#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "ccesim/model.hpp"
#include "ccesim/population.hpp"

namespace ccesim {

using Triple = std::array<double, kStrategyCount>;
using Counts = std::array<std::size_t, kStrategyCount>;

/// Strategy frequencies (NoAI, Complement, Substitute) on the 2-simplex.
class SimplexPoint {
public:
  SimplexPoint() : x_{1.0, 0.0, 0.0} {}

  /// Throws ConfigError("point", ...) unless every component is in [0, 1]
  /// and the sum is 1 within 1e-12.
  SimplexPoint(double x0, double xc, double xs);

  /// Clips negative components to zero and rescales to sum 1.
  static SimplexPoint projected(const Triple& x);
  static SimplexPoint vertex(StrategyId s);

  double operator[](std::size_t i) const { return x_[i]; }
  double operator[](StrategyId s) const { return x_[index_of(s)]; }
  const Triple& values() const noexcept { return x_; }

  bool operator==(const SimplexPoint&) const = default;

private:
  explicit SimplexPoint(const Triple& x) : x_(x) {}
  Triple x_;
};

double l1_distance(const SimplexPoint& a, const SimplexPoint& b) noexcept;

/// Largest-remainder apportionment of `total` units by frequency. Ties go
/// to the lower strategy index.
Counts apportion(const SimplexPoint& x, std::size_t total) noexcept;

struct PayoffEstimate {
  SimplexPoint point;
  Counts counts{};
  /// Strategies with zero agents have no payoff; their entries are unused.
  std::array<bool, kStrategyCount> present{};
  Triple payoff{};
  Triple se{};
  /// Paired standard errors of payoff differences, indexed (0,C), (0,S), (C,S).
  Triple gap_se{};
  std::size_t replicates = 0;

  std::optional<double> get(StrategyId s) const {
    if (!present[index_of(s)]) return std::nullopt;
    return payoff[index_of(s)];
  }
};

struct PayoffSettings {
  std::size_t replicates = 1000;
  /// Learning-only steps run before measuring so that skills differentiate.
  std::size_t warmup_steps = 0;
};

/// Monte Carlo estimate of the mean post-learning skill of each strategy in
/// a well-mixed population of config.n agents with composition x.
PayoffEstimate estimate_payoffs(const SimplexPoint& x, const PopulationConfig& config,
                                const PayoffSettings& settings, std::uint64_t seed);

/// Same, for an explicit agent composition. counts must sum to config.n.
PayoffEstimate estimate_payoffs(const Counts& counts, const PopulationConfig& config,
                                const PayoffSettings& settings, std::uint64_t seed);

enum class Confidence { Ok, Low };

struct FieldSample {
  SimplexPoint point;
  Triple velocity{};
  double speed = 0.0;
  Confidence confidence = Confidence::Ok;
};

/// x_s (pi_s - pi_bar) for present strategies; absent strategies get 0.
FieldSample replicator_velocity(const SimplexPoint& x, const PayoffEstimate& payoffs);

/// Barycentric grid {(i, j, k) / g : i + j + k = g}, ordered by i then j.
std::vector<SimplexPoint> simplex_grid(std::size_t resolution);

struct FieldResult {
  std::vector<FieldSample> samples;
  /// Grid points whose composition cannot be represented with n agents.
  std::vector<SimplexPoint> skipped;
};

FieldResult build_field(std::size_t resolution, const PopulationConfig& config,
                        const PayoffSettings& settings, std::uint64_t seed,
                        std::size_t threads = 1);

/// Thread-safe memo of payoff estimates keyed by the composition snapped to
/// a grid of the given resolution. Strategies present at the query point but
/// snapped away are kept at one agent so their payoff stays defined. Each
/// entry is seeded from its key, so results do not depend on query order.
class PayoffCache {
public:
  PayoffCache(PopulationConfig config, PayoffSettings settings, std::size_t resolution,
              std::uint64_t seed);

  PayoffEstimate lookup(const SimplexPoint& x);
  std::size_t size() const;

private:
  PopulationConfig config_;
  PayoffSettings settings_;
  std::size_t resolution_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  std::map<Counts, PayoffEstimate> entries_;
};

struct TrajectorySettings {
  double dt = 0.01;
  double t_max = 100.0;
  double speed_tolerance = 1e-6;
  /// Emit every k-th integration step (the start and end are always kept).
  std::size_t record_every = 10;
};

struct TrajectoryPoint {
  double t = 0.0;
  SimplexPoint x;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  /// Vertex within L1 distance 0.05 of the terminal point, if any.
  std::optional<StrategyId> attractor;
};

/// Fixed-step RK4 on the replicator ODE with Monte Carlo payoffs.
Trajectory integrate_trajectory(const SimplexPoint& start, PayoffCache& payoffs,
                                const TrajectorySettings& settings);

std::optional<StrategyId> classify_equilibrium(const SimplexPoint& x, double tolerance = 0.05);

}  // namespace ccesim
