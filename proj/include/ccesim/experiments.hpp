#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ccesim/model.hpp"
#include "ccesim/population.hpp"

namespace ccesim {

using SweepValue = std::variant<double, std::string>;

std::string to_string(const SweepValue& v);

/// One swept parameter. Paths name PopulationConfig fields: n, groups,
/// alpha, beta, delta, steps, in_group_rate, r_alpha_c, r_beta_c, r_alpha_s,
/// r_beta_s, seed, or adopters[i].{group,strategy,fraction}.
struct SweepAxis {
  std::string path;
  std::vector<SweepValue> values;

  bool operator==(const SweepAxis&) const = default;
};

/// Throws ConfigError when the path is unknown or the value has the wrong type.
void apply_sweep_value(PopulationConfig& config, const std::string& path, const SweepValue& value);

/// How initial adopters are placed once sweep values are applied.
enum class AdopterLayout {
  /// Use PopulationConfig::adopters as given.
  Explicit,
  /// Group g seeds Complement when g % 3 == 1 and Substitute when g % 3 == 2;
  /// a single group seeds both.
  Cyclic,
};

std::vector<AdopterSeed> cyclic_adopters(std::size_t groups, double fraction);

enum class OutputKind { MedianSkill, Adoption, Strips, Dominance, Crossover };

std::string_view to_string(OutputKind k) noexcept;
std::optional<OutputKind> parse_output_kind(std::string_view name) noexcept;

struct ExperimentConfig {
  std::string name = "experiment";
  PopulationConfig base{};
  std::vector<SweepAxis> axes{};
  std::size_t repetitions = 1;
  std::uint64_t master_seed = 1;
  /// Sweep points times repetitions must stay below this.
  std::size_t budget = 1'000'000;
  std::vector<OutputKind> outputs{OutputKind::MedianSkill, OutputKind::Adoption,
                                  OutputKind::Dominance};
  AdopterLayout layout = AdopterLayout::Explicit;
  double layout_fraction = 0.1;
  /// Sweep-point indices (a, b) compared for the crossover generation.
  std::pair<std::size_t, std::size_t> crossover_arms{0, 1};

  bool operator==(const ExperimentConfig&) const = default;
};

std::size_t sweep_size(const ExperimentConfig& config);

/// Coordinates of the sweep point with the given flat index (first axis
/// varies slowest).
std::vector<SweepValue> sweep_coords(const ExperimentConfig& config, std::size_t index);

/// Population config of one sweep point, seeded for repetition `rep`.
PopulationConfig point_config(const ExperimentConfig& config, std::size_t index, std::size_t rep);

/// Validates axes, the budget and every sweep point. Throws ConfigError.
void validate(const ExperimentConfig& config);

/// Index into AggregateRecord::dominance_counts; `none` is the last slot.
inline constexpr std::size_t kNoDominant = kStrategyCount;

/// Strategy holding more than half of the given shares, if any.
std::optional<StrategyId> dominant_strategy(const std::array<double, kStrategyCount>& shares);

struct AggregateRecord {
  std::size_t sweep_index = 0;
  std::vector<SweepValue> coords;
  std::size_t repetitions = 0;
  /// Per step, across repetitions: median of the runs' median skills and
  /// the standard error of those medians (sd / sqrt(R)).
  std::vector<double> median_of_medians;
  std::vector<double> median_se;
  /// Per step, mean population strategy shares across repetitions.
  std::vector<std::array<double, kStrategyCount>> mean_shares;
  /// Final-step dominance label counts: NoAI, Complement, Substitute, none.
  std::array<std::size_t, kStrategyCount + 1> dominance_counts{};
  /// Label of the final mean shares.
  std::optional<StrategyId> dominant;

  double dominance_fraction(std::size_t slot) const {
    return repetitions ? static_cast<double>(dominance_counts[slot]) / static_cast<double>(repetitions)
                       : 0.0;
  }
};

/// Per-run series kept for aggregation.
struct RunSummary {
  std::vector<double> median;
  std::vector<std::array<double, kStrategyCount>> shares;
};

RunSummary summarize_run(const std::vector<StepRecord>& records);

/// Reduces repetitions of one sweep point. Input order does not matter.
AggregateRecord aggregate(std::size_t sweep_index, std::vector<SweepValue> coords,
                          const std::vector<RunSummary>& runs);

std::vector<AggregateRecord> run_experiment(const ExperimentConfig& config, std::size_t threads = 1);

/// First generation g at which `a` exceeds `b` and stays above for `window`
/// consecutive generations (g included).
std::optional<std::size_t> crossover_generation(const std::vector<double>& a,
                                                const std::vector<double>& b,
                                                std::size_t window = 10);

inline constexpr std::array<double, 7> kDefaultInGroupRates{0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99};

struct ThresholdRow {
  double in_group_rate = 0.0;
  std::array<double, kStrategyCount + 1> dominance_fraction{};
};

struct ThresholdResult {
  std::vector<ThresholdRow> rows;
  /// Smallest rate whose Complement-dominant fraction exceeds 0.5.
  std::optional<double> threshold;
};

/// Runs `config` (its own axes are replaced) over the given in-group rates.
/// The rates must include kDefaultInGroupRates.
ThresholdResult dominance_threshold(const ExperimentConfig& config, std::vector<double> rates,
                                    std::size_t threads = 1);

struct HeatmapCell {
  double d_alpha = 0.0;
  double d_beta = 0.0;
  double final_median_skill = 0.0;
};

/// Cartesian grid of (d_alpha, d_beta); both axes need >= 5 values in [0, 1).
std::vector<std::pair<double, double>> heatmap_grid(const std::vector<double>& d_alpha,
                                                    const std::vector<double>& d_beta);

/// `count` cells drawn uniformly from [0, 1)^2.
std::vector<std::pair<double, double>> heatmap_uniform_cells(std::size_t count, std::uint64_t seed);

/// One homogeneous single-strategy run per cell with the reductions applied
/// to both alpha and beta. Every cell reuses `base.seed`.
std::vector<HeatmapCell> skill_heatmap(const PopulationConfig& base,
                                       const std::vector<std::pair<double, double>>& cells,
                                       std::size_t threads = 1, std::size_t budget = 1'000'000);

}  // namespace ccesim
