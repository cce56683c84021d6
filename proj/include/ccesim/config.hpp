#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ccesim/experiments.hpp"
#include "ccesim/replicator.hpp"

namespace ccesim {

/// What the `experiment` subcommand runs.
enum class ExperimentMode { Batch, Threshold, Heatmap };

std::string_view to_string(ExperimentMode m) noexcept;

struct ReplicatorConfig {
  /// Field grid resolution; also the snapping resolution of the payoff memo.
  std::size_t grid = 15;
  PayoffSettings payoff{};
  TrajectorySettings trajectory{};
  std::vector<SimplexPoint> starts{};
};

struct HeatmapConfig {
  std::vector<double> d_alpha{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> d_beta{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  /// Draw `samples` cells uniformly from [0, 1)^2 instead of the grid.
  bool sample_uniform = false;
  std::size_t samples = 100;
};

struct ConfigDocument {
  std::string preset = "custom";
  ExperimentMode mode = ExperimentMode::Batch;
  ExperimentConfig experiment{};
  ReplicatorConfig replicator{};
  HeatmapConfig heatmap{};
  std::vector<double> threshold_rates{kDefaultInGroupRates.begin(), kDefaultInGroupRates.end()};
};

/// Names accepted by the `experiment` key.
const std::vector<std::string>& preset_names();

/// Fully defaulted document for a named preset. Throws ConfigError.
ConfigDocument preset_document(std::string_view name);

/// Parses a YAML document on top of its preset (key `experiment`, default
/// "custom") and validates it. Throws ParseError for malformed YAML and
/// ConfigError for unknown keys, bad types or invariant violations.
ConfigDocument parse_config_text(std::string_view text);
ConfigDocument parse_config(const std::filesystem::path& path);

/// Checks every section, whatever the mode.
void validate(const ConfigDocument& doc);

/// The population config a single `run` uses: sweep point 0 with the
/// adopter layout applied and the master seed.
PopulationConfig single_run_config(const ConfigDocument& doc);

}  // namespace ccesim
