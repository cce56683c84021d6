#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccesim/config.hpp"
#include "ccesim/experiments.hpp"
#include "ccesim/population.hpp"
#include "ccesim/replicator.hpp"

namespace ccesim {

inline constexpr const char* kToolVersion = "0.3.0";

/// 17 significant digits with a "." separator, independent of locale.
std::string format_double(double v);

struct CsvTable {
  std::string schema;
  int schema_version = 1;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Header line plus one line per row, '\n' terminated.
  std::string render() const;
};

/// One row per scope per step; scope is "all" or "g<index>".
CsvTable step_records_table(const std::vector<StepRecord>& records);
/// Strategy shares of one group over time.
CsvTable strip_table(const std::vector<StepRecord>& records, std::size_t group);
CsvTable field_samples_table(const FieldResult& field);
CsvTable trajectories_table(const std::vector<Trajectory>& trajectories);
CsvTable equilibria_table(const std::vector<Trajectory>& trajectories);
CsvTable aggregates_table(const ExperimentConfig& config, const std::vector<AggregateRecord>& records);
CsvTable dominance_table(const ExperimentConfig& config, const std::vector<AggregateRecord>& records);
CsvTable crossover_table(std::size_t arm_a, std::size_t arm_b, std::optional<std::size_t> generation);
CsvTable threshold_table(const ThresholdResult& result);
CsvTable heatmap_table(const std::vector<HeatmapCell>& cells);

nlohmann::json to_json(const ConfigDocument& doc);

/// ISO-8601 UTC time, taken from SOURCE_DATE_EPOCH when that is set.
std::string manifest_timestamp();

/// Collects tables and writes them, plus manifest.json, into one directory.
/// Every file goes through a temporary name and an atomic rename.
class OutputSet {
public:
  void add(std::string file, CsvTable table);
  /// Extra top-level manifest fields.
  nlohmann::json& extra() { return extra_; }

  /// Throws std::runtime_error on I/O failure.
  void write(const std::filesystem::path& dir, const std::string& command,
             const ConfigDocument& doc) const;

private:
  std::vector<std::pair<std::string, CsvTable>> tables_;
  nlohmann::json extra_ = nlohmann::json::object();
};

/// Writes `content` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ccesim
