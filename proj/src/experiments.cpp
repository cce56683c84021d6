#include "ccesim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ccesim/error.hpp"
#include "ccesim/parallel.hpp"
#include "ccesim/rng.hpp"

namespace ccesim {

std::string to_string(const SweepValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
  return std::string(buf, end);
}

namespace {

double as_number(const std::string& path, const SweepValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ConfigError("sweep." + path, "expects a number");
}

std::size_t as_count(const std::string& path, const SweepValue& v) {
  const double d = as_number(path, v);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1e15)
    throw ConfigError("sweep." + path, "expects a non-negative integer");
  return static_cast<std::size_t>(d);
}

}  // namespace

void apply_sweep_value(PopulationConfig& c, const std::string& path, const SweepValue& v) {
  std::string key = path;
  for (const char* prefix : {"population.", "effects."}) {
    if (key.starts_with(prefix)) key.erase(0, std::char_traits<char>::length(prefix));
  }

  if (key.starts_with("adopters[")) {
    const auto close = key.find(']');
    std::size_t index = 0;
    const auto* first = key.data() + 9;
    const auto* last = key.data() + (close == std::string::npos ? key.size() : close);
    auto [ptr, ec] = std::from_chars(first, last, index);
    if (close == std::string::npos || ec != std::errc{} || ptr != last ||
        key.compare(close + 1, 1, ".") != 0)
      throw ConfigError("sweep." + path, "malformed adopter path");
    if (index >= c.adopters.size()) throw ConfigError("sweep." + path, "adopter index out of range");
    AdopterSeed& a = c.adopters[index];
    const std::string field = key.substr(close + 2);
    if (field == "strategy") {
      const auto* name = std::get_if<std::string>(&v);
      auto s = name ? parse_strategy(*name) : std::nullopt;
      if (!s) throw ConfigError("sweep." + path, "expects noai, complement or substitute");
      a.strategy = *s;
    } else if (field == "fraction") {
      a.fraction = as_number(path, v);
    } else if (field == "group") {
      a.group = as_count(path, v);
    } else {
      throw ConfigError("sweep." + path, "unknown adopter field");
    }
    return;
  }

  if (key == "n") c.n = as_count(path, v);
  else if (key == "groups") c.groups = as_count(path, v);
  else if (key == "steps") c.steps = as_count(path, v);
  else if (key == "seed") c.seed = as_count(path, v);
  else if (key == "alpha") c.base.alpha = as_number(path, v);
  else if (key == "beta") c.base.beta = as_number(path, v);
  else if (key == "delta") c.delta = as_number(path, v);
  else if (key == "in_group_rate") c.in_group_rate = as_number(path, v);
  else if (key == "r_alpha_c") c.effects.r_alpha_c = as_number(path, v);
  else if (key == "r_beta_c") c.effects.r_beta_c = as_number(path, v);
  else if (key == "r_alpha_s") c.effects.r_alpha_s = as_number(path, v);
  else if (key == "r_beta_s") c.effects.r_beta_s = as_number(path, v);
  else throw ConfigError("sweep." + path, "unknown parameter path");
}

std::vector<AdopterSeed> cyclic_adopters(std::size_t groups, double fraction) {
  if (groups == 1)
    return {{0, StrategyId::Complement, fraction}, {0, StrategyId::Substitute, fraction}};
  std::vector<AdopterSeed> seeds;
  for (std::size_t g = 0; g < groups; ++g) {
    if (g % 3 == 1) seeds.push_back({g, StrategyId::Complement, fraction});
    if (g % 3 == 2) seeds.push_back({g, StrategyId::Substitute, fraction});
  }
  return seeds;
}

std::string_view to_string(OutputKind k) noexcept {
  switch (k) {
    case OutputKind::MedianSkill: return "median_skill";
    case OutputKind::Adoption: return "adoption";
    case OutputKind::Strips: return "strips";
    case OutputKind::Dominance: return "dominance";
    case OutputKind::Crossover: return "crossover";
  }
  return "unknown";
}

std::optional<OutputKind> parse_output_kind(std::string_view name) noexcept {
  for (OutputKind k : {OutputKind::MedianSkill, OutputKind::Adoption, OutputKind::Strips,
                       OutputKind::Dominance, OutputKind::Crossover}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

std::size_t sweep_size(const ExperimentConfig& config) {
  std::size_t size = 1;
  for (const SweepAxis& axis : config.axes) size *= axis.values.size();
  return size;
}

std::vector<SweepValue> sweep_coords(const ExperimentConfig& config, std::size_t index) {
  std::vector<SweepValue> coords(config.axes.size());
  for (std::size_t a = config.axes.size(); a-- > 0;) {
    const auto& values = config.axes[a].values;
    coords[a] = values[index % values.size()];
    index /= values.size();
  }
  return coords;
}

PopulationConfig point_config(const ExperimentConfig& config, std::size_t index, std::size_t rep) {
  PopulationConfig c = config.base;
  const auto coords = sweep_coords(config, index);
  for (std::size_t a = 0; a < coords.size(); ++a)
    apply_sweep_value(c, config.axes[a].path, coords[a]);
  if (config.layout == AdopterLayout::Cyclic) c.adopters = cyclic_adopters(c.groups, config.layout_fraction);
  c.seed = derive_seed(config.master_seed, index, rep);
  return c;
}

void validate(const ExperimentConfig& config) {
  if (config.repetitions < 1) throw ConfigError("repetitions", "must be >= 1");
  for (std::size_t a = 0; a < config.axes.size(); ++a) {
    if (config.axes[a].values.empty())
      throw ConfigError("sweep[" + std::to_string(a) + "].values", "must not be empty");
  }
  const std::size_t points = sweep_size(config);
  const double total = static_cast<double>(points) * static_cast<double>(config.repetitions);
  if (total >= static_cast<double>(config.budget))
    throw ConfigError("budget", "sweep points x repetitions = " + std::to_string(points * config.repetitions) +
                                    " must be < " + std::to_string(config.budget));
  if (!(config.layout_fraction >= 0.0 && config.layout_fraction <= 1.0))
    throw ConfigError("adopter_fraction", "must be in [0, 1]");
  for (std::size_t i = 0; i < points; ++i) validate(point_config(config, i, 0));
}

std::optional<StrategyId> dominant_strategy(const std::array<double, kStrategyCount>& shares) {
  for (StrategyId s : kAllStrategies) {
    if (shares[index_of(s)] > 0.5) return s;
  }
  return std::nullopt;
}

RunSummary summarize_run(const std::vector<StepRecord>& records) {
  RunSummary summary;
  summary.median.reserve(records.size());
  summary.shares.reserve(records.size());
  for (const StepRecord& r : records) {
    summary.median.push_back(r.population().median_skill);
    summary.shares.push_back(r.population().shares);
  }
  return summary;
}

namespace {

// Sorted summation so the result does not depend on repetition order.
double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

}  // namespace

AggregateRecord aggregate(std::size_t sweep_index, std::vector<SweepValue> coords,
                          const std::vector<RunSummary>& runs) {
  AggregateRecord agg;
  agg.sweep_index = sweep_index;
  agg.coords = std::move(coords);
  agg.repetitions = runs.size();
  if (runs.empty()) return agg;

  const std::size_t steps = runs.front().median.size();
  const double reps = static_cast<double>(runs.size());
  agg.median_of_medians.resize(steps);
  agg.median_se.resize(steps);
  agg.mean_shares.resize(steps);

  std::vector<double> column(runs.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].median[t];
    const double mean = ordered_sum(column) / reps;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    agg.median_se[t] = runs.size() > 1 ? std::sqrt(ss / (reps - 1.0) / reps) : 0.0;
    agg.median_of_medians[t] = median_inplace(column);

    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      for (std::size_t r = 0; r < runs.size(); ++r) column[r] = runs[r].shares[t][s];
      agg.mean_shares[t][s] = ordered_sum(column) / reps;
    }
  }

  for (const RunSummary& run : runs) {
    const auto label = dominant_strategy(run.shares.back());
    ++agg.dominance_counts[label ? index_of(*label) : kNoDominant];
  }
  agg.dominant = dominant_strategy(agg.mean_shares.back());
  return agg;
}

std::vector<AggregateRecord> run_experiment(const ExperimentConfig& config, std::size_t threads) {
  validate(config);
  const std::size_t points = sweep_size(config);
  const std::size_t reps = config.repetitions;

  std::vector<RunSummary> runs(points * reps);
  parallel_for(runs.size(), threads, [&](std::size_t job) {
    runs[job] = summarize_run(run(point_config(config, job / reps, job % reps)));
  });

  std::vector<AggregateRecord> records;
  records.reserve(points);
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<RunSummary> slice(std::make_move_iterator(runs.begin() + static_cast<std::ptrdiff_t>(p * reps)),
                                  std::make_move_iterator(runs.begin() + static_cast<std::ptrdiff_t>((p + 1) * reps)));
    records.push_back(aggregate(p, sweep_coords(config, p), slice));
  }
  return records;
}

std::optional<std::size_t> crossover_generation(const std::vector<double>& a,
                                                const std::vector<double>& b, std::size_t window) {
  const std::size_t len = std::min(a.size(), b.size());
  std::size_t run_length = 0;
  for (std::size_t t = 0; t < len; ++t) {
    run_length = a[t] > b[t] ? run_length + 1 : 0;
    if (run_length >= window) return t + 1 - window;
  }
  return std::nullopt;
}

ThresholdResult dominance_threshold(const ExperimentConfig& config, std::vector<double> rates,
                                    std::size_t threads) {
  for (double required : kDefaultInGroupRates) {
    if (std::find(rates.begin(), rates.end(), required) == rates.end())
      throw ConfigError("threshold.in_group_rates", "must include 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99");
  }
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());

  ExperimentConfig sweep = config;
  sweep.axes = {{"in_group_rate", std::vector<SweepValue>(rates.begin(), rates.end())}};
  const auto records = run_experiment(sweep, threads);

  ThresholdResult result;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    ThresholdRow row;
    row.in_group_rate = rates[i];
    for (std::size_t slot = 0; slot <= kStrategyCount; ++slot)
      row.dominance_fraction[slot] = records[i].dominance_fraction(slot);
    if (!result.threshold && row.dominance_fraction[index_of(StrategyId::Complement)] > 0.5)
      result.threshold = rates[i];
    result.rows.push_back(row);
  }
  return result;
}

std::vector<std::pair<double, double>> heatmap_grid(const std::vector<double>& d_alpha,
                                                    const std::vector<double>& d_beta) {
  auto check = [](const std::vector<double>& axis, const char* field) {
    if (axis.size() < 5) throw ConfigError(field, "needs at least 5 values");
    for (double v : axis) {
      if (!(v >= 0.0 && v < 1.0)) throw ConfigError(field, "values must lie in [0, 1)");
    }
  };
  check(d_alpha, "heatmap.d_alpha");
  check(d_beta, "heatmap.d_beta");
  std::vector<std::pair<double, double>> cells;
  cells.reserve(d_alpha.size() * d_beta.size());
  for (double a : d_alpha)
    for (double b : d_beta) cells.emplace_back(a, b);
  return cells;
}

std::vector<std::pair<double, double>> heatmap_uniform_cells(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> cells(count);
  for (auto& [a, b] : cells) {
    a = rng.uniform();
    b = rng.uniform();
  }
  return cells;
}

std::vector<HeatmapCell> skill_heatmap(const PopulationConfig& base,
                                       const std::vector<std::pair<double, double>>& cells,
                                       std::size_t threads, std::size_t budget) {
  if (cells.size() >= budget)
    throw ConfigError("budget", "heatmap cell count must be < " + std::to_string(budget));
  std::vector<HeatmapCell> out(cells.size());
  std::vector<PopulationConfig> configs(cells.size(), base);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    PopulationConfig& c = configs[i];
    c.effects = {cells[i].first, cells[i].second, 0.0, 0.0};
    c.allow_unordered_effects = true;
    c.adopters.clear();
    for (std::size_t g = 0; g < c.groups; ++g) c.adopters.push_back({g, StrategyId::Complement, 1.0});
    validate(c);
  }
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    double final_median = 0.0;
    run(configs[i], [&](const StepRecord& r) { final_median = r.population().median_skill; });
    out[i] = {cells[i].first, cells[i].second, final_median};
  });
  return out;
}

}  // namespace ccesim
