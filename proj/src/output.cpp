#include "ccesim/output.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace ccesim {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, end);
}

std::string CsvTable::render() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

namespace {

const std::vector<std::string> kShareColumns{"share_noai", "share_complement", "share_substitute"};

std::vector<std::string> with_shares(std::vector<std::string> head) {
  head.insert(head.end(), kShareColumns.begin(), kShareColumns.end());
  return head;
}

void append_triple(std::vector<std::string>& row, const std::array<double, kStrategyCount>& v) {
  for (double x : v) row.push_back(format_double(x));
}

std::string scope_name(std::size_t scope) {
  return scope == 0 ? "all" : "g" + std::to_string(scope - 1);
}

std::vector<std::string> coord_header(const ExperimentConfig& config) {
  std::vector<std::string> head;
  for (const SweepAxis& axis : config.axes) head.push_back(axis.path);
  return head;
}

std::vector<std::string> coord_cells(const AggregateRecord& r) {
  std::vector<std::string> cells;
  for (const SweepValue& v : r.coords) {
    if (const auto* d = std::get_if<double>(&v)) cells.push_back(format_double(*d));
    else cells.push_back(std::get<std::string>(v));
  }
  return cells;
}

}  // namespace

CsvTable step_records_table(const std::vector<StepRecord>& records) {
  CsvTable t{"step_records", 1,
             with_shares({"step", "scope", "median_skill", "mean_skill", "max_skill", "skill_var"}), {}};
  for (const StepRecord& r : records) {
    for (std::size_t s = 0; s < r.scopes.size(); ++s) {
      const ScopeStats& st = r.scopes[s];
      std::vector<std::string> row{std::to_string(r.step), scope_name(s), format_double(st.median_skill),
                                   format_double(st.mean_skill), format_double(st.max_skill),
                                   format_double(st.skill_var)};
      append_triple(row, st.shares);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable strip_table(const std::vector<StepRecord>& records, std::size_t group) {
  CsvTable t{"strips", 1, with_shares({"step", "group"}), {}};
  for (const StepRecord& r : records) {
    const std::size_t scope = r.scopes.size() > 1 ? group + 1 : 0;
    std::vector<std::string> row{std::to_string(r.step), std::to_string(group)};
    append_triple(row, r.scopes.at(scope).shares);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable field_samples_table(const FieldResult& field) {
  CsvTable t{"field_samples", 1, {"x0", "xc", "xs", "dx0", "dxc", "dxs", "speed", "confidence_flag"}, {}};
  for (const FieldSample& s : field.samples) {
    std::vector<std::string> row;
    append_triple(row, s.point.values());
    append_triple(row, s.velocity);
    row.push_back(format_double(s.speed));
    row.push_back(s.confidence == Confidence::Ok ? "ok" : "low");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable trajectories_table(const std::vector<Trajectory>& trajectories) {
  CsvTable t{"trajectories", 1, {"traj_id", "t", "x0", "xc", "xs"}, {}};
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    for (const TrajectoryPoint& p : trajectories[id].points) {
      std::vector<std::string> row{std::to_string(id), format_double(p.t)};
      append_triple(row, p.x.values());
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable equilibria_table(const std::vector<Trajectory>& trajectories) {
  CsvTable t{"equilibria", 1, {"traj_id", "t_end", "x0", "xc", "xs", "attractor"}, {}};
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const Trajectory& traj = trajectories[id];
    const TrajectoryPoint& end = traj.points.back();
    std::vector<std::string> row{std::to_string(id), format_double(end.t)};
    append_triple(row, end.x.values());
    row.emplace_back(traj.attractor ? std::string(to_string(*traj.attractor)) : "none");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable aggregates_table(const ExperimentConfig& config, const std::vector<AggregateRecord>& records) {
  std::vector<std::string> head = coord_header(config);
  for (const char* c : {"step", "median_of_medians", "se"}) head.emplace_back(c);
  CsvTable t{"aggregates", 1, with_shares(std::move(head)), {}};
  for (const AggregateRecord& r : records) {
    const auto coords = coord_cells(r);
    for (std::size_t step = 0; step < r.median_of_medians.size(); ++step) {
      std::vector<std::string> row = coords;
      row.push_back(std::to_string(step));
      row.push_back(format_double(r.median_of_medians[step]));
      row.push_back(format_double(r.median_se[step]));
      append_triple(row, r.mean_shares[step]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable dominance_table(const ExperimentConfig& config, const std::vector<AggregateRecord>& records) {
  std::vector<std::string> head = coord_header(config);
  for (const char* c : {"repetitions", "runs_noai", "runs_complement", "runs_substitute", "runs_none", "dominant"})
    head.emplace_back(c);
  CsvTable t{"dominance", 1, std::move(head), {}};
  for (const AggregateRecord& r : records) {
    std::vector<std::string> row = coord_cells(r);
    row.push_back(std::to_string(r.repetitions));
    for (std::size_t count : r.dominance_counts) row.push_back(std::to_string(count));
    row.emplace_back(r.dominant ? std::string(to_string(*r.dominant)) : "none");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable crossover_table(std::size_t arm_a, std::size_t arm_b, std::optional<std::size_t> generation) {
  CsvTable t{"crossover", 1, {"arm_a", "arm_b", "generation"}, {}};
  t.rows.push_back({std::to_string(arm_a), std::to_string(arm_b),
                    generation ? std::to_string(*generation) : "none"});
  return t;
}

CsvTable threshold_table(const ThresholdResult& result) {
  CsvTable t{"threshold",
             1,
             {"in_group_rate", "frac_noai", "frac_complement", "frac_substitute", "frac_none"},
             {}};
  for (const ThresholdRow& r : result.rows) {
    std::vector<std::string> row{format_double(r.in_group_rate)};
    for (double f : r.dominance_fraction) row.push_back(format_double(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable heatmap_table(const std::vector<HeatmapCell>& cells) {
  CsvTable t{"heatmap", 1, {"d_alpha", "d_beta", "final_median_skill"}, {}};
  for (const HeatmapCell& c : cells)
    t.rows.push_back({format_double(c.d_alpha), format_double(c.d_beta), format_double(c.final_median_skill)});
  return t;
}

nlohmann::json to_json(const ConfigDocument& doc) {
  using nlohmann::json;
  const ExperimentConfig& e = doc.experiment;
  const PopulationConfig& p = e.base;

  json adopters = json::array();
  for (const AdopterSeed& a : p.adopters)
    adopters.push_back({{"group", a.group}, {"strategy", to_string(a.strategy)}, {"fraction", a.fraction}});

  json sweep = json::array();
  for (const SweepAxis& axis : e.axes) {
    json values = json::array();
    for (const SweepValue& v : axis.values) {
      if (const auto* d = std::get_if<double>(&v)) values.push_back(*d);
      else values.push_back(std::get<std::string>(v));
    }
    sweep.push_back({{"path", axis.path}, {"values", values}});
  }

  json outputs = json::array();
  for (OutputKind k : e.outputs) outputs.push_back(to_string(k));

  json starts = json::array();
  for (const SimplexPoint& s : doc.replicator.starts) starts.push_back(s.values());

  return {
      {"experiment", doc.preset},
      {"name", e.name},
      {"mode", to_string(doc.mode)},
      {"seed", e.master_seed},
      {"repetitions", e.repetitions},
      {"budget", e.budget},
      {"outputs", outputs},
      {"population",
       {{"n", p.n},
        {"groups", p.groups},
        {"alpha", p.base.alpha},
        {"beta", p.base.beta},
        {"delta", p.delta},
        {"steps", p.steps},
        {"in_group_rate", p.in_group_rate},
        {"equal_sizes", p.equal_sizes},
        {"allow_unordered_effects", p.allow_unordered_effects}}},
      {"effects",
       {{"r_alpha_c", p.effects.r_alpha_c},
        {"r_beta_c", p.effects.r_beta_c},
        {"r_alpha_s", p.effects.r_alpha_s},
        {"r_beta_s", p.effects.r_beta_s}}},
      {"adopters", adopters},
      {"adopter_layout", e.layout == AdopterLayout::Cyclic ? "cyclic" : "explicit"},
      {"adopter_fraction", e.layout_fraction},
      {"sweep", sweep},
      {"crossover_arms", {e.crossover_arms.first, e.crossover_arms.second}},
      {"replicator",
       {{"grid", doc.replicator.grid},
        {"replicates", doc.replicator.payoff.replicates},
        {"warmup_steps", doc.replicator.payoff.warmup_steps},
        {"dt", doc.replicator.trajectory.dt},
        {"t_max", doc.replicator.trajectory.t_max},
        {"speed_tolerance", doc.replicator.trajectory.speed_tolerance},
        {"record_every", doc.replicator.trajectory.record_every},
        {"starts", starts}}},
      {"heatmap",
       {{"d_alpha", doc.heatmap.d_alpha},
        {"d_beta", doc.heatmap.d_beta},
        {"sample_uniform", doc.heatmap.sample_uniform},
        {"samples", doc.heatmap.samples}}},
      {"threshold", {{"in_group_rates", doc.threshold_rates}}},
  };
}

std::string manifest_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    long long value = 0;
    const char* end = epoch + std::char_traits<char>::length(epoch);
    auto [ptr, ec] = std::from_chars(epoch, end, value);
    if (ec == std::errc{} && ptr == end) now = static_cast<std::time_t>(value);
  }
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename into '" + path.string() + "'");
  }
}

void OutputSet::add(std::string file, CsvTable table) {
  tables_.emplace_back(std::move(file), std::move(table));
}

void OutputSet::write(const std::filesystem::path& dir, const std::string& command,
                      const ConfigDocument& doc) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

  nlohmann::json files = nlohmann::json::array();
  for (const auto& [file, table] : tables_) {
    write_file_atomic(dir / file, table.render());
    files.push_back({{"file", file},
                     {"schema", table.schema},
                     {"schema_version", table.schema_version},
                     {"columns", table.header},
                     {"rows", table.rows.size()}});
  }

  nlohmann::json manifest{
      {"tool", "ccesim"},
      {"version", kToolVersion},
      {"command", command},
      {"seed", doc.experiment.master_seed},
      {"timestamp", manifest_timestamp()},
      {"config", to_json(doc)},
      {"outputs", files},
  };
  for (const auto& [key, value] : extra_.items()) manifest[key] = value;
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ccesim
