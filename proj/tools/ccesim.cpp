#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ccesim/config.hpp"
#include "ccesim/error.hpp"
#include "ccesim/experiments.hpp"
#include "ccesim/output.hpp"
#include "ccesim/parallel.hpp"
#include "ccesim/replicator.hpp"

namespace {

using namespace ccesim;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::string out = "out";
  std::size_t threads = 0;
};

ConfigDocument load(const Options& opt) {
  ConfigDocument doc = opt.config.empty() ? preset_document("custom") : parse_config(opt.config);
  if (opt.seed) doc.experiment.master_seed = *opt.seed;
  if (opt.budget) doc.experiment.budget = *opt.budget;
  validate(doc);
  return doc;
}

bool wants(const ExperimentConfig& e, OutputKind kind) {
  return std::find(e.outputs.begin(), e.outputs.end(), kind) != e.outputs.end();
}

void add_strips(OutputSet& out, const std::vector<StepRecord>& records, std::size_t groups,
                const std::string& prefix) {
  for (std::size_t g = 0; g < groups; ++g)
    out.add(prefix + "strips_group" + std::to_string(g) + ".csv", strip_table(records, g));
}

std::string label(std::optional<StrategyId> s) {
  return s ? std::string(to_string(*s)) : "none";
}

void cmd_run(const ConfigDocument& doc, OutputSet& out) {
  const PopulationConfig config = single_run_config(doc);
  const auto records = run(config);
  out.add("step_records.csv", step_records_table(records));
  if (config.groups > 1) add_strips(out, records, config.groups, "");
  out.extra()["final_dominant"] = label(dominant_strategy(records.back().population().shares));
}

void cmd_batch(const ConfigDocument& doc, std::size_t threads, OutputSet& out) {
  const ExperimentConfig& e = doc.experiment;
  const auto records = run_experiment(e, threads);
  if (wants(e, OutputKind::MedianSkill) || wants(e, OutputKind::Adoption))
    out.add("aggregates.csv", aggregates_table(e, records));
  if (wants(e, OutputKind::Dominance)) out.add("dominance.csv", dominance_table(e, records));
  if (wants(e, OutputKind::Crossover)) {
    const auto [a, b] = e.crossover_arms;
    const auto generation = crossover_generation(records[a].median_of_medians, records[b].median_of_medians);
    out.add("crossover.csv", crossover_table(a, b, generation));
    out.extra()["crossover_generation"] =
        generation ? nlohmann::json(*generation) : nlohmann::json("none");
  }
  if (wants(e, OutputKind::Strips)) {
    // Strips show one representative run (repetition 0) per sweep point.
    for (std::size_t p = 0; p < records.size(); ++p) {
      const PopulationConfig config = point_config(e, p, 0);
      add_strips(out, run(config), config.groups, "p" + std::to_string(p) + "_");
    }
  }
}

void cmd_threshold(const ConfigDocument& doc, std::size_t threads, OutputSet& out) {
  const ThresholdResult result = dominance_threshold(doc.experiment, doc.threshold_rates, threads);
  out.add("threshold.csv", threshold_table(result));
  out.extra()["threshold"] = result.threshold ? nlohmann::json(*result.threshold) : nlohmann::json("none");
}

void cmd_heatmap(const ConfigDocument& doc, std::size_t threads, OutputSet& out) {
  PopulationConfig base = doc.experiment.base;
  base.seed = doc.experiment.master_seed;
  const auto cells = doc.heatmap.sample_uniform
                         ? heatmap_uniform_cells(doc.heatmap.samples, doc.experiment.master_seed)
                         : heatmap_grid(doc.heatmap.d_alpha, doc.heatmap.d_beta);
  out.add("heatmap.csv", heatmap_table(skill_heatmap(base, cells, threads, doc.experiment.budget)));
}

void cmd_field(const ConfigDocument& doc, std::size_t threads, OutputSet& out) {
  const FieldResult field = build_field(doc.replicator.grid, doc.experiment.base, doc.replicator.payoff,
                                        doc.experiment.master_seed, threads);
  out.add("field_samples.csv", field_samples_table(field));
  out.extra()["skipped_points"] = field.skipped.size();
}

void cmd_trajectory(const ConfigDocument& doc, std::size_t threads, OutputSet& out) {
  const auto& starts = doc.replicator.starts;
  if (starts.empty()) throw ConfigError("replicator.starts", "must not be empty");
  PayoffCache cache(doc.experiment.base, doc.replicator.payoff, doc.replicator.grid,
                    doc.experiment.master_seed);
  std::vector<Trajectory> trajectories(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t i) {
    trajectories[i] = integrate_trajectory(starts[i], cache, doc.replicator.trajectory);
  });
  out.add("trajectories.csv", trajectories_table(trajectories));
  out.add("equilibria.csv", equilibria_table(trajectories));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based simulation of cumulative skill growth under AI-assisted social learning"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&opt](CLI::App* sub, bool writes) {
    sub->add_option("--config", opt.config, "YAML config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Master seed (overrides the config)");
    sub->add_option("--budget", opt.budget, "Upper bound on sweep points x repetitions");
    if (writes) {
      sub->add_option("--out", opt.out, "Output directory")->capture_default_str();
      sub->add_option("--threads", opt.threads, "Worker threads, 0 = hardware concurrency")
          ->capture_default_str();
    }
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Single simulation");
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Repetition batch, threshold sweep or heatmap");
  CLI::App* field_cmd = app.add_subcommand("field", "Replicator vector field on the simplex grid");
  CLI::App* traj_cmd = app.add_subcommand("trajectory", "Integrate replicator trajectories");
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a config without running");
  for (CLI::App* sub : {run_cmd, exp_cmd, field_cmd, traj_cmd}) add_common(sub, true);
  add_common(validate_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ConfigDocument doc;
  try {
    doc = load(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  }

  if (validate_cmd->parsed()) {
    std::cout << "ok: " << doc.preset << " (" << to_string(doc.mode) << ")\n";
    return 0;
  }

  const std::size_t threads = resolve_threads(opt.threads);
  try {
    OutputSet out;
    std::string command;
    if (run_cmd->parsed()) {
      command = "run";
      cmd_run(doc, out);
    } else if (exp_cmd->parsed()) {
      command = "experiment";
      switch (doc.mode) {
        case ExperimentMode::Batch: cmd_batch(doc, threads, out); break;
        case ExperimentMode::Threshold: cmd_threshold(doc, threads, out); break;
        case ExperimentMode::Heatmap: cmd_heatmap(doc, threads, out); break;
      }
    } else if (field_cmd->parsed()) {
      command = "field";
      cmd_field(doc, threads, out);
    } else {
      command = "trajectory";
      cmd_trajectory(doc, threads, out);
    }
    out.write(opt.out, command, doc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
