#include "ccesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ccesim/error.hpp"

namespace ccesim {

std::string_view to_string(ExperimentMode m) noexcept {
  switch (m) {
    case ExperimentMode::Batch: return "batch";
    case ExperimentMode::Threshold: return "threshold";
    case ExperimentMode::Heatmap: return "heatmap";
  }
  return "unknown";
}

namespace {

constexpr AIEffects kCaptionEffects{0.2, 0.05, 0.5, 0.5};
constexpr AIEffects kGroupEffects{0.2, 0.4, 0.2, 0.5};

ConfigDocument structured_document(std::size_t groups, std::size_t reps) {
  ConfigDocument doc;
  ExperimentConfig& e = doc.experiment;
  e.base.groups = groups;
  e.base.effects = kGroupEffects;
  e.base.allow_unordered_effects = true;
  e.layout = AdopterLayout::Cyclic;
  e.layout_fraction = 0.1;
  e.repetitions = reps;
  e.axes = {{"in_group_rate", {0.85, 0.0}}};
  e.outputs = {OutputKind::MedianSkill, OutputKind::Adoption, OutputKind::Strips, OutputKind::Dominance};
  return doc;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"custom", "fig4", "fig5", "fig6", "fig7a", "fig7c", "supp2"};
  return names;
}

ConfigDocument preset_document(std::string_view name) {
  ConfigDocument doc;
  ExperimentConfig& e = doc.experiment;
  e.base.effects = kCaptionEffects;
  if (name == "custom") {
  } else if (name == "fig4") {
    e.base.adopters = {{0, StrategyId::Complement, 0.1}};
    e.axes = {{"adopters[0].strategy", {std::string("complement"), std::string("substitute")}}};
    e.repetitions = 100;
    e.outputs = {OutputKind::MedianSkill, OutputKind::Adoption, OutputKind::Dominance, OutputKind::Crossover};
    e.crossover_arms = {0, 1};
  } else if (name == "fig5") {
    doc.replicator.grid = 15;
    doc.replicator.payoff = {1000, 5};
    doc.replicator.trajectory = {0.01, 100.0, 1e-6, 10};
    doc.replicator.starts = {
        {0.98, 0.01, 0.01}, {0.01, 0.98, 0.01}, {0.01, 0.01, 0.98}, {0.6, 0.2, 0.2},
        {0.2, 0.6, 0.2},    {0.2, 0.2, 0.6},    {0.4, 0.4, 0.2},    {0.4, 0.2, 0.4},
        {0.2, 0.4, 0.4},    {0.5, 0.25, 0.25},
    };
  } else if (name == "fig6") {
    doc = structured_document(3, 100);
  } else if (name == "fig7a") {
    doc.mode = ExperimentMode::Heatmap;
  } else if (name == "fig7c") {
    doc = structured_document(3, 100);
    doc.mode = ExperimentMode::Threshold;
    doc.experiment.axes.clear();
    doc.experiment.outputs = {OutputKind::Dominance};
  } else if (name == "supp2") {
    doc = structured_document(10, 50);
    doc.experiment.base.equal_sizes = true;
  } else {
    throw ConfigError("experiment", "unknown preset '" + std::string(name) + "'");
  }
  doc.preset = std::string(name);
  doc.experiment.name = doc.preset;
  return doc;
}

namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.line < 0) return {};
  return " (line " + std::to_string(mark.line + 1) + ", column " + std::to_string(mark.column + 1) + ")";
}

[[noreturn]] void fail(const std::string& path, const YAML::Node& node, const std::string& what) {
  throw ConfigError(path, what + where(node));
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, node, "expects a scalar");
  return node.Scalar();
}

double read_double(const YAML::Node& node, const std::string& path) {
  double value = 0.0;
  if (!node.IsScalar() || !YAML::convert<double>::decode(node, value)) fail(path, node, "expects a number");
  return value;
}

std::uint64_t read_u64(const YAML::Node& node, const std::string& path) {
  const std::string text = scalar(node, path);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(path, node, "expects a non-negative integer");
  return value;
}

std::size_t read_size(const YAML::Node& node, const std::string& path) {
  return static_cast<std::size_t>(read_u64(node, path));
}

bool read_bool(const YAML::Node& node, const std::string& path) {
  bool value = false;
  if (!node.IsScalar() || !YAML::convert<bool>::decode(node, value)) fail(path, node, "expects true or false");
  return value;
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) fail(path, node, "expects a mapping");
}

void require_seq(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) fail(path, node, "expects a list");
}

template <typename F>
void each_key(const YAML::Node& map, const std::string& prefix, F&& handle) {
  for (auto it = map.begin(); it != map.end(); ++it) {
    const std::string key = scalar(it->first, prefix + "<key>");
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!handle(key, it->second, path)) fail(path, it->first, "unknown key");
  }
}

std::vector<double> read_doubles(const YAML::Node& node, const std::string& path) {
  require_seq(node, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(read_double(node[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

StrategyId read_strategy(const YAML::Node& node, const std::string& path) {
  const auto s = parse_strategy(scalar(node, path));
  if (!s) fail(path, node, "expects noai, complement or substitute");
  return *s;
}

void read_population(const YAML::Node& node, PopulationConfig& c) {
  require_map(node, "population");
  each_key(node, "population", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key == "n" || key == "N") c.n = read_size(v, path);
    else if (key == "groups" || key == "m") c.groups = read_size(v, path);
    else if (key == "alpha") c.base.alpha = read_double(v, path);
    else if (key == "beta") c.base.beta = read_double(v, path);
    else if (key == "delta") c.delta = read_double(v, path);
    else if (key == "steps") c.steps = read_size(v, path);
    else if (key == "in_group_rate" || key == "G") c.in_group_rate = read_double(v, path);
    else if (key == "equal_sizes") c.equal_sizes = read_bool(v, path);
    else if (key == "allow_unordered_effects") c.allow_unordered_effects = read_bool(v, path);
    else return false;
    return true;
  });
}

void read_effects(const YAML::Node& node, AIEffects& e) {
  require_map(node, "effects");
  each_key(node, "effects", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key == "r_alpha_c") e.r_alpha_c = read_double(v, path);
    else if (key == "r_beta_c") e.r_beta_c = read_double(v, path);
    else if (key == "r_alpha_s") e.r_alpha_s = read_double(v, path);
    else if (key == "r_beta_s") e.r_beta_s = read_double(v, path);
    else return false;
    return true;
  });
}

std::vector<AdopterSeed> read_adopters(const YAML::Node& node) {
  require_seq(node, "adopters");
  std::vector<AdopterSeed> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string prefix = "adopters[" + std::to_string(i) + "]";
    require_map(node[i], prefix);
    AdopterSeed seed;
    each_key(node[i], prefix, [&](const std::string& key, const YAML::Node& v, const std::string& path) {
      if (key == "group") seed.group = read_size(v, path);
      else if (key == "strategy") seed.strategy = read_strategy(v, path);
      else if (key == "fraction") seed.fraction = read_double(v, path);
      else return false;
      return true;
    });
    out.push_back(seed);
  }
  return out;
}

std::vector<SweepAxis> read_sweep(const YAML::Node& node) {
  require_seq(node, "sweep");
  std::vector<SweepAxis> axes;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string prefix = "sweep[" + std::to_string(i) + "]";
    require_map(node[i], prefix);
    SweepAxis axis;
    bool has_path = false;
    each_key(node[i], prefix, [&](const std::string& key, const YAML::Node& v, const std::string& path) {
      if (key == "path") {
        axis.path = scalar(v, path);
        has_path = true;
      } else if (key == "values") {
        require_seq(v, path);
        for (std::size_t j = 0; j < v.size(); ++j) {
          double d = 0.0;
          const std::string vp = path + "[" + std::to_string(j) + "]";
          if (YAML::convert<double>::decode(v[j], d)) axis.values.emplace_back(d);
          else axis.values.emplace_back(scalar(v[j], vp));
        }
      } else {
        return false;
      }
      return true;
    });
    if (!has_path) fail(prefix + ".path", node[i], "is required");
    axes.push_back(std::move(axis));
  }
  return axes;
}

void read_replicator(const YAML::Node& node, ReplicatorConfig& r) {
  require_map(node, "replicator");
  each_key(node, "replicator", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key == "grid") r.grid = read_size(v, path);
    else if (key == "replicates") r.payoff.replicates = read_size(v, path);
    else if (key == "warmup_steps") r.payoff.warmup_steps = read_size(v, path);
    else if (key == "dt") r.trajectory.dt = read_double(v, path);
    else if (key == "t_max") r.trajectory.t_max = read_double(v, path);
    else if (key == "speed_tolerance") r.trajectory.speed_tolerance = read_double(v, path);
    else if (key == "record_every") r.trajectory.record_every = read_size(v, path);
    else if (key == "starts") {
      require_seq(v, path);
      r.starts.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string sp = path + "[" + std::to_string(i) + "]";
        const auto x = read_doubles(v[i], sp);
        if (x.size() != kStrategyCount) fail(sp, v[i], "expects [x0, xc, xs]");
        try {
          r.starts.emplace_back(x[0], x[1], x[2]);
        } catch (const ConfigError&) {
          fail(sp, v[i], "not on the simplex");
        }
      }
    } else {
      return false;
    }
    return true;
  });
}

void read_heatmap(const YAML::Node& node, HeatmapConfig& h) {
  require_map(node, "heatmap");
  each_key(node, "heatmap", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key == "d_alpha") h.d_alpha = read_doubles(v, path);
    else if (key == "d_beta") h.d_beta = read_doubles(v, path);
    else if (key == "sample_uniform") h.sample_uniform = read_bool(v, path);
    else if (key == "samples") h.samples = read_size(v, path);
    else return false;
    return true;
  });
}

void read_threshold(const YAML::Node& node, std::vector<double>& rates) {
  require_map(node, "threshold");
  each_key(node, "threshold", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key != "in_group_rates") return false;
    rates = read_doubles(v, path);
    return true;
  });
}

ConfigDocument read_document(const YAML::Node& root) {
  if (root.IsNull()) return preset_document("custom");
  require_map(root, "<document>");

  std::string preset = "custom";
  if (const YAML::Node p = root["experiment"]) preset = scalar(p, "experiment");
  ConfigDocument doc;
  try {
    doc = preset_document(preset);
  } catch (const ConfigError&) {
    fail("experiment", root["experiment"], "unknown preset '" + preset + "'");
  }
  ExperimentConfig& e = doc.experiment;

  each_key(root, "", [&](const std::string& key, const YAML::Node& v, const std::string& path) {
    if (key == "experiment") {
    } else if (key == "name") {
      e.name = scalar(v, path);
    } else if (key == "mode") {
      const std::string m = scalar(v, path);
      if (m == "batch") doc.mode = ExperimentMode::Batch;
      else if (m == "threshold") doc.mode = ExperimentMode::Threshold;
      else if (m == "heatmap") doc.mode = ExperimentMode::Heatmap;
      else fail(path, v, "expects batch, threshold or heatmap");
    } else if (key == "seed") {
      e.master_seed = read_u64(v, path);
    } else if (key == "repetitions") {
      e.repetitions = read_size(v, path);
    } else if (key == "budget") {
      e.budget = read_size(v, path);
    } else if (key == "outputs") {
      require_seq(v, path);
      e.outputs.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string op = path + "[" + std::to_string(i) + "]";
        const auto kind = parse_output_kind(scalar(v[i], op));
        if (!kind) fail(op, v[i], "expects median_skill, adoption, strips, dominance or crossover");
        e.outputs.push_back(*kind);
      }
    } else if (key == "population") {
      read_population(v, e.base);
    } else if (key == "effects") {
      read_effects(v, e.base.effects);
    } else if (key == "adopters") {
      e.base.adopters = read_adopters(v);
    } else if (key == "adopter_layout") {
      const std::string layout = scalar(v, path);
      if (layout == "explicit") e.layout = AdopterLayout::Explicit;
      else if (layout == "cyclic") e.layout = AdopterLayout::Cyclic;
      else fail(path, v, "expects explicit or cyclic");
    } else if (key == "adopter_fraction") {
      e.layout_fraction = read_double(v, path);
    } else if (key == "sweep") {
      e.axes = read_sweep(v);
    } else if (key == "crossover_arms") {
      require_seq(v, path);
      if (v.size() != 2) fail(path, v, "expects two sweep indices");
      e.crossover_arms = {read_size(v[0], path + "[0]"), read_size(v[1], path + "[1]")};
    } else if (key == "replicator") {
      read_replicator(v, doc.replicator);
    } else if (key == "heatmap") {
      read_heatmap(v, doc.heatmap);
    } else if (key == "threshold") {
      read_threshold(v, doc.threshold_rates);
    } else {
      return false;
    }
    return true;
  });
  return doc;
}

}  // namespace

ConfigDocument parse_config_text(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  ConfigDocument doc = read_document(root);
  validate(doc);
  return doc;
}

ConfigDocument parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void validate(const ConfigDocument& doc) {
  const ExperimentConfig& e = doc.experiment;
  validate(e);
  if (std::find(e.outputs.begin(), e.outputs.end(), OutputKind::Crossover) != e.outputs.end()) {
    const std::size_t points = sweep_size(e);
    const auto [a, b] = e.crossover_arms;
    if (a >= points || b >= points || a == b)
      throw ConfigError("crossover_arms", "must name two distinct sweep points");
  }

  const ReplicatorConfig& r = doc.replicator;
  if (r.grid < 2) throw ConfigError("replicator.grid", "must be >= 2");
  if (r.payoff.replicates < 2) throw ConfigError("replicator.replicates", "must be >= 2");
  if (!(r.trajectory.dt > 0.0)) throw ConfigError("replicator.dt", "must be > 0");
  if (!(r.trajectory.t_max >= 0.0)) throw ConfigError("replicator.t_max", "must be >= 0");
  if (!(r.trajectory.speed_tolerance >= 0.0)) throw ConfigError("replicator.speed_tolerance", "must be >= 0");
  if (r.trajectory.record_every == 0) throw ConfigError("replicator.record_every", "must be >= 1");

  if (doc.heatmap.sample_uniform) {
    if (doc.heatmap.samples == 0) throw ConfigError("heatmap.samples", "must be >= 1");
  } else {
    heatmap_grid(doc.heatmap.d_alpha, doc.heatmap.d_beta);
  }

  for (double required : kDefaultInGroupRates) {
    if (std::find(doc.threshold_rates.begin(), doc.threshold_rates.end(), required) == doc.threshold_rates.end())
      throw ConfigError("threshold.in_group_rates", "must include 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99");
  }
  for (double g : doc.threshold_rates) {
    if (!(g >= 0.0 && g <= 1.0)) throw ConfigError("threshold.in_group_rates", "values must lie in [0, 1]");
  }
}

PopulationConfig single_run_config(const ConfigDocument& doc) {
  PopulationConfig c = point_config(doc.experiment, 0, 0);
  c.seed = doc.experiment.master_seed;
  return c;
}

}  // namespace ccesim
