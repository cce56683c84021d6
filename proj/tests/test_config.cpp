#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "ccesim/config.hpp"
#include "ccesim/error.hpp"
#include "ccesim/output.hpp"

using namespace ccesim;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<none>";
}

}  // namespace

TEST_CASE("a preset name alone gives a fully defaulted document") {
  const auto doc = parse_config_text("experiment: fig4\n");
  const auto& e = doc.experiment;
  CHECK(doc.preset == "fig4");
  CHECK(e.base.base.alpha == 1.0);
  CHECK(e.base.base.beta == 0.5);
  CHECK(e.base.n == 1000);
  CHECK(e.base.delta == 10.0);
  CHECK(e.base.steps == 1000);
  CHECK(e.repetitions == 100);
  REQUIRE(e.base.adopters.size() == 1);
  CHECK(e.base.adopters[0].fraction == 0.1);
  CHECK(e.base.effects == AIEffects{0.2, 0.05, 0.5, 0.5});
  REQUIRE(e.axes.size() == 1);
  CHECK(sweep_size(e) == 2);
  CHECK(point_config(e, 0, 0).adopters[0].strategy == StrategyId::Complement);
  CHECK(point_config(e, 1, 0).adopters[0].strategy == StrategyId::Substitute);
}

TEST_CASE("every preset validates") {
  for (const auto& name : preset_names()) {
    INFO(name);
    const auto doc = preset_document(name);
    CHECK_NOTHROW(validate(doc));
  }
  CHECK(preset_document("fig7c").mode == ExperimentMode::Threshold);
  CHECK(preset_document("fig7a").mode == ExperimentMode::Heatmap);
  CHECK(preset_document("fig5").replicator.starts.size() == 10);
  CHECK_THROWS_AS(preset_document("fig9"), ConfigError);
}

TEST_CASE("empty document is the custom preset") {
  const auto doc = parse_config_text("");
  CHECK(doc.preset == "custom");
  CHECK(doc.experiment.repetitions == 1);
}

TEST_CASE("boundary rejection names the constraint") {
  const auto msg = config_error("effects:\n  r_alpha_c: 1.0\n");
  CHECK(msg.find("effects.r_alpha_c") != std::string::npos);
  CHECK(msg.find("must be < 1") != std::string::npos);
}

TEST_CASE("short aliases select the group setup") {
  const auto doc = parse_config_text(
      "experiment: custom\n"
      "population:\n  G: 0.85\n  m: 3\n  N: 600\n"
      "adopter_layout: cyclic\n");
  CHECK(doc.experiment.base.in_group_rate == 0.85);
  CHECK(doc.experiment.base.groups == 3);
  CHECK(doc.experiment.base.n == 600);
  const auto c = single_run_config(doc);
  REQUIRE(c.adopters.size() == 2);
  CHECK(c.adopters[0].group == 1);
}

TEST_CASE("overrides layer on top of the preset") {
  const auto doc = parse_config_text(
      "experiment: fig6\n"
      "seed: 99\n"
      "repetitions: 4\n"
      "population:\n  steps: 20\n"
      "sweep:\n  - path: in_group_rate\n    values: [0.1, 0.2, 0.3]\n"
      "outputs: [median_skill, strips]\n");
  CHECK(doc.experiment.master_seed == 99);
  CHECK(doc.experiment.repetitions == 4);
  CHECK(doc.experiment.base.steps == 20);
  CHECK(doc.experiment.base.groups == 3);
  CHECK(sweep_size(doc.experiment) == 3);
  CHECK(doc.experiment.outputs.size() == 2);
}

TEST_CASE("string sweep values and explicit adopters") {
  const auto doc = parse_config_text(
      "adopters:\n  - {group: 0, strategy: substitute, fraction: 0.2}\n"
      "sweep:\n  - path: adopters[0].strategy\n    values: [complement, substitute]\n");
  REQUIRE(doc.experiment.axes.size() == 1);
  CHECK(std::get<std::string>(doc.experiment.axes[0].values[0]) == "complement");
  CHECK(doc.experiment.base.adopters[0].fraction == 0.2);
}

TEST_CASE("unknown keys and bad types are errors") {
  CHECK(config_error("population:\n  foo: 1\n").find("population.foo: unknown key (line 2, column 3)") !=
        std::string::npos);
  CHECK(config_error("colour: red\n").find("unknown key") != std::string::npos);
  CHECK(config_error("population:\n  n: many\n").find("population.n") != std::string::npos);
  CHECK(config_error("population:\n  n: -5\n").find("population.n") != std::string::npos);
  CHECK(config_error("experiment: fig9\n").find("unknown preset") != std::string::npos);
  CHECK(config_error("mode: fast\n").find("mode") != std::string::npos);
  CHECK(config_error("outputs: [pictures]\n").find("outputs[0]") != std::string::npos);
  CHECK(config_error("adopters:\n  - {group: 0, strategy: both}\n").find("adopters[0].strategy") !=
        std::string::npos);
  CHECK(config_error("sweep:\n  - path: bogus\n    values: [1]\n").find("bogus") != std::string::npos);
  CHECK(config_error("threshold:\n  in_group_rates: [0.5]\n").find("threshold.in_group_rates") !=
        std::string::npos);
  CHECK(config_error("replicator:\n  starts: [[0.5, 0.5, 0.5]]\n").find("replicator.starts[0]") !=
        std::string::npos);
  CHECK(config_error("replicator:\n  grid: 1\n").find("replicator.grid") != std::string::npos);
  CHECK(config_error("heatmap:\n  d_alpha: [0, 0.5]\n").find("heatmap.d_alpha") != std::string::npos);
}

TEST_CASE("malformed YAML reports line and column") {
  try {
    parse_config_text("population:\n  n: [1,\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("missing files are config errors") {
  CHECK_THROWS_AS(parse_config("/nonexistent/ccesim.yaml"), ConfigError);
}

TEST_CASE("files round-trip through the parser") {
  const auto path = std::filesystem::temp_directory_path() / "ccesim_test_config.yaml";
  {
    std::ofstream out(path);
    out << "experiment: supp2\nseed: 3\n";
  }
  const auto doc = parse_config(path);
  std::filesystem::remove(path);
  CHECK(doc.experiment.base.groups == 10);
  CHECK(doc.experiment.base.equal_sizes);
  CHECK(doc.experiment.repetitions == 50);

  const auto json = to_json(doc);
  CHECK(json["population"]["groups"] == 10);
  CHECK(json["seed"] == 3);
  CHECK(json["experiment"] == "supp2");
}
