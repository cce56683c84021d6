#include "ccesim/model.hpp"

#include <cmath>
#include <string>

#include "ccesim/error.hpp"

namespace ccesim {

std::string_view to_string(StrategyId s) noexcept {
  switch (s) {
    case StrategyId::NoAI: return "noai";
    case StrategyId::Complement: return "complement";
    case StrategyId::Substitute: return "substitute";
  }
  return "unknown";
}

std::optional<StrategyId> parse_strategy(std::string_view name) noexcept {
  for (StrategyId s : kAllStrategies) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

void validate(const BaseLearningParams& base) {
  if (!(base.alpha > 0.0) || !std::isfinite(base.alpha))
    throw ConfigError("alpha", "must be > 0");
  if (!(base.beta > 0.0) || !std::isfinite(base.beta))
    throw ConfigError("beta", "must be > 0");
}

namespace {

void check_unit(double v, const char* field) {
  if (!(v >= 0.0)) throw ConfigError(field, "must be >= 0");
  if (!(v < 1.0)) throw ConfigError(field, "must be < 1");
}

}  // namespace

void validate(const AIEffects& e, bool allow_unordered) {
  check_unit(e.r_alpha_c, "effects.r_alpha_c");
  check_unit(e.r_beta_c, "effects.r_beta_c");
  check_unit(e.r_alpha_s, "effects.r_alpha_s");
  check_unit(e.r_beta_s, "effects.r_beta_s");
  if (allow_unordered) return;
  if (!(e.r_alpha_s > e.r_alpha_c))
    throw ConfigError("effects.r_alpha_s",
                      "must be > r_alpha_c (set allow_unordered_effects to relax)");
  if (!(e.r_beta_s > e.r_beta_c))
    throw ConfigError("effects.r_beta_s",
                      "must be > r_beta_c (set allow_unordered_effects to relax)");
}

StrategyParams derive_strategy_params(const BaseLearningParams& base,
                                      const AIEffects& effects, StrategyId s) noexcept {
  switch (s) {
    case StrategyId::Complement:
      return {s, base.alpha * (1.0 - effects.r_alpha_c), base.beta * (1.0 - effects.r_beta_c)};
    case StrategyId::Substitute:
      return {s, base.alpha * (1.0 - effects.r_alpha_s), base.beta * (1.0 - effects.r_beta_s)};
    case StrategyId::NoAI:
      break;
  }
  return {StrategyId::NoAI, base.alpha, base.beta};
}

StrategyTable derive_strategy_table(const BaseLearningParams& base,
                                    const AIEffects& effects) noexcept {
  StrategyTable table;
  for (StrategyId s : kAllStrategies)
    table[index_of(s)] = derive_strategy_params(base, effects, s);
  return table;
}

double adoption_probability(double z_k, double z_i, double delta) noexcept {
  const double t = delta * (z_k - z_i);
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double expected_growth_rate(const StrategyParams& p, std::size_t group_size) noexcept {
  return p.beta * (kEulerGamma + std::log(static_cast<double>(group_size))) - p.alpha;
}

}  // namespace ccesim
