#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "ccesim/rng.hpp"

namespace ccesim {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// AI-use strategy. The numeric order is the serialization order.
enum class StrategyId : std::uint8_t { NoAI = 0, Complement = 1, Substitute = 2 };

inline constexpr std::size_t kStrategyCount = 3;
inline constexpr std::array<StrategyId, kStrategyCount> kAllStrategies{
    StrategyId::NoAI, StrategyId::Complement, StrategyId::Substitute};

constexpr std::size_t index_of(StrategyId s) noexcept {
  return static_cast<std::size_t>(s);
}

/// "noai", "complement", "substitute"
std::string_view to_string(StrategyId s) noexcept;
std::optional<StrategyId> parse_strategy(std::string_view name) noexcept;

/// Baseline learning error (alpha) and dispersion (beta), both > 0.
struct BaseLearningParams {
  double alpha = 1.0;
  double beta = 0.5;

  bool operator==(const BaseLearningParams&) const = default;
};

/// Proportional reductions of alpha and beta applied by each AI strategy.
/// All four lie in [0, 1).
struct AIEffects {
  double r_alpha_c = 0.0;
  double r_beta_c = 0.0;
  double r_alpha_s = 0.0;
  double r_beta_s = 0.0;

  bool operator==(const AIEffects&) const = default;
};

/// Effective Gumbel parameters for one strategy.
struct StrategyParams {
  StrategyId strategy = StrategyId::NoAI;
  double alpha = 1.0;
  double beta = 0.5;

  bool operator==(const StrategyParams&) const = default;
};

using StrategyTable = std::array<StrategyParams, kStrategyCount>;

/// Throws ConfigError naming "alpha"/"beta" when not strictly positive.
void validate(const BaseLearningParams& base);

/// Throws ConfigError when any reduction is outside [0, 1) or, unless
/// `allow_unordered`, when Substitute does not strictly exceed Complement on
/// both axes.
void validate(const AIEffects& effects, bool allow_unordered = false);

StrategyParams derive_strategy_params(const BaseLearningParams& base,
                                      const AIEffects& effects, StrategyId s) noexcept;

StrategyTable derive_strategy_table(const BaseLearningParams& base,
                                    const AIEffects& effects) noexcept;

/// One Gumbel(max) draw with mode `model_skill - alpha` and scale `beta`.
inline double sample_learning_outcome(double model_skill, const StrategyParams& params,
                                      Rng& rng) {
  const double u = rng.uniform_open();
  return model_skill - params.alpha - params.beta * std::log(-std::log(u));
}

/// Logistic payoff-biased copying probability 1 / (1 + exp(-delta (z_k - z_i))).
double adoption_probability(double z_k, double z_i, double delta) noexcept;

/// Analytic moments of the learning outcome around `model_skill`.
constexpr double expected_outcome(double model_skill, const StrategyParams& p) noexcept {
  return model_skill - p.alpha + kEulerGamma * p.beta;
}

/// Long-run per-step growth of a homogeneous group's best skill:
/// beta (gamma + ln n) - alpha.
double expected_growth_rate(const StrategyParams& p, std::size_t group_size) noexcept;

}  // namespace ccesim
