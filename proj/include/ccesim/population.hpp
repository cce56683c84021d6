#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ccesim/model.hpp"
#include "ccesim/rng.hpp"

namespace ccesim {

/// Initial seeding of an AI strategy into one group.
struct AdopterSeed {
  std::size_t group = 0;
  StrategyId strategy = StrategyId::Complement;
  double fraction = 0.1;

  bool operator==(const AdopterSeed&) const = default;
};

struct PopulationConfig {
  std::size_t n = 1000;
  std::size_t groups = 1;
  BaseLearningParams base{};
  AIEffects effects{0.2, 0.05, 0.5, 0.5};
  double delta = 10.0;
  std::size_t steps = 1000;
  /// Probability that an adoption partner is drawn from the agent's own
  /// group. Ignored when groups == 1.
  double in_group_rate = 1.0;
  std::vector<AdopterSeed> adopters{};
  std::uint64_t seed = 1;
  /// Partition agents into equal-sized contiguous groups instead of
  /// assigning each agent to a uniformly random group.
  bool equal_sizes = false;
  bool allow_unordered_effects = false;

  bool operator==(const PopulationConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const PopulationConfig& config);

struct Agent {
  double skill = 0.0;
  StrategyId strategy = StrategyId::NoAI;
  std::uint32_t group = 0;

  bool operator==(const Agent&) const = default;
};

/// Membership lists derived from agent groups. Fixed for the whole run.
class GroupIndex {
public:
  GroupIndex() = default;
  GroupIndex(std::span<const Agent> agents, std::size_t groups);

  std::size_t group_count() const noexcept { return members_.size(); }
  std::span<const std::uint32_t> members(std::size_t g) const { return members_[g]; }
  /// All agents outside group g, in index order.
  std::span<const std::uint32_t> outsiders(std::size_t g) const { return outsiders_[g]; }
  /// Position of agent i inside members(group of i).
  std::uint32_t position(std::size_t i) const { return position_[i]; }

  bool operator==(const GroupIndex&) const = default;

private:
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<std::vector<std::uint32_t>> outsiders_;
  std::vector<std::uint32_t> position_;
};

struct PopulationState {
  std::size_t step = 0;
  std::vector<Agent> agents;
  GroupIndex index;
  Rng rng{0};

  bool operator==(const PopulationState&) const = default;
};

PopulationState init_population(const PopulationConfig& config);

/// Every agent re-learns from the highest-skilled member of its own group
/// (ties broken by lowest agent index), using the pre-phase skills.
void learning_phase(PopulationState& state, const StrategyTable& params);

/// Every agent samples one partner (in-group with probability
/// `in_group_rate`) and copies its pre-phase strategy with the logistic
/// adoption probability.
void adoption_phase(PopulationState& state, const PopulationConfig& config);

/// Summary statistics over one scope (the whole population or one group).
struct ScopeStats {
  std::size_t count = 0;
  double median_skill = 0.0;
  double mean_skill = 0.0;
  double max_skill = 0.0;
  double skill_var = 0.0;  // population variance (divides by count)
  std::array<double, kStrategyCount> shares{};

  bool operator==(const ScopeStats&) const = default;
};

/// `scopes[0]` covers the whole population; when groups > 1, `scopes[1 + g]`
/// covers group g.
struct StepRecord {
  std::size_t step = 0;
  std::vector<ScopeStats> scopes;

  const ScopeStats& population() const { return scopes.front(); }
  bool operator==(const StepRecord&) const = default;
};

StepRecord summarize(const PopulationState& state);

/// init, then `steps` iterations of learning followed by adoption. Returns
/// steps + 1 records; the first describes the initial state.
std::vector<StepRecord> run(const PopulationConfig& config);

/// As run(), but hands each record to `sink` instead of collecting them.
void run(const PopulationConfig& config, const std::function<void(const StepRecord&)>& sink);

/// Median of a sample (mean of the middle pair for even sizes). Reorders `v`.
double median_inplace(std::span<double> v);

}  // namespace ccesim
