#include "ccesim/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccesim/error.hpp"

namespace ccesim {

void validate(const PopulationConfig& c) {
  if (c.n < 2) throw ConfigError("population.n", "must be >= 2");
  if (c.n > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("population.n", "must fit in 32 bits");
  if (c.groups < 1) throw ConfigError("population.groups", "must be >= 1");
  if (c.groups > c.n) throw ConfigError("population.groups", "must be <= n");
  try {
    validate(c.base);
  } catch (const ConfigError& e) {
    throw ConfigError("population." + e.field(), "must be > 0");
  }
  validate(c.effects, c.allow_unordered_effects);
  if (!(c.delta > 0.0) || !std::isfinite(c.delta))
    throw ConfigError("population.delta", "must be > 0");
  if (!(c.in_group_rate >= 0.0 && c.in_group_rate <= 1.0))
    throw ConfigError("population.in_group_rate", "must be in [0, 1]");

  std::vector<double> totals(c.groups, 0.0);
  for (std::size_t i = 0; i < c.adopters.size(); ++i) {
    const AdopterSeed& a = c.adopters[i];
    const std::string field = "adopters[" + std::to_string(i) + "]";
    if (a.group >= c.groups) throw ConfigError(field + ".group", "must be < groups");
    if (!(a.fraction >= 0.0 && a.fraction <= 1.0))
      throw ConfigError(field + ".fraction", "must be in [0, 1]");
    totals[a.group] += a.fraction;
    if (totals[a.group] > 1.0 + 1e-12)
      throw ConfigError(field + ".fraction", "adopter fractions in a group must sum to <= 1");
  }
}

GroupIndex::GroupIndex(std::span<const Agent> agents, std::size_t groups)
    : members_(groups), outsiders_(groups), position_(agents.size()) {
  for (std::uint32_t i = 0; i < agents.size(); ++i) {
    auto& list = members_[agents[i].group];
    position_[i] = static_cast<std::uint32_t>(list.size());
    list.push_back(i);
  }
  if (groups == 1) return;
  for (std::size_t g = 0; g < groups; ++g) {
    outsiders_[g].reserve(agents.size() - members_[g].size());
    for (std::uint32_t i = 0; i < agents.size(); ++i)
      if (agents[i].group != g) outsiders_[g].push_back(i);
  }
}

PopulationState init_population(const PopulationConfig& config) {
  validate(config);

  PopulationState state;
  state.rng = Rng(config.seed);
  state.agents.resize(config.n);

  const std::size_t m = config.groups;
  if (m > 1) {
    if (config.equal_sizes) {
      // First n % m groups get one extra agent.
      const std::size_t base = config.n / m;
      const std::size_t extra = config.n % m;
      std::size_t i = 0;
      for (std::size_t g = 0; g < m; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) state.agents[i++].group = static_cast<std::uint32_t>(g);
      }
    } else {
      for (Agent& a : state.agents) a.group = static_cast<std::uint32_t>(state.rng.index(m));
    }
  }
  state.index = GroupIndex(state.agents, m);

  std::vector<std::size_t> cursor(m, 0);
  for (const AdopterSeed& seed : config.adopters) {
    const auto members = state.index.members(seed.group);
    if (members.empty() || seed.fraction <= 0.0) continue;
    auto count = static_cast<std::size_t>(
        std::lround(seed.fraction * static_cast<double>(members.size())));
    count = std::max<std::size_t>(count, 1);
    count = std::min(count, members.size() - cursor[seed.group]);
    for (std::size_t k = 0; k < count; ++k)
      state.agents[members[cursor[seed.group]++]].strategy = seed.strategy;
  }
  return state;
}

void learning_phase(PopulationState& state, const StrategyTable& params) {
  auto& agents = state.agents;
  const std::size_t m = state.index.group_count();
  std::vector<double> model_skill(m, 0.0);
  for (std::size_t g = 0; g < m; ++g) {
    const auto members = state.index.members(g);
    if (members.empty()) continue;
    // Members are in index order, so strict > keeps the lowest index on ties.
    double best = agents[members.front()].skill;
    for (std::uint32_t i : members) best = std::max(best, agents[i].skill);
    model_skill[g] = best;
  }
  for (Agent& a : agents)
    a.skill = sample_learning_outcome(model_skill[a.group], params[index_of(a.strategy)], state.rng);
  ++state.step;
}

void adoption_phase(PopulationState& state, const PopulationConfig& config) {
  auto& agents = state.agents;
  const GroupIndex& index = state.index;
  Rng& rng = state.rng;
  const bool grouped = index.group_count() > 1;

  std::vector<StrategyId> before(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) before[i] = agents[i].strategy;

  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::uint32_t g = agents[i].group;
    const auto members = index.members(g);

    bool in_group = true;
    if (grouped) {
      in_group = rng.uniform() < config.in_group_rate;
      if (in_group && members.size() < 2) in_group = false;
      if (!in_group && index.outsiders(g).empty()) in_group = true;
    }

    std::uint32_t partner;
    if (in_group) {
      auto r = static_cast<std::uint32_t>(rng.index(members.size() - 1));
      if (r >= index.position(i)) ++r;
      partner = members[r];
    } else {
      const auto outsiders = index.outsiders(g);
      partner = outsiders[rng.index(outsiders.size())];
    }

    const double p = adoption_probability(agents[partner].skill, agents[i].skill, config.delta);
    if (rng.uniform() < p) agents[i].strategy = before[partner];
  }
}

double median_inplace(std::span<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

ScopeStats scope_stats(const std::vector<Agent>& agents, std::span<const std::uint32_t> ids,
                       std::vector<double>& scratch) {
  ScopeStats s;
  s.count = ids.size();
  if (ids.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.median_skill = s.mean_skill = s.max_skill = s.skill_var = nan;
    return s;
  }
  scratch.clear();
  std::array<std::size_t, kStrategyCount> counts{};
  double sum = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t i : ids) {
    const Agent& a = agents[i];
    scratch.push_back(a.skill);
    sum += a.skill;
    best = std::max(best, a.skill);
    ++counts[index_of(a.strategy)];
  }
  const double n = static_cast<double>(ids.size());
  s.mean_skill = sum / n;
  double ss = 0.0;
  for (double z : scratch) ss += (z - s.mean_skill) * (z - s.mean_skill);
  s.skill_var = ss / n;
  s.max_skill = best;
  s.median_skill = median_inplace(scratch);
  s.shares[0] = static_cast<double>(counts[0]) / n;
  s.shares[1] = static_cast<double>(counts[1]) / n;
  s.shares[2] = static_cast<double>(counts[2]) / n;
  return s;
}

}  // namespace

StepRecord summarize(const PopulationState& state) {
  StepRecord record;
  record.step = state.step;
  std::vector<double> scratch;
  scratch.reserve(state.agents.size());

  std::vector<std::uint32_t> all(state.agents.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  record.scopes.push_back(scope_stats(state.agents, all, scratch));
  if (state.index.group_count() > 1) {
    for (std::size_t g = 0; g < state.index.group_count(); ++g)
      record.scopes.push_back(scope_stats(state.agents, state.index.members(g), scratch));
  }
  return record;
}

void run(const PopulationConfig& config, const std::function<void(const StepRecord&)>& sink) {
  PopulationState state = init_population(config);
  const StrategyTable params = derive_strategy_table(config.base, config.effects);
  sink(summarize(state));
  for (std::size_t t = 0; t < config.steps; ++t) {
    learning_phase(state, params);
    adoption_phase(state, config);
    sink(summarize(state));
  }
}

std::vector<StepRecord> run(const PopulationConfig& config) {
  std::vector<StepRecord> records;
  records.reserve(config.steps + 1);
  run(config, [&](const StepRecord& r) { records.push_back(r); });
  return records;
}

}  // namespace ccesim
