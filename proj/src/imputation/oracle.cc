#include "coopgrid/imputation/oracle.h"

#include "coopgrid/error.h"

namespace coopgrid::imputation {

void CharacteristicOracle::prefetch(const std::vector<Coalition>&) const {}

TableGame::TableGame(int n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (n < 1 || n > kMaxEnumerablePlayers) {
    throw Error(ErrorCode::kTooManyPlayers, "table games hold 1..20 players");
  }
  if (values_.size() != (std::size_t{1} << n)) {
    throw Error(ErrorCode::kDimensionMismatch, "table game needs 2^n values");
  }
  values_[0] = 0.0;
}

double TableGame::value(Coalition c) const {
  if (c.mask() >= values_.size()) {
    throw Error(ErrorCode::kInvalidValue, "coalition outside the game");
  }
  return values_[c.mask()];
}

TableGame TableGame::glove() {
  std::vector<double> v(8, 0.0);
  v[0b011] = v[0b101] = v[0b111] = 1.0;
  return TableGame(3, v);
}

TableGame TableGame::symmetric3() {
  std::vector<double> v(8, 0.0);
  v[0b011] = v[0b101] = v[0b110] = 1.0;
  v[0b111] = 3.0;
  return TableGame(3, v);
}

TableGame TableGame::additive(const std::vector<double>& w) {
  const int n = static_cast<int>(w.size());
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (std::size_t m = 0; m < v.size(); ++m) {
    for (int i = 0; i < n; ++i) {
      if ((m >> i) & 1) v[m] += w[i];
    }
  }
  return TableGame(n, v);
}

ScenarioOracle::ScenarioOracle(Scenario s, dispatch::DispatchMode mode,
                               OracleOptions options)
    : scenario_(std::move(s)), mode_(mode), options_(options) {
  require_valid(scenario_);
  if (mode == dispatch::DispatchMode::kIsolated && scenario_.num_players() > 1) {
    throw Error(ErrorCode::kModeMismatch, "isolated mode has no coalition game");
  }
  attribution_ = scenario_;
  attribution_.contributions.terms.clear();
}

const Scenario& ScenarioOracle::scenario_for(Coalition c) const {
  const bool grand = c == Coalition::grand(num_players());
  return options_.electricity_only_attribution && !grand ? attribution_ : scenario_;
}

std::shared_ptr<const CoalitionValue> ScenarioOracle::solved(Coalition c) const {
  return dispatch::coalition_value(scenario_for(c), c, mode_, options_.cache);
}

double ScenarioOracle::value(Coalition c) const {
  if (c.empty()) return 0.0;
  return solved(c)->value;
}

void ScenarioOracle::prefetch(const std::vector<Coalition>& coalitions) const {
  if (!options_.electricity_only_attribution) {
    dispatch::prefetch_values(scenario_, coalitions, mode_, options_.workers,
                              options_.cache);
    return;
  }
  std::vector<Coalition> proper;
  const Coalition grand = Coalition::grand(num_players());
  for (Coalition c : coalitions) {
    if (c == grand) {
      dispatch::coalition_value(scenario_, c, mode_, options_.cache);
    } else {
      proper.push_back(c);
    }
  }
  dispatch::prefetch_values(attribution_, proper, mode_, options_.workers,
                            options_.cache);
}

std::vector<double> value_table(const CharacteristicOracle& o) {
  const auto all = enumerate_coalitions(o.num_players(), false);
  o.prefetch(all);
  std::vector<double> v(all.size());
  for (Coalition c : all) v[c.mask()] = o.value(c);
  return v;
}

}  // namespace coopgrid::imputation
