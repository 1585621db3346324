#pragma once

#include <memory>
#include <vector>

#include "coopgrid/core/coalition.h"
#include "coopgrid/core/scenario.h"
#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/dispatch/modes.h"

namespace coopgrid::imputation {

/// Characteristic function of an N-player game with v(empty) = 0. Repeated
/// queries return identical values.
class CharacteristicOracle {
 public:
  virtual ~CharacteristicOracle() = default;
  virtual int num_players() const = 0;
  virtual double value(Coalition c) const = 0;
  /// Hint that these coalitions will be queried; may evaluate in parallel.
  virtual void prefetch(const std::vector<Coalition>& coalitions) const;
};

/// Explicit game given by v indexed by coalition mask.
class TableGame final : public CharacteristicOracle {
 public:
  TableGame(int n, std::vector<double> values);
  int num_players() const override { return n_; }
  double value(Coalition c) const override;

  /// Player 0 owns a left glove, players 1 and 2 right gloves.
  static TableGame glove();
  /// v(singleton) = 0, v(pair) = 1, v(N) = 3.
  static TableGame symmetric3();
  static TableGame additive(const std::vector<double>& w);

 private:
  int n_;
  std::vector<double> values_;
};

struct OracleOptions {
  int workers = 1;
  /// Attribution with data contributions zeroed for every proper coalition
  /// while the grand coalition keeps its joint value.
  bool electricity_only_attribution = false;
  dispatch::ValueCache* cache = nullptr;
};

class ScenarioOracle final : public CharacteristicOracle {
 public:
  ScenarioOracle(Scenario s, dispatch::DispatchMode mode, OracleOptions options = {});
  int num_players() const override { return scenario_.num_players(); }
  double value(Coalition c) const override;
  void prefetch(const std::vector<Coalition>& coalitions) const override;

  std::shared_ptr<const CoalitionValue> solved(Coalition c) const;
  const Scenario& scenario() const { return scenario_; }
  dispatch::DispatchMode mode() const { return mode_; }
  const OracleOptions& options() const { return options_; }

 private:
  const Scenario& scenario_for(Coalition c) const;
  Scenario scenario_;
  Scenario attribution_;
  dispatch::DispatchMode mode_;
  OracleOptions options_;
};

/// All 2^N values indexed by mask (N <= 20), prefetched first.
std::vector<double> value_table(const CharacteristicOracle& o);

}  // namespace coopgrid::imputation
