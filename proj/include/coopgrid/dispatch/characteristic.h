#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "coopgrid/core/schedule.h"
#include "coopgrid/dispatch/modes.h"

namespace coopgrid::dispatch {

/// Thread-safe memo of solved coalitions keyed by (scenario fingerprint,
/// coalition mask, mode). The first stored value wins, so repeated lookups
/// are bit-identical.
class ValueCache {
 public:
  using Key = std::tuple<std::uint64_t, std::uint64_t, int>;

  std::shared_ptr<const CoalitionValue> find(const Key& key) const;
  std::shared_ptr<const CoalitionValue> insert(const Key& key,
                                               std::shared_ptr<const CoalitionValue> v);
  std::size_t size() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const CoalitionValue>> values_;
};

ValueCache& global_value_cache();

/// Solved coalition through the cache (nullptr selects the global cache).
std::shared_ptr<const CoalitionValue> coalition_value(const Scenario& s, Coalition c,
                                                      DispatchMode mode,
                                                      ValueCache* cache = nullptr);

/// U(C) with v(empty) = 0.
double characteristic_value(const Scenario& s, Coalition c, DispatchMode mode,
                            ValueCache* cache = nullptr);

/// Solves the listed coalitions on up to `workers` threads. The first error
/// is rethrown after all threads finish.
void prefetch_values(const Scenario& s, const std::vector<Coalition>& coalitions,
                     DispatchMode mode, int workers, ValueCache* cache = nullptr);

}  // namespace coopgrid::dispatch
