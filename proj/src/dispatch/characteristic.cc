#include "coopgrid/dispatch/characteristic.h"

#include <atomic>
#include <exception>
#include <thread>

#include "coopgrid/dispatch/robust.h"

namespace coopgrid::dispatch {

std::shared_ptr<const CoalitionValue> ValueCache::find(const Key& key) const {
  std::lock_guard lock(mu_);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : it->second;
}

std::shared_ptr<const CoalitionValue> ValueCache::insert(
    const Key& key, std::shared_ptr<const CoalitionValue> v) {
  std::lock_guard lock(mu_);
  return values_.emplace(key, std::move(v)).first->second;
}

std::size_t ValueCache::size() const {
  std::lock_guard lock(mu_);
  return values_.size();
}

void ValueCache::clear() {
  std::lock_guard lock(mu_);
  values_.clear();
}

ValueCache& global_value_cache() {
  static ValueCache cache;
  return cache;
}

std::shared_ptr<const CoalitionValue> coalition_value(const Scenario& s, Coalition c,
                                                      DispatchMode mode,
                                                      ValueCache* cache) {
  ValueCache& store = cache ? *cache : global_value_cache();
  const ValueCache::Key key{scenario_fingerprint(s), c.mask(), static_cast<int>(mode)};
  if (auto hit = store.find(key)) return hit;
  auto fresh = std::make_shared<const CoalitionValue>(solve_dispatch(s, c, mode));
  return store.insert(key, std::move(fresh));
}

double characteristic_value(const Scenario& s, Coalition c, DispatchMode mode,
                            ValueCache* cache) {
  if (c.empty()) return 0.0;
  return coalition_value(s, c, mode, cache)->value;
}

void prefetch_values(const Scenario& s, const std::vector<Coalition>& coalitions,
                     DispatchMode mode, int workers, ValueCache* cache) {
  const int k = std::max(1, std::min<int>(workers, coalitions.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < coalitions.size(); i = next++) {
      if (coalitions[i].empty()) continue;
      try {
        coalition_value(s, coalitions[i], mode, cache);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (k == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < k; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace coopgrid::dispatch
