#include "coopgrid/core/coalition.h"

#include "coopgrid/error.h"

namespace coopgrid {

Coalition Coalition::grand(int n) {
  if (n < 0 || n > kMaxPlayers) {
    throw Error(ErrorCode::kTooManyPlayers,
                "at most " + std::to_string(kMaxPlayers) + " players");
  }
  return Coalition(n == 0 ? 0 : (~std::uint64_t{0} >> (64 - n)));
}

Coalition Coalition::of(const std::vector<int>& members) {
  std::uint64_t m = 0;
  for (int i : members) {
    if (i < 0 || i >= kMaxPlayers) {
      throw Error(ErrorCode::kInvalidValue, "player index out of range");
    }
    m |= std::uint64_t{1} << i;
  }
  return Coalition(m);
}

std::vector<int> Coalition::members() const {
  std::vector<int> out;
  for (std::uint64_t m = mask_; m; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

std::string Coalition::to_string() const {
  std::string s = "{";
  bool first = true;
  for (int i : members()) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  }
  return s + "}";
}

std::vector<Coalition> enumerate_coalitions(int n, bool proper_only) {
  if (n < 0) throw Error(ErrorCode::kInvalidValue, "negative player count");
  if (n > kMaxEnumerablePlayers) {
    throw Error(ErrorCode::kTooManyPlayers,
                std::to_string(n) + " players exceed the enumeration cap of " +
                    std::to_string(kMaxEnumerablePlayers));
  }
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Coalition> out;
  out.reserve(count);
  for (std::uint64_t m = 0; m < count; ++m) {
    if (proper_only && (m == 0 || m == count - 1)) continue;
    out.emplace_back(m);
  }
  return out;
}

}  // namespace coopgrid
