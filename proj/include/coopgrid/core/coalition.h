#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace coopgrid {

inline constexpr int kMaxPlayers = 62;
inline constexpr int kMaxEnumerablePlayers = 20;

/// Membership bitset over prosumer indices 0..N-1 (bit i set iff i joined).
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint64_t mask) : mask_(mask) {}

  static Coalition grand(int n);
  static Coalition singleton(int i) { return Coalition(std::uint64_t{1} << i); }
  static Coalition of(const std::vector<int>& members);

  constexpr std::uint64_t mask() const { return mask_; }
  constexpr bool contains(int i) const { return (mask_ >> i) & 1u; }
  constexpr bool empty() const { return mask_ == 0; }
  int size() const { return std::popcount(mask_); }
  constexpr bool subset_of(Coalition other) const {
    return (mask_ & ~other.mask_) == 0;
  }
  constexpr bool disjoint(Coalition other) const {
    return (mask_ & other.mask_) == 0;
  }
  bool proper(int n) const { return !empty() && *this != grand(n); }

  Coalition with(int i) const { return Coalition(mask_ | (std::uint64_t{1} << i)); }
  Coalition without(int i) const {
    return Coalition(mask_ & ~(std::uint64_t{1} << i));
  }
  constexpr Coalition operator|(Coalition o) const { return Coalition(mask_ | o.mask_); }
  constexpr Coalition operator&(Coalition o) const { return Coalition(mask_ & o.mask_); }
  constexpr bool operator==(const Coalition&) const = default;
  constexpr auto operator<=>(const Coalition&) const = default;

  std::vector<int> members() const;
  /// "{0,2}" with zero-based indices.
  std::string to_string() const;

 private:
  std::uint64_t mask_ = 0;
};

/// All subsets of {0..n-1} (or the 2^n - 2 proper ones) in increasing mask
/// order. Throws TooManyPlayers above 20 players.
std::vector<Coalition> enumerate_coalitions(int n, bool proper_only);

}  // namespace coopgrid
