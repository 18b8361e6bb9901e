// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace grassq {

/// SplitMix64 finalizer; used to derive statistically independent
/// sub-seeds from a parent seed and a stream index.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t sub_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Seed recorded on row `row` of a sweep run with `master`. Running that
/// sweep point alone with this value as the master seed reproduces the row.
constexpr std::uint64_t row_seed(std::uint64_t master, std::uint64_t row) noexcept {
  return master + row;
}

/// Seeded random stream. Single owner; parallel code derives one stream
/// per task with `sub_seed` instead of sharing an instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next_u64() { return engine_(); }

  /// Fresh stream for task `index`, keyed on the construction seed only,
  /// so the result does not depend on how much of this stream was consumed.
  Rng derive(std::uint64_t index) const { return Rng(sub_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace grassq
