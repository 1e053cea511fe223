// Copyright (C) 2026 The compact-cascade authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <random>

namespace compact {

/// Seeded random source whose output is identical on every platform.
/// std::mt19937_64 is fully specified by the standard; the distributions in
/// <random> are not, so the conversions live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with a stream index so independent consumers of one
/// `--seed` do not share sequences.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace compact
