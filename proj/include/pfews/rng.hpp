#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pfews {

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// 64-bit FNV-1a hash, used to turn stream labels into seed material.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Derives an independent child seed from (parent, label, index).
///
/// Every random stream in the pipeline (per-run noise, D_min draws, fold
/// splits, permutations) is keyed this way from the single master seed, so a
/// component can be re-run in isolation and ensembles do not depend on
/// execution order.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                          std::uint64_t index = 0) noexcept;

/// Deterministic random stream.
///
/// Uniforms take the top 53 bits of a std::mt19937_64 word; normals use the
/// polar-free Box-Muller transform with the second variate cached. Neither
/// step goes through std::*_distribution, whose algorithms are
/// implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal.
  double normal();

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pfews
