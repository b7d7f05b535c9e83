#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <variant>
#include <vector>

#include "pfews/rng.hpp"

namespace pfews {

struct ConstantAmplitude {
  double d_a = 1.2;

  bool operator==(const ConstantAmplitude&) const = default;
};

/// D_a(t) = d_max - (d_max - d_min) * t / t_total.
struct LinearRamp {
  double d_max = 1.2;
  double d_min = 0.25;

  bool operator==(const LinearRamp&) const = default;
};

/// Level k holds on [k * level_duration, (k + 1) * level_duration); the last
/// level extends to the end of the horizon.
struct PiecewiseConstant {
  std::vector<double> levels;
  double level_duration = 0.0;

  bool operator==(const PiecewiseConstant&) const = default;
};

using AmplitudeSchedule = std::variant<ConstantAmplitude, LinearRamp, PiecewiseConstant>;

struct SimConfig {
  double dt = 0.01;
  double t_total = 2500.0;
  double omega = 2.0 * std::numbers::pi / 225.0;
  AmplitudeSchedule schedule = LinearRamp{};
  double sigma = 0.3;
  double x0 = 1.0;
  std::uint64_t master_seed = 20240601;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Number of Euler steps N; the grid has N + 1 points.
  std::size_t steps() const;

  double forcing_period() const { return 2.0 * std::numbers::pi / omega; }

  bool operator==(const SimConfig&) const = default;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> d_a;
  std::uint64_t seed = 0;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  /// Grid spacing, t[1] - t[0] reconstructed from the last point.
  double dt() const { return size() > 1 ? t.back() / static_cast<double>(size() - 1) : 0.0; }
};

/// Right-hand side x - x^3/3 + d_a cos(omega t).
inline double drift(double x, double t, double d_a, double omega) {
  return x - x * x * x / 3.0 + d_a * std::cos(omega * t);
}

/// Forcing amplitude at time t. Throws DomainError outside [0, t_total].
double amplitude_at(const AmplitudeSchedule& schedule, double t, double t_total);

/// Euler-Maruyama integration of dx = drift dt + sigma dW on t_n = n dt.
///
/// The amplitude is evaluated at the left endpoint of each step. Throws
/// DivergenceError if the state leaves |x| <= 1e6 or becomes non-finite.
Trajectory simulate(const SimConfig& config, std::uint64_t run_seed);

/// Distribution of the ramp end value D_min across an ensemble.
struct DMinSampler {
  enum class Kind { Uniform, Fixed };
  Kind kind = Kind::Uniform;
  double lo = 0.25;
  double hi = 0.9;

  static DMinSampler uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static DMinSampler fixed(double value) { return {Kind::Fixed, value, value}; }

  double draw(Rng& rng) const;
  void validate() const;

  bool operator==(const DMinSampler&) const = default;
};

/// Seed of run `index` in an ensemble keyed by `master_seed`.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index);

/// D_min for a run, drawn from a stream derived from its run seed.
double draw_d_min(const DMinSampler& sampler, std::uint64_t seed);

/// Copy of `base` with the ramp end replaced by d_min. Non-ramp schedules are
/// returned unchanged.
SimConfig with_ramp_end(const SimConfig& base, double d_min);

struct EnsembleMember {
  Trajectory trajectory;
  double d_min = 0.0;
};

/// Runs n_runs independent realizations; result i depends only on
/// (config, i). A DivergenceError from run i is rethrown with the run index.
std::vector<EnsembleMember> simulate_ensemble(const SimConfig& config, std::size_t n_runs,
                                              const DMinSampler& sampler, unsigned threads = 1);

}  // namespace pfews
