#include "pfews/sim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pfews/error.hpp"
#include "pfews/parallel.hpp"

namespace pfews {

namespace {

constexpr double kDivergenceBound = 1e6;

std::string describe_step(std::size_t step, std::optional<std::size_t> run) {
  std::string msg = "state diverged at step " + std::to_string(step);
  if (run) msg += " of run " + std::to_string(*run);
  return msg;
}

}  // namespace

DivergenceError::DivergenceError(std::size_t step, std::optional<std::size_t> run)
    : std::runtime_error(describe_step(step, run)), step_(step), run_(run) {}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(t_total > 0.0) || !std::isfinite(t_total)) throw ConfigError("t_total must be positive");
  const double ratio = t_total / dt;
  const double whole = std::round(ratio);
  if (whole < 1.0 || std::abs(ratio - whole) > 2.0 * std::numeric_limits<double>::epsilon() * whole)
    throw ConfigError("t_total must be a whole number of dt steps");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("omega must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be non-negative");
  if (!std::isfinite(x0)) throw ConfigError("x0 must be finite");

  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantAmplitude>) {
          if (!(s.d_a >= 0.0)) throw ConfigError("constant amplitude must be non-negative");
        } else if constexpr (std::is_same_v<S, LinearRamp>) {
          if (!(s.d_max >= s.d_min && s.d_min > 0.0))
            throw ConfigError("linear ramp requires d_max >= d_min > 0");
        } else {
          if (s.levels.empty()) throw ConfigError("piecewise schedule needs at least one level");
          if (!(s.level_duration > 0.0)) throw ConfigError("level duration must be positive");
          for (double l : s.levels)
            if (!(l >= 0.0)) throw ConfigError("piecewise levels must be non-negative");
        }
      },
      schedule);
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::llround(t_total / dt));
}

double amplitude_at(const AmplitudeSchedule& schedule, double t, double t_total) {
  // A relative slack absorbs n*dt landing one ulp past t_total.
  if (!(t >= 0.0) || t > t_total * (1.0 + 1e-12))
    throw DomainError("amplitude requested outside [0, t_total]");
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantAmplitude>) {
          return s.d_a;
        } else if constexpr (std::is_same_v<S, LinearRamp>) {
          return s.d_max - (s.d_max - s.d_min) * (t / t_total);
        } else {
          const auto k = static_cast<std::size_t>(std::floor(t / s.level_duration));
          return s.levels[std::min(k, s.levels.size() - 1)];
        }
      },
      schedule);
}

Trajectory simulate(const SimConfig& config, std::uint64_t run_seed) {
  config.validate();
  const std::size_t n = config.steps();
  const double dt = config.dt;
  const double noise_scale = config.sigma * std::sqrt(dt);

  Trajectory out;
  out.seed = run_seed;
  out.t.resize(n + 1);
  out.x.resize(n + 1);
  out.d_a.resize(n + 1);

  Rng rng(run_seed);
  double x = config.x0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) * dt;
    const double d_a = amplitude_at(config.schedule, t, config.t_total);
    out.t[i] = t;
    out.x[i] = x;
    out.d_a[i] = d_a;
    if (i == n) break;
    double next = x + drift(x, t, d_a, config.omega) * dt;
    if (noise_scale > 0.0) next += noise_scale * rng.normal();
    if (!std::isfinite(next) || std::abs(next) > kDivergenceBound) throw DivergenceError(i + 1);
    x = next;
  }
  return out;
}

double DMinSampler::draw(Rng& rng) const {
  return kind == Kind::Fixed ? lo : rng.uniform(lo, hi);
}

void DMinSampler::validate() const {
  if (!(lo > 0.0) || !std::isfinite(hi)) throw ConfigError("d_min distribution must be positive");
  if (kind == Kind::Uniform && !(hi > lo)) throw ConfigError("uniform d_min needs lo < hi");
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, "sim.run", index);
}

double draw_d_min(const DMinSampler& sampler, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "sim.d_min"));
  return sampler.draw(rng);
}

SimConfig with_ramp_end(const SimConfig& base, double d_min) {
  SimConfig cfg = base;
  if (auto* ramp = std::get_if<LinearRamp>(&cfg.schedule)) ramp->d_min = d_min;
  return cfg;
}

std::vector<EnsembleMember> simulate_ensemble(const SimConfig& config, std::size_t n_runs,
                                              const DMinSampler& sampler, unsigned threads) {
  if (n_runs < 1) throw DomainError("ensemble needs at least one run");
  config.validate();
  sampler.validate();
  return parallel_map(n_runs, threads, [&](std::size_t i) {
    const std::uint64_t seed = run_seed(config.master_seed, i);
    EnsembleMember m;
    m.d_min = draw_d_min(sampler, seed);
    try {
      m.trajectory = simulate(with_ramp_end(config, m.d_min), seed);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.step(), i);
    }
    return m;
  });
}

}  // namespace pfews
