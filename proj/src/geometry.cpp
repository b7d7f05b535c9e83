#include "pfews/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pfews/error.hpp"

namespace pfews {

namespace {

double cubic(double x, double c) { return x - x * x * x / 3.0 + c; }

double polish(double x, double c) {
  for (int it = 0; it < 50; ++it) {
    const double f = cubic(x, c);
    const double df = 1.0 - x * x;
    if (std::abs(f) < 1e-15 || df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace

std::vector<double> critical_manifold_roots(double s, double d_a) {
  if (!(d_a >= 0.0)) throw DomainError("amplitude must be non-negative");
  // x^3 - 3x - 3c = 0, depressed cubic with p = -3, q = -3c.
  const double c = d_a * std::cos(s);
  const double arg = 1.5 * c;
  std::vector<double> roots;
  if (std::abs(arg) <= 1.0) {
    const double a = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(polish(2.0 * std::cos(a - 2.0 * std::numbers::pi * k / 3.0), c));
  } else {
    const double sign = arg > 0.0 ? 1.0 : -1.0;
    roots.push_back(polish(2.0 * sign * std::cosh(std::acosh(std::abs(arg)) / 3.0), c));
  }
  std::sort(roots.begin(), roots.end());

  // Near the fold two roots approach each other like sqrt of the distance
  // in c; Newton only converges linearly there, so merge the pair.
  std::vector<double> distinct;
  for (double r : roots) {
    if (!distinct.empty() && r - distinct.back() < 1e-6) {
      distinct.back() = 0.5 * (distinct.back() + r);
      continue;
    }
    distinct.push_back(r);
  }
  return distinct;
}

FoldInfo fold_info(double d_a) {
  if (!(d_a > 0.0)) throw DomainError("amplitude must be positive");
  FoldInfo info;
  info.exists = d_a >= kFoldValue;
  if (info.exists) info.static_phase_offset = -std::acos(std::min(1.0, kFoldValue / d_a));
  return info;
}

double fold_sweep_rate(double d_a, double omega) {
  if (!(d_a >= kFoldValue)) throw DomainError("no fold for amplitude below 2/3");
  const double inner = std::max(0.0, 1.0 - 4.0 / (9.0 * d_a * d_a));
  return d_a * omega * std::sqrt(inner);
}

double predicted_delay_phase(double d_a, double omega, double c) {
  if (!(d_a > kFoldValue)) throw DomainError("delay phase needs amplitude above 2/3");
  if (!(c > 0.0)) throw DomainError("prefactor must be positive");
  const double geom = d_a * std::sqrt(1.0 - 4.0 / (9.0 * d_a * d_a));
  return c * std::pow(omega, 2.0 / 3.0) * std::pow(geom, -1.0 / 3.0);
}

double hazard_window_width(double sigma, double beta) {
  if (!(beta > 0.0)) throw DomainError("hazard window needs a positive sweep rate");
  if (!(sigma >= 0.0)) throw DomainError("noise strength must be non-negative");
  return std::pow(sigma, 4.0 / 3.0) / beta;
}

FloquetEstimate floquet_multiplier(const SimConfig& config, std::size_t transient_periods,
                                   double tol, std::size_t max_periods) {
  const auto* constant = std::get_if<ConstantAmplitude>(&config.schedule);
  if (constant == nullptr) throw DomainError("Floquet multiplier needs a constant amplitude");
  if (!(constant->d_a > kFoldValue))
    throw DomainError("Floquet multiplier needs a jumping orbit (amplitude > 2/3)");
  if (!(config.dt > 0.0 && config.omega > 0.0)) throw DomainError("invalid grid");

  const double period = config.forcing_period();
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(period / config.dt)));
  const double h = period / static_cast<double>(steps);
  const double d_a = constant->d_a;

  double x = config.x0;
  for (std::size_t p = 0; p < max_periods; ++p) {
    const double start = x;
    double integral = 0.0;
    double prev_rate = 1.0 - x * x;
    for (std::size_t i = 0; i < steps; ++i) {
      // Phase restarts each period, so the grid is exactly periodic.
      const double t = static_cast<double>(i) * h;
      x += drift(x, t, d_a, config.omega) * h;
      if (!std::isfinite(x)) throw DivergenceError(p * steps + i + 1);
      const double rate = 1.0 - x * x;
      integral += 0.5 * h * (prev_rate + rate);
      prev_rate = rate;
    }
    const double residual = std::abs(x - start);
    if (p + 1 > transient_periods && residual < tol) {
      FloquetEstimate est;
      est.log_multiplier = integral;
      est.multiplier = std::exp(integral);
      est.periods_integrated = p + 1;
      est.transient_periods = transient_periods;
      est.periodicity_residual = residual;
      return est;
    }
  }
  throw ConvergenceError("periodic orbit not reached within the period budget");
}

std::optional<JumpTiming> jump_timing(double t_jump, double omega, double d_a) {
  if (!(d_a > kFoldValue)) return std::nullopt;
  const double pi = std::numbers::pi;
  const double m = std::round(omega * t_jump / pi);
  JumpTiming jt;
  jt.t_jump = t_jump;
  jt.t_star = m * pi / omega;
  jt.eta = std::fmod(std::abs(m), 2.0) == 0.0 ? 1 : -1;
  jt.t_fold = jt.t_star - std::acos(kFoldValue / d_a) / omega;
  jt.psi = omega * (jt.t_jump - jt.t_star);
  jt.theta = omega * (jt.t_fold - jt.t_star);
  jt.phi = omega * (jt.t_jump - jt.t_fold);
  return jt;
}

}  // namespace pfews
