#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pfews/sim.hpp"

namespace pfews {

/// Static fold value of the forcing: the cubic x - x^3/3 + c has a double
/// root exactly when |c| = 2/3.
inline constexpr double kFoldValue = 2.0 / 3.0;

struct FoldInfo {
  bool exists = false;
  double fold_forcing_value = kFoldValue;
  /// -arccos(2 / (3 d_a)) in (-pi, 0]; set only when the fold exists.
  std::optional<double> static_phase_offset;
};

struct FloquetEstimate {
  double multiplier = 0.0;
  /// log of the multiplier, kept separately because the multiplier itself
  /// underflows for slow forcing.
  double log_multiplier = 0.0;
  std::size_t periods_integrated = 0;
  std::size_t transient_periods = 0;
  double periodicity_residual = 0.0;
};

/// Real roots of x - x^3/3 + d_a cos(s) = 0, ascending, double roots merged.
std::vector<double> critical_manifold_roots(double s, double d_a);

FoldInfo fold_info(double d_a);

/// Rate at which the forcing crosses the fold value, d_a omega sqrt(1 - 4/(9 d_a^2)).
/// Throws DomainError for d_a < 2/3.
double fold_sweep_rate(double d_a, double omega);

/// Slow-passage delay phase C omega^(2/3) (d_a sqrt(1 - 4/(9 d_a^2)))^(-1/3).
/// Throws DomainError unless d_a > 2/3 and c > 0.
double predicted_delay_phase(double d_a, double omega, double c = 1.0);

/// Width sigma^(4/3) / beta of the window in which noise-induced escape near
/// the fold is likely (unit prefactor). Throws DomainError unless beta > 0.
double hazard_window_width(double sigma, double beta);

/// Multiplier exp(int_0^T (1 - x^2) dt) of the deterministic periodic orbit.
///
/// Integrates with sigma forced to 0 on a grid of round(T_f / dt) steps per
/// forcing period, skips `transient_periods`, then waits until consecutive
/// period-start states agree within `tol` and evaluates the integral over that
/// period by the trapezoidal rule. Requires a constant amplitude > 2/3.
/// Throws ConvergenceError if periodicity is not reached within max_periods.
FloquetEstimate floquet_multiplier(const SimConfig& config, std::size_t transient_periods = 5,
                                   double tol = 1e-6, std::size_t max_periods = 200);

/// Event-time decomposition of one jump relative to its nearest forcing
/// extremum t_star and the preceding fold crossing t_fold.
struct JumpTiming {
  double t_jump = 0.0;
  double t_star = 0.0;
  double t_fold = 0.0;
  /// +1 if t_star is a forcing maximum, -1 for a minimum.
  int eta = 1;
  /// omega (t_jump - t_star)
  double psi = 0.0;
  /// omega (t_fold - t_star), equal to -arccos(2 / (3 d_a)) up to rounding
  double theta = 0.0;
  /// omega (t_jump - t_fold)
  double phi = 0.0;
};

/// Returns nullopt when d_a <= 2/3 (no fold to refer to).
std::optional<JumpTiming> jump_timing(double t_jump, double omega, double d_a);

}  // namespace pfews
