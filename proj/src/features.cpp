#include "pfews/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "pfews/error.hpp"

namespace pfews {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinResultant = 1e-12;

}  // namespace

void FeatureConfig::validate() const {
  if (!(p_buf >= 0.0 && p_buf < 0.5)) throw ConfigError("p_buf must lie in [0, 0.5)");
  if (detrend_degree < 0) throw ConfigError("detrend_degree must be non-negative");
  if (window_w < 2) throw ConfigError("window_w must be at least 2");
  if (window_min < 2 || window_min > window_w)
    throw ConfigError("window_min must lie in [2, window_w]");
  if (min_cycles < 2 || min_jumps < 2) throw ConfigError("slopes need at least two points");
}

double wrap_angle(double theta) {
  const double pi = std::numbers::pi;
  double r = std::fmod(theta + pi, kTwoPi);  // (-2pi, 2pi)
  if (r <= 0.0) r += kTwoPi;                 // (0, 2pi]
  return r - pi;
}

std::optional<std::vector<double>> detrend_segment(std::span<const double> samples,
                                                   const FeatureConfig& cfg) {
  const std::size_t n = samples.size();
  const auto buffer = static_cast<std::size_t>(std::floor(cfg.p_buf * static_cast<double>(n)));
  if (2 * buffer >= n) return std::nullopt;
  const std::size_t m = n - 2 * buffer;
  const auto cols = static_cast<std::size_t>(cfg.detrend_degree) + 1;
  if (m < cols + 1) return std::nullopt;

  // Abscissa mapped to [-1, 1] keeps the Vandermonde matrix well conditioned.
  const double half = 0.5 * static_cast<double>(m - 1);
  Eigen::MatrixXd design(m, cols);
  Eigen::VectorXd rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = half > 0.0 ? (static_cast<double>(i) - half) / half : 0.0;
    double p = 1.0;
    for (std::size_t c = 0; c < cols; ++c) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = p;
      p *= u;
    }
    rhs(static_cast<Eigen::Index>(i)) = samples[buffer + i];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd fit = design * coef;

  std::vector<double> residual(m);
  for (std::size_t i = 0; i < m; ++i)
    residual[i] = rhs(static_cast<Eigen::Index>(i)) - fit(static_cast<Eigen::Index>(i));
  return residual;
}

double sample_variance(std::span<const double> y) {
  if (y.size() < 2) throw DomainError("variance needs at least two samples");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(y.size() - 1);
}

std::optional<double> lag1_autocorrelation(std::span<const double> y) {
  if (y.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - mean;
    den += d * d;
    if (i + 1 < y.size()) num += d * (y[i + 1] - mean);
  }
  if (den == 0.0) return std::nullopt;
  return std::clamp(num / den, -1.0, 1.0);
}

std::vector<CycleStats> cycle_stats(const SegmentSet& segments, const Trajectory& trajectory,
                                    const FeatureConfig& cfg) {
  std::vector<CycleStats> out;
  const std::span<const double> x(trajectory.x);
  for (std::size_t n = 0; n + 1 < segments.segments.size(); n += 2) {
    const Segment& a = segments.segments[n];
    const Segment& b = segments.segments[n + 1];
    auto ra = detrend_segment(x.subspan(a.begin, a.length()), cfg);
    auto rb = detrend_segment(x.subspan(b.begin, b.length()), cfg);
    if (!ra || !rb) continue;
    std::vector<double> joined = std::move(*ra);
    joined.insert(joined.end(), rb->begin(), rb->end());
    const auto ac1 = lag1_autocorrelation(joined);
    if (!ac1) continue;
    CycleStats cs;
    cs.cycle_index = n / 2;
    cs.var = sample_variance(joined);
    cs.ac1 = *ac1;
    cs.sample_count = joined.size();
    cs.t_begin = trajectory.t[a.begin];
    cs.t_end = trajectory.t[b.end];
    out.push_back(cs);
  }
  return out;
}

double ols_slope(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("OLS slope needs at least two values");
  const double x_mean = 0.5 * static_cast<double>(n - 1);
  double y_mean = 0.0;
  for (double v : values) y_mean += v;
  y_mean /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (values[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

PhaseSeries jump_phases(const SegmentSet& segments, double omega) {
  const double pi = std::numbers::pi;
  PhaseSeries out;
  for (std::size_t k = 0; k < segments.jump_times.size(); ++k) {
    const double t = segments.jump_times[k];
    double phi = std::fmod(omega * t, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    const double to_max = std::abs(wrap_angle(phi));
    const double to_min = std::abs(wrap_angle(phi - pi));
    double extremum;
    if (to_max < to_min) {
      extremum = 0.0;
    } else if (to_min < to_max) {
      extremum = pi;
    } else {
      extremum = phi < pi ? 0.0 : pi;
    }
    out.jump_index.push_back(k);
    out.time.push_back(t);
    out.phi.push_back(phi);
    out.delta.push_back(wrap_angle(phi - extremum));
  }
  return out;
}

double mean_resultant_length(std::span<const double> deltas) {
  if (deltas.empty()) throw DomainError("empty phase window");
  double c = 0.0;
  double s = 0.0;
  for (double d : deltas) {
    c += std::cos(d);
    s += std::sin(d);
  }
  const double n = static_cast<double>(deltas.size());
  return std::hypot(c / n, s / n);
}

double circular_mean(std::span<const double> deltas) {
  if (deltas.empty()) throw DomainError("empty phase window");
  double c = 0.0;
  double s = 0.0;
  for (double d : deltas) {
    c += std::cos(d);
    s += std::sin(d);
  }
  return std::atan2(s, c);
}

double circular_std(std::span<const double> deltas) {
  if (deltas.empty()) throw DomainError("empty phase window");
  // 1 - R^2 evaluated about the mean direction, so tightly clustered phases
  // (R near 1) keep full relative precision.
  const double m = circular_mean(deltas);
  const double n = static_cast<double>(deltas.size());
  double u = 0.0;
  double s = 0.0;
  for (double d : deltas) {
    const double h = std::sin(0.5 * (d - m));
    u += h * h;
    s += std::sin(d - m);
  }
  u *= 2.0 / n;
  s /= n;
  const double one_minus_r2 = std::clamp(u * (2.0 - u) - s * s, 0.0, 1.0);
  return std::sqrt(std::min(-std::log1p(-one_minus_r2), -2.0 * std::log(kMinResultant)));
}

std::vector<double> rolling_circ_std(std::span<const double> deltas, std::size_t window,
                                     std::size_t min_periods) {
  std::vector<double> out;
  if (window == 0) return out;
  const std::size_t first = min_periods == 0 ? window : std::clamp<std::size_t>(min_periods, 1, window);
  for (std::size_t end = first; end <= deltas.size(); ++end) {
    const std::size_t begin = end > window ? end - window : 0;
    out.push_back(circular_std(deltas.subspan(begin, end - begin)));
  }
  return out;
}

FeatureVector extract_features(const Trajectory& trajectory, const SegmentSet& segments,
                               const FeatureConfig& cfg, double omega) {
  FeatureVector fv;
  fv.label = segments.breakdown.has_value();

  const auto cycles = cycle_stats(segments, trajectory, cfg);
  if (cycles.size() < cfg.min_cycles) {
    fv.exclusion = Exclusion::TooFewCycles;
    return fv;
  }
  PhaseSeries phases = jump_phases(segments, omega);
  phases.rolling_circ_std = rolling_circ_std(phases.delta, cfg.window_w, cfg.window_min);
  if (phases.size() < cfg.min_jumps || phases.rolling_circ_std.size() < cfg.min_jumps) {
    fv.exclusion = Exclusion::TooFewJumps;
    return fv;
  }

  std::vector<double> var(cycles.size());
  std::vector<double> ac1(cycles.size());
  std::transform(cycles.begin(), cycles.end(), var.begin(), [](const auto& c) { return c.var; });
  std::transform(cycles.begin(), cycles.end(), ac1.begin(), [](const auto& c) { return c.ac1; });

  fv.slope_var = ols_slope(var);
  fv.slope_ac1 = ols_slope(ac1);
  fv.slope_jump_phase = ols_slope(phases.delta);
  fv.slope_phase_std = ols_slope(phases.rolling_circ_std);
  fv.valid = std::isfinite(fv.slope_var) && std::isfinite(fv.slope_ac1) &&
             std::isfinite(fv.slope_jump_phase) && std::isfinite(fv.slope_phase_std);
  return fv;
}

}  // namespace pfews
