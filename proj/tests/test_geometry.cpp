#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pfews/error.hpp"
#include "pfews/geometry.hpp"
#include "pfews/rng.hpp"
#include "support.hpp"

using namespace pfews;
using std::numbers::pi;

namespace {

double manifold(double x, double s, double d_a) { return x - x * x * x / 3.0 + d_a * std::cos(s); }

// Sign-change bracketing on a fine grid, then bisection.
std::vector<double> bisection_roots(double s, double d_a) {
  std::vector<double> out;
  const double lo = -4.0, hi = 4.0;
  const int n = 80000;
  for (int i = 0; i < n; ++i) {
    double a = lo + (hi - lo) * i / n;
    double b = lo + (hi - lo) * (i + 1) / n;
    double fa = manifold(a, s, d_a), fb = manifold(b, s, d_a);
    if (fa == 0.0) {
      out.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      const double fm = manifold(m, s, d_a);
      if ((fa < 0.0) == (fm < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

SimConfig orbit_config(double d_a, double omega) {
  SimConfig c;
  c.sigma = 0.0;
  c.omega = omega;
  c.schedule = ConstantAmplitude{d_a};
  return c;
}

// Independent one-period Euler map for the finite-difference oracle.
double period_map(double x, double d_a, double omega, std::size_t steps) {
  const double h = 2.0 * pi / omega / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    x += h * (x - x * x * x / 3.0 + d_a * std::cos(omega * t));
  }
  return x;
}

}  // namespace

TEST_CASE("critical manifold roots") {
  const auto r = critical_manifold_roots(pi / 2, 0.9);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-14));
  CHECK(std::abs(r[1]) < 1e-14);
  CHECK(r[2] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

  // Fold tangency: double root at -1 and a simple root at 2.
  const auto fold = critical_manifold_roots(0.0, 2.0 / 3.0);
  REQUIRE(fold.size() == 2);
  CHECK(fold[0] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(fold[1] == doctest::Approx(2.0).epsilon(1e-12));

  const auto single = critical_manifold_roots(0.0, 1.2);
  const auto oracle = bisection_roots(0.0, 1.2);
  REQUIRE(single.size() == 1);
  REQUIRE(oracle.size() == 1);
  CHECK(single[0] == doctest::Approx(oracle[0]).epsilon(1e-12));
}

TEST_CASE("critical manifold roots match bisection on random phases") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double s = rng.uniform(0.0, 2.0 * pi);
    const double d = rng.uniform(0.0, 2.0);
    const auto roots = critical_manifold_roots(s, d);
    REQUIRE(!roots.empty());
    CHECK(roots.size() <= 3);
    CHECK(std::is_sorted(roots.begin(), roots.end()));
    for (double x : roots) CHECK(std::abs(manifold(x, s, d)) < 1e-10);
    const auto oracle = bisection_roots(s, d);
    // Skip the measure-zero near-tangent cases where the grid can miss a pair.
    if (std::abs(std::abs(d * std::cos(s)) - 2.0 / 3.0) > 1e-3) {
      REQUIRE(oracle.size() == roots.size());
      for (std::size_t i = 0; i < roots.size(); ++i) CHECK(std::abs(roots[i] - oracle[i]) < 1e-9);
    }
  }
}

TEST_CASE("root count: always three below the fold, one near the extrema above it") {
  for (double d : {0.1, 0.4, 0.66}) {
    for (int k = 0; k < 64; ++k) CHECK(critical_manifold_roots(2.0 * pi * k / 64, d).size() == 3);
  }
  for (double d : {0.7, 1.0, 1.2}) {
    // Open phase interval around s = 0 where |d cos s| > 2/3.
    const double edge = std::acos(2.0 / (3.0 * d));
    CHECK(critical_manifold_roots(0.0, d).size() == 1);
    CHECK(critical_manifold_roots(0.5 * edge, d).size() == 1);
    CHECK(critical_manifold_roots(pi - 0.5 * edge, d).size() == 1);
    CHECK(critical_manifold_roots(pi / 2, d).size() == 3);
  }
}

TEST_CASE("fold info and static phase offset") {
  CHECK_FALSE(fold_info(0.5).exists);
  CHECK_FALSE(fold_info(0.5).static_phase_offset.has_value());
  const auto at_fold = fold_info(2.0 / 3.0);
  CHECK(at_fold.exists);
  CHECK(std::abs(*at_fold.static_phase_offset) < 1e-7);
  CHECK(*fold_info(1e9).static_phase_offset == doctest::Approx(-pi / 2).epsilon(1e-8));
  CHECK(*fold_info(1.0).static_phase_offset == doctest::Approx(-0.84107).epsilon(1e-5));

  double prev = -pi;
  for (double d = 3.0; d > 2.0 / 3.0 + 1e-3; d -= 0.01) {
    const double off = *fold_info(d).static_phase_offset;
    CHECK(off > prev);
    CHECK(off <= 0.0);
    prev = off;
  }
}

TEST_CASE("fold sweep rate") {
  const double w = 2 * pi / 225;
  CHECK(fold_sweep_rate(2.0 / 3.0, w) == 0.0);
  CHECK(fold_sweep_rate(1.0, w) == doctest::Approx(0.020814).epsilon(1e-4));
  CHECK(fold_sweep_rate(1.2, w) > fold_sweep_rate(0.8, w));
  CHECK_THROWS_AS(fold_sweep_rate(0.6, w), DomainError);
}

TEST_CASE("predicted delay and hazard window scaling") {
  const double w = 2 * pi / 225;
  CHECK(predicted_delay_phase(1.0, w / 2) / predicted_delay_phase(1.0, w) ==
        doctest::Approx(std::pow(2.0, -2.0 / 3.0)).epsilon(1e-12));
  // Diverges toward the fold, but only as (D - 2/3)^(-1/6).
  CHECK(predicted_delay_phase(2.0 / 3.0 + 1e-9, w) > 2 * predicted_delay_phase(1.0, w));
  CHECK(predicted_delay_phase(2.0 / 3.0 + 1e-9, w) > predicted_delay_phase(2.0 / 3.0 + 1e-6, w));
  CHECK_THROWS_AS(predicted_delay_phase(2.0 / 3.0, w), DomainError);
  CHECK(predicted_delay_phase(1.0, w, 2.5) == doctest::Approx(2.5 * predicted_delay_phase(1.0, w)));

  CHECK(hazard_window_width(0.0, 0.02) == 0.0);
  CHECK(hazard_window_width(0.6, 0.02) / hazard_window_width(0.3, 0.02) ==
        doctest::Approx(std::pow(2.0, 4.0 / 3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hazard_window_width(0.3, 0.0), DomainError);
}

TEST_CASE("Floquet multiplier at the reference forcing is tiny and positive") {
  const auto est = floquet_multiplier(orbit_config(1.2, 2 * pi / 225));
  CHECK(est.log_multiplier < -20.0);
  CHECK(est.multiplier >= 0.0);
  CHECK(est.periodicity_residual < 1e-6);
  CHECK(est.periods_integrated > est.transient_periods);
  CHECK_THROWS_AS(floquet_multiplier(orbit_config(0.5, 2 * pi / 225)), DomainError);
}

TEST_CASE("Floquet multiplier matches a finite-difference return-map derivative") {
  for (double period : {5.0, 8.0}) {
    const double w = 2 * pi / period;
    const auto steps = static_cast<std::size_t>(std::round(period / 0.01));
    double x = 1.0;
    for (int i = 0; i < 100; ++i) x = period_map(x, 1.2, w, steps);
    const double eps = 1e-4;
    const double slope =
        (period_map(x + eps, 1.2, w, steps) - period_map(x - eps, 1.2, w, steps)) / (2 * eps);
    REQUIRE(slope > 0.0);
    const auto est = floquet_multiplier(orbit_config(1.2, w));
    // Euler product vs. trapezoidal exponent differ at O(dt).
    CHECK(std::abs(est.log_multiplier - std::log(slope)) < 0.02 * std::abs(std::log(slope)));
  }
}

TEST_CASE("jump timing decomposition identity") {
  Rng rng(3);
  const double w = 2 * pi / 225;
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(0.0, 2500.0);
    const double d = rng.uniform(0.7, 1.5);
    const auto jt = jump_timing(t, w, d);
    REQUIRE(jt.has_value());
    CHECK(std::abs(jt->psi - (jt->theta + jt->phi)) < 1e-10);
    CHECK(jt->theta == doctest::Approx(*fold_info(d).static_phase_offset).epsilon(1e-12));
    CHECK(std::abs(jt->psi) <= pi / 2 + 1e-9);
  }
  CHECK_FALSE(jump_timing(10.0, w, 0.6).has_value());
}
