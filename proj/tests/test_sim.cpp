#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "pfews/error.hpp"
#include "pfews/rng.hpp"
#include "pfews/sim.hpp"
#include "support.hpp"

using namespace pfews;

namespace {

SimConfig deterministic(double d_a, double t_total, double dt = 0.01) {
  SimConfig c;
  c.dt = dt;
  c.t_total = t_total;
  c.sigma = 0.0;
  c.schedule = ConstantAmplitude{d_a};
  return c;
}

}  // namespace

TEST_CASE("seed derivation separates labels and indices") {
  std::set<std::uint64_t> seen;
  for (const char* label : {"sim.run", "sim.d_min", "cv.fold", "svm"})
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(7, label, i));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, "sim.run", 3) == derive_seed(7, "sim.run", 3));
  CHECK(derive_seed(7, "sim.run", 3) != derive_seed(8, "sim.run", 3));
}

TEST_CASE("rng streams are reproducible and well scaled") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.01);

  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(rng.below(7) < 7);
  }
}

TEST_CASE("drift") {
  CHECK(drift(0.0, 0.0, 1.2, 0.3) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(std::abs(drift(std::sqrt(3.0), 5.0, 0.0, 0.3)) < 1e-15);
  CHECK(drift(1.0, 0.0, 1.2, 2.0) == doctest::Approx(28.0 / 15.0).epsilon(1e-15));
}

TEST_CASE("amplitude schedules") {
  const LinearRamp ramp{1.2, 0.25};
  CHECK(amplitude_at(ramp, 0.0, 2500.0) == 1.2);
  CHECK(amplitude_at(ramp, 2500.0, 2500.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(amplitude_at(LinearRamp{1.2, 0.4}, 1250.0, 2500.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(amplitude_at(ConstantAmplitude{0.7}, 3.0, 10.0) == 0.7);

  const PiecewiseConstant pw{{1.0, 0.9, 0.8}, 10.0};
  CHECK(amplitude_at(pw, 0.0, 30.0) == 1.0);
  CHECK(amplitude_at(pw, 9.999, 30.0) == 1.0);
  CHECK(amplitude_at(pw, 10.0, 30.0) == 0.9);  // right-open intervals
  CHECK(amplitude_at(pw, 30.0, 30.0) == 0.8);

  CHECK_THROWS_AS(amplitude_at(ramp, -0.1, 2500.0), DomainError);
  CHECK_THROWS_AS(amplitude_at(ramp, 2600.0, 2500.0), DomainError);
}

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 250000);

  SimConfig bad = c;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.t_total = 1.005;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.schedule = LinearRamp{0.5, 0.9};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("grid length and endpoints") {
  SimConfig c = deterministic(1.2, 3.0);
  const auto tr = simulate(c, 0);
  CHECK(tr.size() == 301);
  CHECK(tr.t.front() == 0.0);
  CHECK(tr.t[137] == 137 * 0.01);
  CHECK(tr.x.front() == 1.0);
}

TEST_CASE("unforced deterministic path settles on sqrt(3)") {
  auto c = deterministic(0.0, 30.0);
  const auto tr = simulate(c, 0);
  CHECK(std::abs(tr.x.back() - std::sqrt(3.0)) < 1e-6);
}

TEST_CASE("identical seed gives a bit-identical path") {
  SimConfig c;
  c.t_total = 50.0;
  const auto a = simulate(c, 99);
  const auto b = simulate(c, 99);
  CHECK(a.x == b.x);
  CHECK(a.d_a == b.d_a);
  CHECK(simulate(c, 100).x != a.x);
}

TEST_CASE("Euler step halving changes each step by less than 1e-3") {
  // Richardson self-consistency, per step: from every coarse grid state, one
  // dt step against two dt/2 steps over one forcing period.
  const double period = 225.0;
  const auto c = deterministic(1.2, period, 0.01);
  const auto coarse = simulate(c, 0);
  const double h = c.dt / 2;
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
    const double t = coarse.t[i];
    const double x = coarse.x[i];
    const double mid = x + h * drift(x, t, 1.2, c.omega);
    const double two = mid + h * drift(mid, t + h, 1.2, c.omega);
    CHECK(coarse.x[i + 1] == x + c.dt * drift(x, t, 1.2, c.omega));
    sup = std::max(sup, std::abs(coarse.x[i + 1] - two));
  }
  CHECK(sup < 1e-3);
}

TEST_CASE("global error over one period is first order in dt") {
  const double period = 225.0;
  const auto a = simulate(deterministic(1.2, period, 0.02), 0);
  const auto b = simulate(deterministic(1.2, period, 0.01), 0);
  const auto c = simulate(deterministic(1.2, period, 0.005), 0);
  double ab = 0.0, bc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab = std::max(ab, std::abs(a.x[i] - b.x[2 * i]));
    bc = std::max(bc, std::abs(b.x[2 * i] - c.x[4 * i]));
  }
  CHECK(ab / bc == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("deterministic orbit becomes periodic after a transient") {
  const double period = 225.0;
  const auto tr = simulate(deterministic(1.2, 7 * period), 0);
  const std::size_t per = 22500;
  double sup = 0.0;
  for (std::size_t i = 5 * per; i + per < tr.size(); ++i)
    sup = std::max(sup, std::abs(tr.x[i + per] - tr.x[i]));
  CHECK(sup < 1e-4);
}

TEST_CASE("noise increments have variance sigma^2 dt") {
  SimConfig c;
  c.t_total = 1000.0;  // 1e5 steps
  c.sigma = 0.3;
  c.schedule = ConstantAmplitude{0.0};
  const auto tr = simulate(c, 5);
  std::vector<double> xi;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i)
    xi.push_back(tr.x[i + 1] - tr.x[i] - drift(tr.x[i], tr.t[i], tr.d_a[i], c.omega) * c.dt);
  double mean = 0.0;
  for (double v : xi) mean += v;
  mean /= static_cast<double>(xi.size());
  double var = 0.0;
  for (double v : xi) var += (v - mean) * (v - mean);
  var /= static_cast<double>(xi.size() - 1);
  CHECK(std::abs(var / (0.09 * 0.01) - 1.0) < 0.05);
}

TEST_CASE("runaway state raises a divergence error with its step") {
  auto c = deterministic(0.0, 1.0);
  c.x0 = 1e5;
  try {
    simulate(c, 0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("ensemble is deterministic and thread-count independent") {
  SimConfig c;
  c.t_total = 20.0;
  const auto a = simulate_ensemble(c, 3, DMinSampler::uniform(0.25, 0.9), 1);
  const auto b = simulate_ensemble(c, 3, DMinSampler::uniform(0.25, 0.9), 3);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].trajectory.x == b[i].trajectory.x);
    CHECK(a[i].d_min == b[i].d_min);
    CHECK(a[i].trajectory.seed == run_seed(c.master_seed, i));
  }
}

TEST_CASE("point-mass D_min keeps the ramp at or above it") {
  SimConfig c;
  c.t_total = 50.0;
  for (const auto& m : simulate_ensemble(c, 4, DMinSampler::fixed(0.9))) {
    CHECK(m.d_min == 0.9);
    CHECK(*std::min_element(m.trajectory.d_a.begin(), m.trajectory.d_a.end()) >= 0.9 - 1e-15);
  }
}

TEST_CASE("uniform D_min draws have the right mean") {
  const auto s = DMinSampler::uniform(0.25, 0.9);
  double sum = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double d = draw_d_min(s, run_seed(20240601, i));
    CHECK((d >= 0.25 && d <= 0.9));
    sum += d;
  }
  CHECK(std::abs(sum / 1000.0 - 0.575) < 0.02);
}
