#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pfews/rng.hpp"
#include "pfews/sim.hpp"

namespace testing {

// Trajectory on the grid t_n = n dt from raw samples.
inline pfews::Trajectory make_path(const std::vector<double>& x, double dt = 0.01) {
  pfews::Trajectory tr;
  tr.x = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    tr.t.push_back(static_cast<double>(i) * dt);
    tr.d_a.push_back(0.0);
  }
  return tr;
}

// Piecewise path: each (value, count) block appended in order.
inline std::vector<double> blocks(std::initializer_list<std::pair<double, std::size_t>> parts) {
  std::vector<double> out;
  for (const auto& [v, n] : parts) out.insert(out.end(), n, v);
  return out;
}

inline std::vector<double> normals(pfews::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> out(n);
  for (auto& v : out) v = scale * rng.normal();
  return out;
}

inline std::vector<double> uniforms(pfews::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(lo, hi);
  return out;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Relative error with an absolute floor for values near zero.
inline bool close(double a, double b, double rel, double abs_floor = 1e-14) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

}  // namespace testing
