#include "pfews/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "pfews/error.hpp"

namespace pfews {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view v, const std::string& key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("key '" + key + "': expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view v, const std::string& key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" +
                      std::string(v) + "'");
  return out;
}

std::vector<double> to_list(std::string_view v, const std::string& key) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(to_double(trim(v.substr(0, comma)), key));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

/// Parses `name(a, b, ...)` into name and numeric arguments.
std::pair<std::string, std::vector<double>> to_call(std::string_view v, const std::string& key) {
  const auto open = v.find('(');
  if (open == std::string_view::npos || v.back() != ')')
    throw ConfigError("key '" + key + "': expected name(args), got '" + std::string(v) + "'");
  return {std::string(trim(v.substr(0, open))),
          to_list(trim(v.substr(open + 1, v.size() - open - 2)), key)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  sim.validate();
  d_min.validate();
  detector.validate();
  features.validate();
  if (n_runs < 1) throw ConfigError("n_runs must be at least 1");
  if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
  if (perm_repeats < 1) throw ConfigError("perm_repeats must be at least 1");
  if (svm.iterations < 1) throw ConfigError("svm_iterations must be at least 1");
  if (!(svm.tol >= 0.0)) throw ConfigError("svm_tol must be non-negative");
  if (figures.levels.empty()) throw ConfigError("figure_levels must not be empty");
  if (figures.level_periods < 1) throw ConfigError("figure_level_periods must be at least 1");
  if (figures.stride < 1) throw ConfigError("figure_stride must be at least 1");
  if (figures.runs < 1) throw ConfigError("figure_runs must be at least 1");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  if (const auto* ramp = std::get_if<LinearRamp>(&sim.schedule)) {
    if (d_min.hi > ramp->d_max) throw ConfigError("d_min distribution exceeds d_max");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string schedule = "linear_ramp";
  double d_max = 1.2;
  double d_a = 1.2;
  std::vector<double> levels = {1.0};
  double level_duration = 0.0;
  bool have_omega = false;
  bool have_period = false;
  double period = 225.0;

  using Setter = std::function<void(std::string_view, const std::string&)>;
  auto num = [](double& dst) -> Setter {
    return [&dst](std::string_view v, const std::string& k) { dst = to_double(v, k); };
  };
  auto count = [](std::size_t& dst) -> Setter {
    return [&dst](std::string_view v, const std::string& k) {
      dst = static_cast<std::size_t>(to_u64(v, k));
    };
  };

  const std::map<std::string, Setter, std::less<>> setters = {
      {"dt", num(c.sim.dt)},
      {"t_total", num(c.sim.t_total)},
      {"omega", [&](std::string_view v, const std::string& k) {
         c.sim.omega = to_double(v, k);
         have_omega = true;
       }},
      {"forcing_period", [&](std::string_view v, const std::string& k) {
         period = to_double(v, k);
         have_period = true;
       }},
      {"schedule", [&](std::string_view v, const std::string&) { schedule = std::string(v); }},
      {"d_max", num(d_max)},
      {"d_a", num(d_a)},
      {"levels", [&](std::string_view v, const std::string& k) { levels = to_list(v, k); }},
      {"level_duration", num(level_duration)},
      {"d_min", [&](std::string_view v, const std::string& k) {
         auto [name, args] = to_call(v, k);
         if (name == "uniform" && args.size() == 2) {
           c.d_min = DMinSampler::uniform(args[0], args[1]);
         } else if (name == "fixed" && args.size() == 1) {
           c.d_min = DMinSampler::fixed(args[0]);
         } else {
           throw ConfigError("key 'd_min': expected uniform(lo, hi) or fixed(v)");
         }
       }},
      {"sigma", num(c.sim.sigma)},
      {"x0", num(c.sim.x0)},
      {"master_seed", [&](std::string_view v, const std::string& k) { c.sim.master_seed = to_u64(v, k); }},
      {"n_runs", count(c.n_runs)},
      {"x_up", num(c.detector.x_up)},
      {"x_low", num(c.detector.x_low)},
      {"n_min", count(c.detector.n_min)},
      {"breakdown_factor", num(c.detector.breakdown_factor)},
      {"p_buf", num(c.features.p_buf)},
      {"detrend_degree", [&](std::string_view v, const std::string& k) {
         c.features.detrend_degree = static_cast<int>(to_u64(v, k));
       }},
      {"window_w", count(c.features.window_w)},
      {"window_min", count(c.features.window_min)},
      {"min_cycles", count(c.features.min_cycles)},
      {"min_jumps", count(c.features.min_jumps)},
      {"svm_lambda", num(c.svm.lambda)},
      {"svm_iterations", count(c.svm.iterations)},
      {"svm_tol", num(c.svm.tol)},
      {"k_folds", count(c.k_folds)},
      {"perm_repeats", count(c.perm_repeats)},
      {"figure_runs", count(c.figures.runs)},
      {"figure_levels", [&](std::string_view v, const std::string& k) { c.figures.levels = to_list(v, k); }},
      {"figure_level_periods", count(c.figures.level_periods)},
      {"figure_breakdown_d_min", num(c.figures.breakdown_d_min)},
      {"figure_stride", count(c.figures.stride)},
      {"figure_bootstrap", count(c.figures.bootstrap)},
      {"out_dir", [&](std::string_view v, const std::string&) { c.out_dir = std::string(v); }},
  };

  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
    try {
      it->second(value, key);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }

  if (have_omega && have_period) throw ConfigError("set either omega or forcing_period, not both");
  if (have_period) {
    if (!(period > 0.0)) throw ConfigError("forcing_period must be positive");
    c.sim.omega = 2.0 * std::numbers::pi / period;
  }

  if (schedule == "linear_ramp") {
    c.sim.schedule = LinearRamp{d_max, c.d_min.lo};
  } else if (schedule == "constant") {
    c.sim.schedule = ConstantAmplitude{d_a};
  } else if (schedule == "piecewise") {
    c.sim.schedule = PiecewiseConstant{levels, level_duration};
  } else {
    throw ConfigError("schedule must be linear_ramp, constant or piecewise");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "dt = " << fmt(c.sim.dt) << '\n'
     << "t_total = " << fmt(c.sim.t_total) << '\n'
     << "omega = " << fmt(c.sim.omega) << '\n';
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantAmplitude>) {
          os << "schedule = constant\nd_a = " << fmt(s.d_a) << '\n';
        } else if constexpr (std::is_same_v<S, LinearRamp>) {
          os << "schedule = linear_ramp\nd_max = " << fmt(s.d_max) << '\n';
        } else {
          os << "schedule = piecewise\nlevels = " << fmt_list(s.levels) << '\n'
             << "level_duration = " << fmt(s.level_duration) << '\n';
        }
      },
      c.sim.schedule);
  if (c.d_min.kind == DMinSampler::Kind::Fixed) {
    os << "d_min = fixed(" << fmt(c.d_min.lo) << ")\n";
  } else {
    os << "d_min = uniform(" << fmt(c.d_min.lo) << ", " << fmt(c.d_min.hi) << ")\n";
  }
  os << "sigma = " << fmt(c.sim.sigma) << '\n'
     << "x0 = " << fmt(c.sim.x0) << '\n'
     << "master_seed = " << c.sim.master_seed << '\n'
     << "n_runs = " << c.n_runs << '\n'
     << "x_up = " << fmt(c.detector.x_up) << '\n'
     << "x_low = " << fmt(c.detector.x_low) << '\n'
     << "n_min = " << c.detector.n_min << '\n'
     << "breakdown_factor = " << fmt(c.detector.breakdown_factor) << '\n'
     << "p_buf = " << fmt(c.features.p_buf) << '\n'
     << "detrend_degree = " << c.features.detrend_degree << '\n'
     << "window_w = " << c.features.window_w << '\n'
     << "window_min = " << c.features.window_min << '\n'
     << "min_cycles = " << c.features.min_cycles << '\n'
     << "min_jumps = " << c.features.min_jumps << '\n'
     << "svm_lambda = " << fmt(c.svm.lambda) << '\n'
     << "svm_iterations = " << c.svm.iterations << '\n'
     << "svm_tol = " << fmt(c.svm.tol) << '\n'
     << "k_folds = " << c.k_folds << '\n'
     << "perm_repeats = " << c.perm_repeats << '\n'
     << "figure_runs = " << c.figures.runs << '\n'
     << "figure_levels = " << fmt_list(c.figures.levels) << '\n'
     << "figure_level_periods = " << c.figures.level_periods << '\n'
     << "figure_breakdown_d_min = " << fmt(c.figures.breakdown_d_min) << '\n'
     << "figure_stride = " << c.figures.stride << '\n'
     << "figure_bootstrap = " << c.figures.bootstrap << '\n'
     << "out_dir = " << c.out_dir << '\n';
  return os.str();
}

}  // namespace pfews
