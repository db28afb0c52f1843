#include "adjstep/scenario.hpp"

#include "adjstep/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace adjstep {

namespace {

// Antiderivative of (1 - s^2)^2.
double quartic_primitive(double s) { return s - 2.0 * s * s * s / 3.0 + s * s * s * s * s / 5.0; }

double window_integral(const PerturbationWindow& w, double a, double b) {
  const double half = 0.5 * (w.t1 - w.t0);
  const double mid = 0.5 * (w.t0 + w.t1);
  const double sa = std::clamp((a - mid) / half, -1.0, 1.0);
  const double sb = std::clamp((b - mid) / half, -1.0, 1.0);
  return w.amplitude * half * (quartic_primitive(sb) - quartic_primitive(sa));
}

}  // namespace

double quartic_bump(double t, double t0, double t1) {
  const double s = (2.0 * t - t0 - t1) / (t1 - t0);
  if (std::abs(s) >= 1.0) return 0.0;
  return (1.0 - s * s) * (1.0 - s * s);
}

double PerturbationSchedule::weight(double t) const {
  double w = 1.0;
  for (const PerturbationWindow& win : windows) w += win.amplitude * quartic_bump(t, win.t0, win.t1);
  return w;
}

double PerturbationSchedule::mean_weight(double a, double b) const {
  if (b <= a) return weight(a);
  double extra = 0.0;
  for (const PerturbationWindow& win : windows) extra += window_integral(win, a, b);
  return 1.0 + extra / (b - a);
}

double PerturbationSchedule::last_exit() const {
  double t = 0.0;
  for (const PerturbationWindow& w : windows) t = std::max(t, w.t1);
  return t;
}

double inflow_pressure(double t, double p_inf, const PerturbationSchedule& schedule) {
  return p_inf * schedule.weight(t);
}

State<4> BumpScenario::freestream() const {
  return model().from_primitive(rho_inf, freestream_speed(), 0.0, p_inf);
}

double BumpScenario::freestream_sound_speed() const { return std::sqrt(gamma * p_inf / rho_inf); }
double BumpScenario::freestream_speed() const { return mach * freestream_sound_speed(); }

State<4> BumpScenario::inflow_state(double t0, double t1) const {
  const double p = p_inf * schedule.mean_weight(t0, t1);
  const double rho = rho_inf * std::pow(p / p_inf, 1.0 / gamma);
  return model().from_primitive(rho, freestream_speed(), 0.0, p);
}

BoundarySpec<4> BumpScenario::boundary() const {
  BoundarySpec<4> spec;
  const BumpScenario self = *this;
  spec.set_characteristic(BoundaryTag::kInflow, [self](double t0, double t1) { return self.inflow_state(t0, t1); });
  spec.set_constant(BoundaryTag::kOutflow, freestream());
  spec.set_wall(BoundaryTag::kWall);
  return spec;
}

TargetFunctional<4> BumpScenario::functional() const {
  return bump_pressure_functional(abscissae, half_width, final_time);
}

bool BumpScenario::is_stationary_time(double t) const {
  double first = std::numeric_limits<double>::infinity();
  for (const PerturbationWindow& w : schedule.windows) first = std::min(first, w.t0);
  if (t < first) return true;
  const double sweep = 1.25 * geometry.length / (freestream_speed() + freestream_sound_speed());
  return t > schedule.last_exit() + sweep;
}

Field BurgersScenario::initial(const Mesh& mesh) const {
  Field u(mesh.num_cells());
  for (int c = 0; c < static_cast<int>(mesh.num_cells()); ++c) u[c] = mesh.cell(c).centroid.x() < 0.0 ? 1.0 : -1.0;
  return u;
}

double BurgersScenario::inflow_mean(double t0, double t1) const {
  PerturbationSchedule s{{{pulse_t0, pulse_t1, amplitude}}};
  return s.mean_weight(t0, t1);
}

BoundarySpec<1> BurgersScenario::boundary() const {
  BoundarySpec<1> spec;
  const BurgersScenario self = *this;
  spec.set_characteristic(BoundaryTag::kInflow,
                          [self](double t0, double t1) { return State<1>(self.inflow_mean(t0, t1)); });
  spec.set_constant(BoundaryTag::kOutflow, State<1>(-1.0));
  return spec;
}

TargetFunctional<1> BurgersScenario::functional() const {
  return interval_bump_functional(psi_center, psi_half_width, psi_t0, psi_t1);
}

BurgersScenario burgers_perturbed_shock(int level) {
  if (level < 0) throw ArgumentError("level must be >= 0");
  BurgersScenario s;
  s.level = level;
  return s;
}

BumpScenario bump_channel_scenario() { return BumpScenario{}; }

SteadyResult steady_state_solve(const FiniteVolume<Euler2D>& fv, const Field& initial, const SchemeConfig& cfg,
                                const SteadyOptions& options) {
  const SlabBoundary<4> sb = fv.freeze(0.0, 0.0);
  SteadyResult out;
  out.field = initial;
  fv.check_field(initial);
  Field r;
  fv.residual(out.field, sb, r);
  const double r0 = r.lpNorm<1>();
  out.initial_residual = r0;
  out.final_residual = r0;
  out.history.push_back(r0);
  if (r0 == 0.0) return out;
  // a freestream on a closed-form mesh can sit at rounding level from the start
  const double scale = fv.residual(out.field, sb, r);
  if (r0 <= 1e-13 * scale) return out;

  double cfl = options.cfl_start;
  double prev = r0;
  double best = r0;
  int since_best = 0;
  for (int k = 1; k <= options.max_steps; ++k) {
    int lin = 0;
    fv.pseudo_time_step(out.field, cfl, sb, cfg, lin);
    fv.residual(out.field, sb, r);
    const double rk = r.lpNorm<1>();
    out.steps = k;
    out.final_residual = rk;
    out.history.push_back(rk);
    if (!std::isfinite(rk)) throw NonconvergenceError("steady solve diverged", rk);
    if (rk <= options.drop * r0) return out;
    if (rk < best * (1.0 - 1e-3)) {
      best = rk;
      since_best = 0;
    } else if (++since_best >= options.stall_steps) {
      throw NonconvergenceError("steady solve stalled at residual ratio " + std::to_string(rk / r0), rk);
    }
    cfl = std::clamp(2.0 * cfl * prev / rk, 1.0, options.cfl_max);
    prev = rk;
  }
  throw NonconvergenceError("steady solve reached the step limit", out.final_residual);
}

double max_mach(const Euler2D& model, const Field& u) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < u.size() / 4; ++c) m = std::max(m, model.mach(u.segment<4>(4 * c)));
  return m;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  return static_cast<int>(d);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& is) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.raw.count(key)) throw ConfigError("config key '" + key + "' given twice");
    cfg.raw[key] = value;
  }
  if (!cfg.raw.count("model")) throw ConfigError("missing config key 'model'");
  cfg.model = cfg.raw.at("model");
  if (cfg.model != "burgers1d" && cfg.model != "euler2d")
    throw ConfigError("config key 'model': expected burgers1d or euler2d, got '" + cfg.model + "'");

  BumpScenario& b = cfg.bump;
  BurgersScenario& g = cfg.burgers;
  SchemeConfig& s = cfg.scheme;
  for (const auto& [key, v] : cfg.raw) {
    const bool euler = cfg.model == "euler2d";
    auto d = [&] { return to_double(key, v); };
    auto only = [&](bool ok) {
      if (!ok) throw ConfigError("config key '" + key + "' does not apply to model " + cfg.model);
    };
    if (key == "model") continue;
    if (key == "level") {
      cfg.level = to_int(key, v);
      if (cfg.level < 0) throw ConfigError("config key 'level' must be >= 0");
    } else if (key == "T") {
      const double t = d();
      if (!(t > 0.0)) throw ConfigError("config key 'T' must be positive");
      b.final_time = g.final_time = t;
    } else if (key == "newton_tol") {
      s.newton_tol = d();
    } else if (key == "newton_max") {
      s.newton_max = to_int(key, v);
    } else if (key == "linear_tol") {
      s.linear_tol = d();
    } else if (key == "linear_max") {
      s.linear_max = to_int(key, v);
    } else if (key == "gamma") {
      only(euler), b.gamma = d();
    } else if (key == "rho_inf") {
      only(euler), b.rho_inf = d();
    } else if (key == "p_inf") {
      only(euler), b.p_inf = d();
    } else if (key == "mach") {
      only(euler), b.mach = d();
    } else if (key == "length") {
      only(euler), b.geometry.length = d();
    } else if (key == "height") {
      only(euler), b.geometry.height = d();
    } else if (key == "bump_secant") {
      only(euler), b.geometry.bump_secant = d();
    } else if (key == "bump_height") {
      only(euler), b.geometry.bump_height = d();
    } else if (key == "windows") {
      only(euler);
      b.schedule.windows.clear();
      for (const std::string& w : split(v, ',')) {
        const auto parts = split(w, ':');
        if (parts.size() != 3) throw ConfigError("config key 'windows': expected t0:t1:amplitude entries");
        PerturbationWindow pw{to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
        if (!(pw.t1 > pw.t0) || pw.amplitude < -1.0)
          throw ConfigError("config key 'windows': invalid window '" + w + "'");
        b.schedule.windows.push_back(pw);
      }
    } else if (key == "abscissae") {
      only(euler);
      b.abscissae.clear();
      for (const std::string& x : split(v, ',')) b.abscissae.push_back(to_double(key, x));
    } else if (key == "half_width") {
      only(euler), b.half_width = d();
    } else if (key == "steady_drop") {
      only(euler), cfg.steady.drop = d();
    } else if (key == "steady_cfl_start") {
      only(euler), cfg.steady.cfl_start = d();
    } else if (key == "amplitude") {
      only(!euler), g.amplitude = d();
    } else if (key == "pulse_start") {
      only(!euler), g.pulse_t0 = d();
    } else if (key == "pulse_end") {
      only(!euler), g.pulse_t1 = d();
    } else if (key == "psi_center") {
      only(!euler), g.psi_center = d();
    } else if (key == "psi_half_width") {
      only(!euler), g.psi_half_width = d();
    } else if (key == "psi_start") {
      only(!euler), g.psi_t0 = d();
    } else if (key == "psi_end") {
      only(!euler), g.psi_t1 = d();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  g.level = cfg.level;
  if (cfg.model == "burgers1d" && !(g.pulse_t1 > g.pulse_t0)) throw ConfigError("config: pulse_end must exceed pulse_start");
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_scenario_config(in);
}

void write_scenario_config(std::ostream& os, const ScenarioConfig& cfg) {
  os << std::setprecision(17);
  os << "model = " << cfg.model << "\n";
  os << "level = " << cfg.level << "\n";
  for (const auto& [key, v] : cfg.raw)
    if (key != "model" && key != "level") os << key << " = " << v << "\n";
}

}  // namespace adjstep
