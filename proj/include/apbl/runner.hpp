#pragma once

// Experiment driver: JSON configuration, time loops that land exactly on the
// requested snapshot times, epsilon sweeps, profile comparison and CSV output.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apbl/chandrasekhar.hpp"
#include "apbl/reference.hpp"
#include "apbl/scheme_lme.hpp"
#include "apbl/scheme_naive.hpp"

namespace apbl {

enum class Scheme { lme, naive, explicit_kinetic, diffusion };

inline Scheme parse_scheme(const std::string& s) {
  if (s == "lme") return Scheme::lme;
  if (s == "naive") return Scheme::naive;
  if (s == "explicit") return Scheme::explicit_kinetic;
  if (s == "diffusion") return Scheme::diffusion;
  throw Error("unknown scheme '" + s + "' (expected lme, naive, explicit or diffusion)");
}

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::lme: return "lme";
    case Scheme::naive: return "naive";
    case Scheme::explicit_kinetic: return "explicit";
    case Scheme::diffusion: return "diffusion";
  }
  return "?";
}

/// Inflow data as a function of v. Only the incoming nodes of each wall are
/// read. "linear_v" is |v|, i.e. f = v on v > 0 at the left wall.
struct InflowSpec {
  std::string kind = "zero";
  double value = 0.0;
  std::vector<double> coefficients;  // polynomial in |v|, lowest degree first

  [[nodiscard]] double operator()(double v) const {
    const double s = std::abs(v);
    if (kind == "zero") return 0.0;
    if (kind == "constant") return value;
    if (kind == "linear_v") return s;
    if (kind == "polynomial") {
      double r = 0.0;
      for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) r = r * s + *it;
      return r;
    }
    throw Error("unknown inflow kind '" + kind + "'");
  }
};

struct ExperimentConfig {
  std::string name = "run";
  nlohmann::json sigma = {{"kind", "constant"}};
  InflowSpec f_left;
  InflowSpec f_right;
  double epsilon = 1.0;
  int cells = 49;   // interior nodes N
  int nodes = 32;   // velocity nodes M
  VelocityRule rule = VelocityRule::half_range_gauss;
  double t_final = 0.4;
  std::vector<double> snapshots;
  Scheme scheme = Scheme::lme;
  std::string output = "out";
  std::optional<double> dt;
  int reference_cells = 0;  // explicit scheme; 0 picks the default
  int sweep_steps = 100;

  void validate() const {
    if (!(epsilon > 0.0)) throw Error("config: epsilon must be positive");
    if (!(t_final > 0.0)) throw Error("config: t_final must be positive");
    if (cells < 1) throw Error("config: cells must be at least 1");
    if (nodes < 2 || nodes % 2 != 0) throw Error("config: nodes must be even and at least 2");
    for (double t : snapshots) {
      if (t < 0.0 || t > t_final) throw Error("config: snapshot times must lie in [0, t_final]");
    }
    if (dt && !(*dt > 0.0)) throw Error("config: dt must be positive");
    (void)f_left(0.5);
    (void)f_right(-0.5);
  }

  /// Explicit reference resolution: 2000 cells in the kinetic regime, 1000
  /// once the eps^2 stability limit dominates.
  [[nodiscard]] int explicit_cells() const {
    if (reference_cells > 0) return reference_cells;
    return epsilon >= 0.1 ? 2000 : 1000;
  }
};

inline CrossSection parse_sigma(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") return CrossSection::constant(j.value("value", 1.0));
  if (kind == "multiplicative") {
    const std::string p = j.at("p").get<std::string>();
    const double q = j.at("q").get<double>();
    if (p == "abs_pow") return CrossSection::abs_pow(q);
    if (p == "one_minus_v2_pow") return CrossSection::one_minus_v2_pow(q);
    throw Error("unknown multiplicative factor '" + p + "'");
  }
  if (kind == "pairwise") {
    const std::string form = j.at("form").get<std::string>();
    if (form == "abs_diff_pow") return CrossSection::abs_diff_pow(j.at("q").get<double>());
    throw Error("unknown pairwise form '" + form + "'");
  }
  throw Error("unknown cross section kind '" + kind + "'");
}

inline InflowSpec parse_inflow(const nlohmann::json& j) {
  InflowSpec s;
  if (j.is_number()) {
    s.kind = "constant";
    s.value = j.get<double>();
    return s;
  }
  s.kind = j.value("kind", "zero");
  s.value = j.value("value", 0.0);
  if (j.contains("coefficients")) s.coefficients = j.at("coefficients").get<std::vector<double>>();
  (void)s(0.5);
  return s;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("sigma")) c.sigma = j.at("sigma");
    (void)parse_sigma(c.sigma);
    if (j.contains("f_left")) c.f_left = parse_inflow(j.at("f_left"));
    if (j.contains("f_right")) c.f_right = parse_inflow(j.at("f_right"));
    c.epsilon = j.value("epsilon", c.epsilon);
    c.cells = j.value("cells", c.cells);
    c.nodes = j.value("nodes", c.nodes);
    const std::string rule = j.value("velocity_rule", std::string("half_range_gauss"));
    if (rule == "gauss") {
      c.rule = VelocityRule::gauss;
    } else if (rule == "half_range_gauss") {
      c.rule = VelocityRule::half_range_gauss;
    } else {
      throw Error("unknown velocity_rule '" + rule + "'");
    }
    c.t_final = j.value("t_final", c.t_final);
    if (j.contains("snapshots")) c.snapshots = j.at("snapshots").get<std::vector<double>>();
    c.scheme = parse_scheme(j.value("scheme", std::string("lme")));
    c.output = j.value("output", c.output);
    if (j.contains("dt")) c.dt = j.at("dt").get<double>();
    c.reference_cells = j.value("reference_cells", 0);
    c.sweep_steps = j.value("sweep_steps", c.sweep_steps);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (c.snapshots.empty()) c.snapshots.push_back(c.t_final);
  std::sort(c.snapshots.begin(), c.snapshots.end());
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

struct Profile {
  double time = 0.0;
  Vec x;
  Vec rho;
};

struct RunReport {
  std::string name;
  Scheme scheme = Scheme::lme;
  std::vector<Profile> profiles;
  /// Per snapshot: rho at x = 0 and x = 1 as stored by the scheme.
  std::vector<std::pair<double, double>> boundary_values;
  /// Per snapshot: 2 rho_1 - rho_2 and its mirror, the interior profile
  /// extrapolated to the walls.
  std::vector<std::pair<double, double>> extrapolated;
  /// (t, lambda_l, lambda_r) after every step of the lme scheme.
  std::vector<std::array<double, 3>> lambda_history;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string format_time(double t) {
  std::ostringstream os;
  os << std::setprecision(10) << t;
  return os.str();
}

inline Vec vector_on(const VelocityGrid& g, const InflowSpec& f) {
  Vec out(g.nodes.size());
  for (Eigen::Index k = 0; k < g.nodes.size(); ++k) out[k] = f(g.nodes[k]);
  return out;
}

inline void record(RunReport& r, double t, const Vec& x, const Vec& rho) {
  r.profiles.push_back({t, x, rho});
  const auto n = rho.size();
  r.boundary_values.emplace_back(rho[0], rho[n - 1]);
  r.extrapolated.emplace_back(2.0 * rho[1] - rho[2], 2.0 * rho[n - 2] - rho[n - 3]);
}

// Steps from t to each snapshot, shortening the last step so snapshots are
// hit exactly. step(dt) advances, emit(t) records.
inline void march(double dt, const std::vector<double>& snapshots, const std::function<void(double)>& step,
                  const std::function<void(double)>& emit) {
  double t = 0.0;
  for (double target : snapshots) {
    while (target - t > 1e-12 * std::max(1.0, target)) {
      const double h = std::min(dt, target - t);
      step(h);
      t = (target - t - h <= 1e-12 * std::max(1.0, target)) ? target : t + h;
    }
    emit(target);
  }
}

inline Vec node_coordinates(int count) {
  Vec x(count);
  for (int i = 0; i < count; ++i) x[i] = static_cast<double>(i) / (count - 1);
  return x;
}

}  // namespace detail

/// Boundary data, velocity grid and operator for a config.
struct Setup {
  CrossSection sigma;
  VelocityGrid grid;
  CollisionOperator op;
  BoundaryData boundary;
};

inline Setup make_setup(const ExperimentConfig& c) {
  CrossSection sigma = parse_sigma(c.sigma);
  VelocityGrid grid = make_velocity_grid(c.rule, c.nodes);
  CollisionOperator op = assemble_L(sigma, grid);
  BoundaryData bd = make_boundary(detail::vector_on(grid, c.f_left), detail::vector_on(grid, c.f_right), grid);
  return {std::move(sigma), std::move(grid), std::move(op), std::move(bd)};
}

/// Exact Dirichlet values of the diffusion limit: Chandrasekhar kernels for
/// multiplicative sigma. The right wall uses the mirrored data f_r(-v).
inline std::pair<double, double> exact_diffusion_boundary(const CrossSection& sigma, const InflowSpec& fl,
                                                          const InflowSpec& fr) {
  if (!sigma.is_multiplicative()) {
    throw Error("diffusion reference needs the exact boundary kernel, which exists only for multiplicative "
                "cross sections (got '" + sigma.label() + "')");
  }
  const ExactKernel k(sigma);
  const HalfLineQuadrature& q = k.h().quad;
  double l = 0.0;
  double r = 0.0;
  for (Eigen::Index i = 0; i < q.nodes.size(); ++i) {
    const double kv = k(q.nodes[i]);
    l += q.weights[i] * kv * fl(q.nodes[i]);
    r += q.weights[i] * kv * fr(-q.nodes[i]);
  }
  return {l, r};
}

/// Diffusion coefficient of the continuous model: gamma/alpha for
/// multiplicative sigma (1/3 for sigma = 1).
inline double exact_kappa(const CrossSection& sigma) { return kernel_coefficients(sigma).kappa; }

/// Runs one experiment and returns the in-memory report (no files written).
inline RunReport run(const ExperimentConfig& c) {
  c.validate();
  RunReport report;
  report.name = c.name;
  report.scheme = c.scheme;
  Setup setup = make_setup(c);

  switch (c.scheme) {
    case Scheme::lme:
    case Scheme::naive: {
      const SpatialGrid sg(c.cells);
      SchemeContext ctx(setup.op, sg, setup.boundary);
      MMState s = init_state([](double, double) { return 0.0; }, sg, setup.grid, setup.boundary, c.epsilon);
      const double dt = c.dt.value_or(default_time_step(sg.dx(), c.epsilon));
      const Vec x = detail::node_coordinates(sg.node_count());
      Diagnostics diag;
      long step = 0;
      detail::march(
          dt, c.snapshots,
          [&](double h) {
            if (c.scheme == Scheme::lme) {
              s = step_lme(s, ctx, h, &diag, step);
              report.lambda_history.push_back({s.time, s.lambda_l, s.lambda_r});
            } else {
              s = step_naive(s, ctx, h, &diag);
            }
            ++step;
          },
          [&](double t) { detail::record(report, t, x, s.rho); });
      // One warning per distinct message is enough.
      std::sort(diag.warnings.begin(), diag.warnings.end());
      diag.warnings.erase(std::unique(diag.warnings.begin(), diag.warnings.end()), diag.warnings.end());
      report.warnings = std::move(diag.warnings);
      break;
    }
    case Scheme::explicit_kinetic: {
      KineticField k = init_kinetic(c.explicit_cells(), setup.grid, setup.boundary, c.epsilon);
      const double rad = collision_spectral_radius(setup.op);
      const double dt = c.dt.value_or(kinetic_time_step(setup.op, k.dx(), c.epsilon));
      const Vec x = detail::node_coordinates(k.cells() + 2);
      detail::march(
          dt, c.snapshots, [&](double h) { step_explicit_kinetic(k, setup.op, setup.boundary, h, rad); },
          [&](double t) { detail::record(report, t, x, kinetic_density(k, setup.grid)); });
      break;
    }
    case Scheme::diffusion: {
      const auto [bl, br] = exact_diffusion_boundary(setup.sigma, c.f_left, c.f_right);
      const double kappa = exact_kappa(setup.sigma);
      const int count = c.cells + 2;
      const double dx = 1.0 / (count - 1);
      const double dt = c.dt.value_or(0.45 * dx * dx / kappa);
      Vec rho = Vec::Zero(count);
      rho[0] = bl;
      rho[count - 1] = br;
      const Vec x = detail::node_coordinates(count);
      detail::march(
          dt, c.snapshots, [&](double h) { rho = step_diffusion(rho, kappa, h, bl, br); },
          [&](double t) { detail::record(report, t, x, rho); });
      break;
    }
  }
  return report;
}

/// Piecewise-linear interpolation of (x, y) at xq; x ascending.
inline double interpolate(const Vec& x, const Vec& y, double xq) {
  const auto n = x.size();
  if (xq <= x[0]) return y[0];
  if (xq >= x[n - 1]) return y[n - 1];
  const auto* it = std::upper_bound(x.data(), x.data() + n, xq);
  const auto i = static_cast<Eigen::Index>(it - x.data());
  const double t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - t) * y[i - 1] + t * y[i];
}

enum class Norm { sup, l2 };

inline Norm parse_norm(const std::string& s) {
  if (s == "sup") return Norm::sup;
  if (s == "L2" || s == "l2") return Norm::l2;
  throw Error("unknown norm '" + s + "' (expected sup or L2)");
}

/// Norm of a - b on the finer of the two grids, restricted to [x_min, x_max].
inline double profile_distance(const Profile& a, const Profile& b, Norm norm, double x_min = 0.0,
                               double x_max = 1.0) {
  const Profile& fine = a.x.size() >= b.x.size() ? a : b;
  const Profile& coarse = a.x.size() >= b.x.size() ? b : a;
  const double sign = (&fine == &a) ? 1.0 : -1.0;
  double sup = 0.0;
  double sq = 0.0;
  double prev_x = 0.0;
  double prev_d2 = 0.0;
  bool first = true;
  for (Eigen::Index i = 0; i < fine.x.size(); ++i) {
    const double x = fine.x[i];
    if (x < x_min - 1e-12 || x > x_max + 1e-12) continue;
    const double d = sign * (fine.rho[i] - interpolate(coarse.x, coarse.rho, x));
    sup = std::max(sup, std::abs(d));
    if (!first) sq += 0.5 * (x - prev_x) * (d * d + prev_d2);
    prev_x = x;
    prev_d2 = d * d;
    first = false;
  }
  return norm == Norm::sup ? sup : std::sqrt(sq);
}

/// Distance per common snapshot time.
inline std::vector<std::pair<double, double>> compare(const RunReport& a, const RunReport& b, Norm norm) {
  std::vector<std::pair<double, double>> out;
  for (const auto& pa : a.profiles) {
    for (const auto& pb : b.profiles) {
      if (std::abs(pa.time - pb.time) <= 1e-12 * std::max(1.0, pa.time)) {
        out.emplace_back(pa.time, profile_distance(pa, pb, norm));
      }
    }
  }
  if (out.empty()) throw Error("compare: the two reports share no snapshot time");
  return out;
}

struct SweepRow {
  double epsilon = 0.0;
  double boundary_value = 0.0;  // extrapolated left value after the last step
  double distance = 0.0;        // sup over steps and interior nodes of |rho - rho_limit|
  double g_sup = 0.0;           // sup over steps of |g|
};

/// Runs the configured micro-macro scheme for sweep_steps steps at each eps
/// with one fixed dt (config dt, else dx^2/4) and measures the distance to
/// the trajectory of its eps -> 0 limit scheme.
inline std::vector<SweepRow> epsilon_sweep(const ExperimentConfig& base, const std::vector<double>& eps_list) {
  if (base.scheme != Scheme::lme && base.scheme != Scheme::naive) {
    throw Error("sweep needs the lme or naive scheme");
  }
  for (double e : eps_list) {
    if (!(e > 0.0)) throw Error("sweep: epsilon values must be positive");
  }
  Setup setup = make_setup(base);
  const SpatialGrid sg(base.cells);
  const double dt = base.dt.value_or(0.25 * sg.dx() * sg.dx());
  const int steps = base.sweep_steps;
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    SchemeContext ctx(setup.op, sg, setup.boundary);
    MMState s = init_state([](double, double) { return 0.0; }, sg, setup.grid, setup.boundary, eps);
    const Mat limit = base.scheme == Scheme::lme ? lme_limit_trajectory(s, setup.op, setup.boundary, dt, steps)
                                                 : naive_limit_trajectory(s, setup.op, setup.boundary, dt, steps);
    SweepRow row;
    row.epsilon = eps;
    for (int n = 0; n < steps; ++n) {
      s = base.scheme == Scheme::lme ? step_lme(s, ctx, dt, nullptr, n) : step_naive(s, ctx, dt);
      const int N = sg.interior;
      const double d = (s.rho.segment(1, N) - limit.col(n + 1).segment(1, N)).cwiseAbs().maxCoeff();
      row.distance = std::max(row.distance, d);
      row.g_sup = std::max(row.g_sup, s.g_mid.cwiseAbs().maxCoeff());
    }
    row.boundary_value = 2.0 * s.rho[1] - s.rho[2];
    rows.push_back(row);
  }
  return rows;
}

// ---- CSV output ----------------------------------------------------------

inline void write_profile_csv(std::ostream& os, const Profile& p) {
  os << "x,rho\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < p.x.size(); ++i) os << p.x[i] << ',' << p.rho[i] << '\n';
}

/// Reads an x,rho CSV written by write_profile_csv (extra columns ignored).
inline Profile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open profile '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,rho", 0) != 0) {
    throw Error("profile '" + path + "' does not start with an x,rho header");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a;
    std::string b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
      throw Error("profile '" + path + "': malformed row '" + line + "'");
    }
    try {
      xs.push_back(std::stod(a));
      ys.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw Error("profile '" + path + "': malformed row '" + line + "'");
    }
  }
  if (xs.size() < 2) throw Error("profile '" + path + "' has fewer than two rows");
  Profile p;
  p.x = Eigen::Map<Vec>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  p.rho = Eigen::Map<Vec>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return p;
}

inline std::string snapshot_filename(const std::string& name, double t) {
  return name + "_t" + detail::format_time(t) + ".csv";
}

/// Writes one x,rho file per snapshot plus <name>_boundary.csv and, for the
/// lme scheme, <name>_lambda.csv. Returns the written paths.
inline std::vector<std::filesystem::path> write_report(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream os(p);
    if (!os) throw Error("cannot write '" + p.string() + "'");
    paths.push_back(p);
    return os;
  };
  for (const auto& p : r.profiles) {
    auto os = open(dir / snapshot_filename(r.name, p.time));
    write_profile_csv(os, p);
  }
  {
    auto os = open(dir / (r.name + "_boundary.csv"));
    os << "t,rho_left,rho_right,extrapolated_left,extrapolated_right\n" << std::setprecision(17);
    for (std::size_t i = 0; i < r.profiles.size(); ++i) {
      os << r.profiles[i].time << ',' << r.boundary_values[i].first << ',' << r.boundary_values[i].second << ','
         << r.extrapolated[i].first << ',' << r.extrapolated[i].second << '\n';
    }
  }
  if (!r.lambda_history.empty()) {
    auto os = open(dir / (r.name + "_lambda.csv"));
    os << "t,lambda_left,lambda_right\n" << std::setprecision(17);
    for (const auto& row : r.lambda_history) os << row[0] << ',' << row[1] << ',' << row[2] << '\n';
  }
  return paths;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "epsilon,boundary_value,distance,distance_over_eps,g_sup,g_sup_over_eps\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.epsilon << ',' << r.boundary_value << ',' << r.distance << ',' << r.distance / r.epsilon << ','
       << r.g_sup << ',' << r.g_sup / r.epsilon << '\n';
  }
}

/// Discrete limit kernels of both schemes on the solver grid:
/// v,K_L_naive,K_L_lme (plus K_exact for multiplicative sigma).
inline void write_discrete_kernel_csv(std::ostream& os, const Setup& s) {
  const KernelTable kn = limit_kernel_naive(s.op);
  const KernelTable kl = limit_kernel_lme(s.op);
  std::optional<ExactKernel> exact;
  if (s.sigma.is_multiplicative()) exact.emplace(s.sigma);
  os << "v,K_L_naive,K_L_lme" << (exact ? ",K_exact" : "") << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < kn.nodes.size(); ++i) {
    os << kn.nodes[i] << ',' << kn.samples[i] << ',' << kl.samples[i];
    if (exact) os << ',' << (*exact)(kn.nodes[i]);
    os << '\n';
  }
}

}  // namespace apbl
