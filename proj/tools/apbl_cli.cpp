// Command-line front end: run, sweep, kernels, compare.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apbl/apbl.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string out;
  int nodes = 0;
  int cells = 0;
};

apbl::ExperimentConfig load(const std::string& path, const Overrides& o) {
  apbl::ExperimentConfig c = apbl::load_config(path);
  if (!o.out.empty()) c.output = o.out;
  if (o.nodes > 0) c.nodes = o.nodes;
  if (o.cells > 0) c.cells = o.cells;
  c.validate();
  return c;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw apbl::Error("cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw apbl::Error("empty epsilon list");
  return out;
}

// A compare operand is either one x,rho CSV or a run directory holding
// <name>_t<time>.csv snapshots.
std::vector<std::pair<std::string, apbl::Profile>> load_profiles(const fs::path& p) {
  std::vector<std::pair<std::string, apbl::Profile>> out;
  if (fs::is_regular_file(p)) {
    out.emplace_back("", apbl::read_profile_csv(p.string()));
    return out;
  }
  if (!fs::is_directory(p)) throw apbl::Error("'" + p.string() + "' is neither a CSV file nor a directory");
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& e : fs::directory_iterator(p)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const std::string stem = e.path().stem().string();
    const auto pos = stem.rfind("_t");
    if (pos == std::string::npos) continue;
    const std::string t = stem.substr(pos + 2);
    std::size_t used = 0;
    try {
      (void)std::stod(t, &used);
    } catch (const std::exception&) {
      continue;
    }
    if (used == t.size()) files.emplace_back(t, e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& [t, f] : files) out.emplace_back(t, apbl::read_profile_csv(f.string()));
  if (out.empty()) throw apbl::Error("no snapshot CSV files in '" + p.string() + "'");
  return out;
}

int cmd_run(const std::string& path, const Overrides& o) {
  const auto c = load(path, o);
  const auto report = apbl::run(c);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const auto files = apbl::write_report(report, c.output);
  std::cout << "scheme " << apbl::to_string(c.scheme) << ", " << report.profiles.size() << " snapshots\n";
  for (std::size_t i = 0; i < report.profiles.size(); ++i) {
    std::cout << "t=" << report.profiles[i].time << "  rho(0)=" << report.boundary_values[i].first
              << "  extrapolated(0)=" << report.extrapolated[i].first << '\n';
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& eps, const Overrides& o) {
  const auto c = load(path, o);
  const auto rows = apbl::epsilon_sweep(c, parse_list(eps));
  fs::create_directories(c.output);
  const fs::path file = fs::path(c.output) / (c.name + "_sweep.csv");
  std::ofstream os(file);
  if (!os) throw apbl::Error("cannot write '" + file.string() + "'");
  apbl::write_sweep_csv(os, rows);
  apbl::write_sweep_csv(std::cout, rows);
  std::cout << "wrote " << file.string() << '\n';
  return 0;
}

int cmd_kernels(const std::string& path, const Overrides& o) {
  const auto c = load(path, o);
  const auto setup = apbl::make_setup(c);
  fs::create_directories(c.output);
  if (setup.sigma.is_multiplicative()) {
    const fs::path f = fs::path(c.output) / (c.name + "_kernels.csv");
    std::ofstream os(f);
    if (!os) throw apbl::Error("cannot write '" + f.string() + "'");
    apbl::write_kernel_csv(os, setup.sigma);
    std::cout << "wrote " << f.string() << '\n';
  }
  const fs::path f = fs::path(c.output) / (c.name + "_discrete_kernels.csv");
  std::ofstream os(f);
  if (!os) throw apbl::Error("cannot write '" + f.string() + "'");
  apbl::write_discrete_kernel_csv(os, setup);
  std::cout << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& norm_name) {
  const auto norm = apbl::parse_norm(norm_name);
  const auto pa = load_profiles(a);
  const auto pb = load_profiles(b);
  const bool file_a = pa.front().first.empty();
  const bool file_b = pb.front().first.empty();
  if (file_a != file_b) throw apbl::Error("compare: give two CSV files or two run directories");
  if (file_a) {
    std::cout << apbl::profile_distance(pa.front().second, pb.front().second, norm) << '\n';
    return 0;
  }
  int matched = 0;
  for (const auto& [ta, ra] : pa) {
    for (const auto& [tb, rb] : pb) {
      if (std::stod(ta) != std::stod(tb)) continue;
      std::cout << ta << ',' << apbl::profile_distance(ra, rb, norm) << '\n';
      ++matched;
    }
  }
  if (matched == 0) throw apbl::Error("compare: the two runs share no snapshot time");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic-preserving micro-macro solver for kinetic boundary layers"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--out", o.out, "Output directory (overrides the config)");
  app.add_option("--nodes", o.nodes, "Velocity nodes M (overrides the config)");
  app.add_option("--cells", o.cells, "Interior spatial nodes N (overrides the config)");

  std::string config;
  auto* run = app.add_subcommand("run", "Run one experiment and write x,rho snapshots");
  run->add_option("config", config, "JSON config")->required();

  std::string eps = "1e-2,1e-4,1e-6";
  auto* sweep = app.add_subcommand("sweep", "Distance to the eps -> 0 limit scheme over a list of eps");
  sweep->add_option("config", config, "JSON config")->required();
  sweep->add_option("--eps", eps, "Comma-separated epsilon values");

  auto* kernels = app.add_subcommand("kernels", "Write boundary kernel tables");
  kernels->add_option("config", config, "JSON config")->required();

  std::string a;
  std::string b;
  std::string norm = "sup";
  auto* cmp = app.add_subcommand("compare", "Distance between two profiles or run directories");
  cmp->add_option("a", a, "CSV file or run directory")->required();
  cmp->add_option("b", b, "CSV file or run directory")->required();
  cmp->add_option("--norm", norm, "sup or L2");

  for (auto* sub : {run, sweep, kernels, cmp}) {
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--nodes", o.nodes, "Velocity nodes M (overrides the config)");
    sub->add_option("--cells", o.cells, "Interior spatial nodes N (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*run) return cmd_run(config, o);
    if (*sweep) return cmd_sweep(config, eps, o);
    if (*kernels) return cmd_kernels(config, o);
    if (*cmp) return cmd_compare(a, b, norm);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
