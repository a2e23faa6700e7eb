// Command-line front end for the trajectory engine: coefficient tables,
// ensemble runs, deterministic reference curves, and result comparison.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmwf/ensemble.hpp"
#include "nmwf/errors.hpp"
#include "nmwf/model.hpp"
#include "nmwf/oracle.hpp"

namespace {

struct ComparisonFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw nmwf::ConfigError("cannot open output file: " + out_path);
  out << text;
}

std::string coeffs_table(const nmwf::OhmicParams& p, double t_final, int samples) {
  const nmwf::MasterEqKind kind = nmwf::classify(p, t_final);
  std::ostringstream out;
  out << "# theta_bar = " << fmt(p.theta_bar) << "\n";
  out << "# g_bar = " << fmt(p.g_bar) << "\n";
  out << "# r = " << fmt(p.r) << "\n";
  out << "# regime = "
      << (kind == nmwf::MasterEqKind::lindblad ? "lindblad" : "non_lindblad") << "\n";
  out << "# columns: t delta gamma gamma_up gamma_down\n";
  for (double t : nmwf::make_sample_grid(t_final, samples)) {
    const nmwf::ChannelRates rates = nmwf::channel_rates(t, p);
    out << fmt(t) << ' ' << fmt(nmwf::delta_coefficient(t, p)) << ' '
        << fmt(nmwf::gamma_coefficient(t, p)) << ' ' << fmt(rates.gamma_up) << ' '
        << fmt(rates.gamma_down) << "\n";
  }
  return out.str();
}

std::string oracle_table(const nmwf::RunConfig& cfg) {
  const std::vector<double> grid = nmwf::make_sample_grid(cfg.t_final, cfg.samples);
  const std::vector<double> curve = nmwf::oracle_curve(cfg);
  std::ostringstream out;
  out << "# columns: t value\n";
  for (std::size_t k = 0; k < grid.size(); ++k)
    out << fmt(grid[k]) << ' ' << fmt(curve[k]) << "\n";
  return out.str();
}

std::vector<double> read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw nmwf::ConfigError("cannot open curve file: " + path);
  std::vector<double> curve;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double t = 0.0, v = 0.0;
    if (!(ls >> t >> v)) throw nmwf::ConfigError("malformed curve row: '" + line + "'");
    curve.push_back(v);
  }
  if (curve.empty()) throw nmwf::ConfigError("curve file has no rows");
  return curve;
}

std::string report_text(const nmwf::CompareReport& rep) {
  std::ostringstream out;
  out << "# max_abs_z = " << fmt(rep.max_abs_z) << "\n";
  out << "# fraction_within_3 = " << fmt(rep.fraction_within_3) << "\n";
  out << "# flagged = " << rep.flagged << "\n";
  for (std::size_t k = 0; k < rep.z.size(); ++k)
    out << k << ' ' << fmt(rep.z[k]) << "\n";
  return out.str();
}

void check_report(const nmwf::CompareReport& rep) {
  if (rep.flagged > 0 || rep.max_abs_z > 4.0)
    throw ComparisonFailure("comparison failed: max |z| = " + fmt(rep.max_abs_z) +
                            ", flagged = " + std::to_string(rep.flagged));
}

void apply_overrides(nmwf::RunConfig& cfg, long n_traj, long seed) {
  if (n_traj > 0) cfg.n_traj = n_traj;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
}

int run_figure(nmwf::RunConfig cfg, long n_traj, long seed, bool full, int workers,
               const std::string& out_path) {
  apply_overrides(cfg, n_traj, seed);
  if (full) cfg.n_traj = 600000;
  nmwf::EnsembleResult result = nmwf::run_ensemble(cfg, workers);
  const nmwf::CompareReport rep = nmwf::compare(result, nmwf::oracle_curve(cfg));
  result.compared = true;
  result.max_abs_z = rep.max_abs_z;
  std::ostringstream out;
  nmwf::write_result(result, out);
  write_text(out_path, out.str());
  check_report(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo wave-function engine for time-local open-system models"};
  app.require_subcommand(1);

  long n_traj = -1;
  long seed = -1;
  int workers = 0;
  std::string out_path;
  app.add_option("--n-traj", n_traj, "Override the trajectory count");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--workers", workers, "Worker threads (0 = hardware)");
  app.add_option("--out", out_path, "Output file ('-' = stdout)");

  auto* coeffs = app.add_subcommand("coeffs", "Tabulate the decay coefficients");
  double theta_bar = 1.2e-6, g_bar = 0.5e-8, r = 10.0, t_final = 5.0;
  int samples = 60;
  coeffs->add_option("--theta-bar", theta_bar, "Scaled temperature coefficient");
  coeffs->add_option("--g-bar", g_bar, "Scaled damping coefficient");
  coeffs->add_option("--r", r, "Cutoff-to-system frequency ratio");
  coeffs->add_option("--t-final", t_final, "Horizon");
  coeffs->add_option("--samples", samples, "Sample count");

  std::string run_config, oracle_config, cmp_result, cmp_oracle;
  auto* run = app.add_subcommand("run", "Run a trajectory ensemble from a config file");
  run->add_option("config", run_config, "Config file")->required();
  auto* oracle = app.add_subcommand("oracle", "Deterministic reference curve for a config");
  oracle->add_option("config", oracle_config, "Config file")->required();
  auto* cmp = app.add_subcommand("compare", "Compare a result table against a curve");
  cmp->add_option("result", cmp_result, "Result table file")->required();
  cmp->add_option("oracle", cmp_oracle, "Curve file from the oracle subcommand")->required();

  bool full = false;
  auto* fig1 = app.add_subcommand("fig1", "Heating preset, standard unravelling");
  auto* fig2 = app.add_subcommand("fig2", "Low-cutoff preset, doubled unravelling");
  auto* fig3 = app.add_subcommand("fig3", "Low-cutoff preset with the term table");
  for (auto* f : {fig1, fig2, fig3})
    f->add_flag("--full", full, "Use the full 600000-trajectory ensemble");

  try {
    app.parse(argc, argv);

    if (coeffs->parsed()) {
      write_text(out_path, coeffs_table({theta_bar, g_bar, r}, t_final, samples));
      return 0;
    }
    if (run->parsed()) {
      nmwf::RunConfig cfg = nmwf::parse_config_file(run_config);
      apply_overrides(cfg, n_traj, seed);
      nmwf::EnsembleResult result = nmwf::run_ensemble(cfg, workers);
      std::ostringstream out;
      nmwf::write_result(result, out);
      write_text(out_path, out.str());
      return 0;
    }
    if (oracle->parsed()) {
      write_text(out_path, oracle_table(nmwf::parse_config_file(oracle_config)));
      return 0;
    }
    if (cmp->parsed()) {
      const nmwf::EnsembleResult result = nmwf::read_result_file(cmp_result);
      const nmwf::CompareReport rep = nmwf::compare(result, read_curve_file(cmp_oracle));
      write_text(out_path, report_text(rep));
      check_report(rep);
      return 0;
    }
    if (fig1->parsed()) return run_figure(nmwf::fig1_config(), n_traj, seed, full, workers, out_path);
    if (fig2->parsed()) return run_figure(nmwf::fig2_config(), n_traj, seed, full, workers, out_path);
    if (fig3->parsed()) return run_figure(nmwf::fig3_config(), n_traj, seed, full, workers, out_path);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const nmwf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ComparisonFailure& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
