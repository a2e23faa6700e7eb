#include "nmwf/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"
#include "nmwf/oracle.hpp"

namespace nmwf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("expected an integer for " + key);
  return static_cast<long>(x);
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::string state_kind = "fock";
  std::string state_value = "0";
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "model.theta_bar") cfg.model.theta_bar = to_double(key, value);
    else if (key == "model.g_bar") cfg.model.g_bar = to_double(key, value);
    else if (key == "model.r") cfg.model.r = to_double(key, value);
    else if (key == "sim.unravelling") {
      if (value == "mcwf") cfg.unravelling = Unravelling::mcwf;
      else if (value == "doubled") cfg.unravelling = Unravelling::doubled;
      else throw ConfigError("sim.unravelling must be 'mcwf' or 'doubled'");
    } else if (key == "sim.beta") cfg.beta = to_double(key, value);
    else if (key == "sim.dt") cfg.dt = to_double(key, value);
    else if (key == "sim.t_final") cfg.t_final = to_double(key, value);
    else if (key == "sim.samples") cfg.samples = static_cast<int>(to_long(key, value));
    else if (key == "sim.n_max") cfg.n_max = static_cast<int>(to_long(key, value));
    else if (key == "sim.n_traj") cfg.n_traj = to_long(key, value);
    else if (key == "sim.seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "state.kind") state_kind = value;
    else if (key == "state.value") state_value = value;
    else if (key == "observable") cfg.observable = value;
    else throw ConfigError("unknown config key: '" + key + "'");
  }
  if (state_kind == "fock") {
    cfg.state.kind = StateSpec::Kind::fock;
    cfg.state.fock_n = static_cast<int>(to_long("state.value", state_value));
  } else if (state_kind == "coherent") {
    cfg.state.kind = StateSpec::Kind::coherent;
    cfg.state.xi = to_double("state.value", state_value);
  } else if (state_kind == "superposition") {
    cfg.state.kind = StateSpec::Kind::superposition;
    cfg.state.superposition.clear();
    for (double a : to_double_list("state.value", state_value))
      cfg.state.superposition.push_back(Complex(a, 0.0));
  } else {
    throw ConfigError("state.kind must be fock, coherent, or superposition");
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate(const RunConfig& cfg) {
  if (!(cfg.model.theta_bar >= 0.0)) throw ConfigError("model.theta_bar must be >= 0");
  if (!(cfg.model.g_bar >= 0.0)) throw ConfigError("model.g_bar must be >= 0");
  if (!(cfg.model.r > 0.0)) throw ConfigError("model.r must be > 0");
  if (!(cfg.beta >= 1.0)) throw ConfigError("sim.beta must be >= 1");
  if (!(cfg.dt > 0.0)) throw ConfigError("sim.dt must be > 0");
  if (!(cfg.t_final > 0.0)) throw ConfigError("sim.t_final must be > 0");
  if (cfg.samples < 2) throw ConfigError("sim.samples must be at least 2");
  if (cfg.n_max < 1) throw ConfigError("sim.n_max must be at least 1");
  if (cfg.n_traj < 1) throw ConfigError("sim.n_traj must be at least 1");
  if (cfg.observable != "number") throw ConfigError("observable must be 'number'");
  if (cfg.state.kind == StateSpec::Kind::fock &&
      (cfg.state.fock_n < 0 || cfg.state.fock_n > cfg.n_max))
    throw ConfigError("fock level outside the truncated basis");
  if (cfg.unravelling == Unravelling::mcwf &&
      classify(cfg.model, cfg.t_final) == MasterEqKind::non_lindblad)
    throw ConfigError(
        "the standard unravelling needs nonnegative rates over the horizon; "
        "use the doubled unravelling for this parameter set");
}

std::vector<double> make_sample_grid(double t_final, int samples) {
  if (samples < 2) throw ConfigError("need at least two sample times");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k)
    grid.push_back(k == samples - 1
                       ? t_final
                       : t_final * static_cast<double>(k) / static_cast<double>(samples - 1));
  return grid;
}

namespace {

constexpr long kBlockSize = 1024;

// Per-block running sums, accumulated in trajectory order inside the
// block so the final block-ordered reduction is scheduling independent.
// Sums are kept in the deviation variables y_i = a_i - [not jumped]*a0,
// which vanish bitwise for never-jumped trajectories; the ensemble mean
// is then rebuilt around a0, so jump-free sample times reproduce the
// deterministic curve exactly.
struct BlockPartial {
  std::vector<double> sum_y, sum_y2, sum_ytr;
  std::vector<long> n_j;
  long multi = 0;
  long included = 0;
};

struct KahanCols {
  std::vector<KahanSum> y, y2, ytr;
  std::vector<long> n_j;
  explicit KahanCols(std::size_t n) : y(n), y2(n), ytr(n), n_j(n, 0) {}
};

template <typename Driver>
BlockPartial run_block(const Driver& driver, const RunConfig& cfg, long first, long last,
                       const std::vector<double>& a0, const std::vector<double>& tr0,
                       bool doubled) {
  const std::size_t n_samples = a0.size();
  KahanCols cols(n_samples);
  BlockPartial out;
  for (long id = first; id < last; ++id) {
    TrajectoryRecord rec = driver.run(cfg.seed, static_cast<std::uint64_t>(id));
    if (rec.multi_jump) {
      ++out.multi;
      continue;
    }
    ++out.included;
    for (std::size_t k = 0; k < n_samples; ++k) {
      const bool jumped = rec.jumped_by[k] != 0;
      const double y = jumped ? rec.values[k] : rec.values[k] - a0[k];
      cols.y[k].add(y);
      cols.y2[k].add(y * y);
      if (jumped) ++cols.n_j[k];
      if (doubled)
        cols.ytr[k].add(jumped ? rec.trace_values[k] : rec.trace_values[k] - tr0[k]);
    }
  }
  out.sum_y.resize(n_samples);
  out.sum_y2.resize(n_samples);
  out.sum_ytr.resize(n_samples);
  out.n_j.assign(cols.n_j.begin(), cols.n_j.end());
  for (std::size_t k = 0; k < n_samples; ++k) {
    out.sum_y[k] = cols.y[k].value();
    out.sum_y2[k] = cols.y2[k].value();
    out.sum_ytr[k] = cols.ytr[k].value();
  }
  return out;
}

// Mean over included trajectories of a_i = [not jumped]*base + y_i,
// arranged so n_j = 0 and sum_y = 0 return base bitwise.
double rebuilt_mean(double base, double sum_y, long n_j, long n) {
  const double jumped_frac = static_cast<double>(n_j) / static_cast<double>(n);
  return base - base * jumped_frac + sum_y / static_cast<double>(n);
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& cfg, int workers) {
  validate(cfg);
  const auto t_start = std::chrono::steady_clock::now();

  QbmModel model(cfg.model);
  TrajectoryConfig tc;
  tc.model = &model;
  tc.unravelling = cfg.unravelling;
  tc.beta = cfg.beta;
  tc.dt = cfg.dt;
  tc.horizon = cfg.t_final;
  tc.sample_grid = make_sample_grid(cfg.t_final, cfg.samples);
  tc.n_max = cfg.n_max;
  tc.initial = cfg.state;

  const bool doubled = cfg.unravelling == Unravelling::doubled;
  std::unique_ptr<McwfDriver> mcwf;
  std::unique_ptr<DoubledDriver> dbl;
  if (doubled) dbl.reset(new DoubledDriver(tc));
  else mcwf.reset(new McwfDriver(tc));

  const NoJumpPath& path = doubled ? dbl->path() : mcwf->path();
  const std::vector<double>& a0 = path.observable_curve;
  const std::vector<double> p_tot = total_transition_rate(path, cfg.beta);
  const double p_c =
      doubled ? dbl->cumulative_scaled_probability() : mcwf->cumulative_scaled_probability();
  const std::size_t n_samples = a0.size();

  const long n_blocks = (cfg.n_traj + kBlockSize - 1) / kBlockSize;
  std::vector<BlockPartial> partials(static_cast<std::size_t>(n_blocks));
  std::atomic<long> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = static_cast<int>(std::min<long>(n_workers, n_blocks));

  auto worker_fn = [&]() {
    try {
      while (true) {
        const long b = next_block.fetch_add(1);
        if (b >= n_blocks) break;
        const long first = b * kBlockSize;
        const long last = std::min(cfg.n_traj, first + kBlockSize);
        partials[static_cast<std::size_t>(b)] =
            doubled ? run_block(*dbl, cfg, first, last, a0, dbl->trace_curve(), true)
                    : run_block(*mcwf, cfg, first, last, a0, a0, false);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };

  if (n_workers == 1) {
    worker_fn();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker_fn);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Block-ordered reduction: bitwise identical for any worker count.
  KahanCols totals(n_samples);
  long multi = 0;
  long included = 0;
  for (const BlockPartial& p : partials) {
    multi += p.multi;
    included += p.included;
    for (std::size_t k = 0; k < n_samples; ++k) {
      totals.y[k].add(p.sum_y[k]);
      totals.y2[k].add(p.sum_y2[k]);
      totals.ytr[k].add(p.sum_ytr[k]);
      totals.n_j[k] += p.n_j[k];
    }
  }
  if (included < 1)
    throw NumericalError("all trajectories took more than one jump; nothing to average");

  ScalingLedger num;
  num.beta = cfg.beta;
  num.grid = tc.sample_grid;
  num.a0 = a0;
  num.p_tot = p_tot;
  num.n = included;
  num.n_j = totals.n_j;
  num.a_tot_bar.resize(n_samples);
  std::vector<double> sum_y(n_samples), sum_y2(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    num.a_tot_bar[k] = rebuilt_mean(a0[k], totals.y[k].value(), totals.n_j[k], included);
    sum_y[k] = totals.y[k].value();
    sum_y2[k] = totals.y2[k].value();
  }
  const std::vector<double> err = standard_error(sum_y, sum_y2, cfg.beta, included);

  ScalingLedger den;
  if (doubled) {
    den = num;
    den.a0 = dbl->trace_curve();
    for (std::size_t k = 0; k < n_samples; ++k)
      den.a_tot_bar[k] =
          rebuilt_mean(den.a0[k], totals.ytr[k].value(), totals.n_j[k], included);
  }

  EnsembleResult result;
  result.beta = cfg.beta;
  result.n_traj = cfg.n_traj;
  result.p_c = p_c;
  // Floored at the multi-jump fraction: once second jumps appear the
  // one-jump truncation error is at least that large.
  result.validity = std::max(validity_error(p_c),
                             static_cast<double>(multi) / static_cast<double>(cfg.n_traj));
  result.multi_jump = multi;
  result.rows.resize(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    EnsembleRow& row = result.rows[k];
    row.t = tc.sample_grid[k];
    // For the doubled scheme the deterministic reference is the
    // normalized pair expectation.
    row.a0 = doubled ? a0[k] / dbl->trace_curve()[k] : a0[k];
    row.p_tot = p_tot[k];
    row.n_j = totals.n_j[k];
    row.a_tot_bar = num.a_tot_bar[k];
    const TermBreakdown tb = decompose(num, k);
    if (doubled) {
      // Normalization ledger: the same reconstruction applied to the
      // identity observable; each term is divided by it so the term sum
      // still reproduces the reconstructed value.
      const double d = reconstruct(den, k);
      if (d == 0.0) throw NumericalError("reconstructed normalization vanished");
      row.t_a = tb.t_a / d;
      row.t_b = tb.t_b / d;
      row.t_c = tb.t_c / d;
      row.t_d = tb.t_d / d;
      row.reconstructed = (row.t_a + row.t_b) + (row.t_c + row.t_d);
      row.stderr_ = err[k] / std::abs(d);
    } else {
      row.t_a = tb.t_a;
      row.t_b = tb.t_b;
      row.t_c = tb.t_c;
      row.t_d = tb.t_d;
      row.reconstructed = tb.total();
      row.stderr_ = err[k];
    }
  }
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

CompareReport compare(const EnsembleResult& result, const std::vector<double>& oracle) {
  if (oracle.size() != result.rows.size())
    throw ConfigError("oracle curve length does not match the result table");
  CompareReport rep;
  rep.z.resize(oracle.size(), 0.0);
  long within = 0;
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    const double diff = result.rows[k].reconstructed - oracle[k];
    const double se = result.rows[k].stderr_;
    if (se > 0.0) {
      rep.z[k] = diff / se;
    } else if (std::abs(diff) <= 1e-12) {
      rep.z[k] = 0.0;
    } else {
      ++rep.flagged;
      rep.z[k] = std::numeric_limits<double>::infinity() * (diff > 0 ? 1.0 : -1.0);
    }
    if (std::abs(rep.z[k]) > rep.max_abs_z) rep.max_abs_z = std::abs(rep.z[k]);
    if (std::abs(rep.z[k]) <= 3.0) ++within;
  }
  rep.fraction_within_3 =
      static_cast<double>(within) / static_cast<double>(oracle.size());
  return rep;
}

std::vector<double> oracle_curve(const RunConfig& cfg) {
  validate(cfg);
  QbmModel model(cfg.model);
  const std::vector<double> grid = make_sample_grid(cfg.t_final, cfg.samples);
  const FockVector psi0 = make_initial_state(cfg.state, cfg.n_max);
  MasterIntegrationOptions opt;
  opt.check_positivity = classify(cfg.model, cfg.t_final) == MasterEqKind::lindblad;
  const std::vector<DensityMatrix> rho = integrate_master(pure_density(psi0), model, grid, opt);
  std::vector<double> out;
  out.reserve(rho.size());
  for (const DensityMatrix& r : rho) out.push_back(number_expectation(r));
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_result(const EnsembleResult& result, std::ostream& out) {
  out << "# beta = " << fmt(result.beta) << "\n";
  out << "# n_traj = " << result.n_traj << "\n";
  out << "# p_c = " << fmt(result.p_c) << "\n";
  out << "# validity = " << fmt(result.validity) << "\n";
  out << "# multi_jump = " << result.multi_jump << "\n";
  out << "# wall_time_s = " << fmt(result.wall_time_s) << "\n";
  out << "# compared = " << (result.compared ? 1 : 0) << "\n";
  out << "# max_abs_z = " << fmt(result.max_abs_z) << "\n";
  out << "# columns: t a0 p_tot n_j a_tot_bar reconstructed stderr T_A T_B T_C T_D\n";
  for (const EnsembleRow& r : result.rows) {
    out << fmt(r.t) << ' ' << fmt(r.a0) << ' ' << fmt(r.p_tot) << ' ' << r.n_j << ' '
        << fmt(r.a_tot_bar) << ' ' << fmt(r.reconstructed) << ' ' << fmt(r.stderr_) << ' '
        << fmt(r.t_a) << ' ' << fmt(r.t_b) << ' ' << fmt(r.t_c) << ' ' << fmt(r.t_d)
        << "\n";
  }
}

void write_result_file(const EnsembleResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  write_result(result, out);
  if (!out) throw ConfigError("failed writing output file: " + path);
}

EnsembleResult read_result(std::istream& in) {
  EnsembleResult result;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key, eq;
      hs >> key >> eq;
      if (eq != "=") continue;
      std::string value;
      hs >> value;
      if (key == "beta") result.beta = to_double(key, value);
      else if (key == "n_traj") result.n_traj = to_long(key, value);
      else if (key == "p_c") result.p_c = to_double(key, value);
      else if (key == "validity") result.validity = to_double(key, value);
      else if (key == "multi_jump") result.multi_jump = to_long(key, value);
      else if (key == "wall_time_s") result.wall_time_s = to_double(key, value);
      else if (key == "compared") result.compared = to_long(key, value) != 0;
      else if (key == "max_abs_z") result.max_abs_z = to_double(key, value);
      continue;
    }
    std::istringstream rs(line);
    EnsembleRow row;
    if (!(rs >> row.t >> row.a0 >> row.p_tot >> row.n_j >> row.a_tot_bar >>
          row.reconstructed >> row.stderr_ >> row.t_a >> row.t_b >> row.t_c >> row.t_d))
      throw ConfigError("malformed result row: '" + line + "'");
    result.rows.push_back(row);
  }
  if (result.rows.empty()) throw ConfigError("result table has no rows");
  return result;
}

EnsembleResult read_result_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open result file: " + path);
  return read_result(in);
}

RunConfig fig1_config() {
  RunConfig cfg;
  cfg.model.theta_bar = 1.2e-6;
  cfg.model.g_bar = 0.5e-8;
  cfg.model.r = 10.0;
  cfg.unravelling = Unravelling::mcwf;
  cfg.beta = 1e4;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.samples = 60;
  cfg.n_max = 30;
  cfg.n_traj = 50000;
  cfg.seed = 1;
  cfg.state.kind = StateSpec::Kind::coherent;
  cfg.state.xi = std::sqrt(2.0);
  cfg.state.xi2 = 2.0;
  return cfg;
}

RunConfig fig2_config() {
  RunConfig cfg;
  cfg.model.theta_bar = 2.4e-6;
  cfg.model.g_bar = 0.5e-8;
  cfg.model.r = 0.1;
  cfg.unravelling = Unravelling::doubled;
  cfg.beta = 1e5;
  cfg.dt = 1e-3;
  cfg.t_final = 3.0;
  cfg.samples = 60;
  cfg.n_max = 30;
  cfg.n_traj = 50000;
  cfg.seed = 1;
  cfg.state.kind = StateSpec::Kind::superposition;
  cfg.state.superposition = {Complex(1.0, 0.0), Complex(1.0, 0.0)};
  return cfg;
}

RunConfig fig3_config() { return fig2_config(); }

}  // namespace nmwf
