#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmwf/estimator.hpp"
#include "nmwf/model.hpp"
#include "nmwf/trajectory.hpp"

namespace nmwf {

struct RunConfig {
  OhmicParams model;
  Unravelling unravelling = Unravelling::mcwf;
  double beta = 1.0;
  double dt = 1e-3;
  double t_final = 1.0;
  int samples = 60;
  int n_max = 30;
  long n_traj = 1;
  std::uint64_t seed = 1;
  StateSpec state;
  std::string observable = "number";
};

// Flat key = value file, '#' comments. Keys as named in RunConfig
// sections: model.theta_bar, sim.beta, state.kind, ...
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);
void validate(const RunConfig& cfg);

std::vector<double> make_sample_grid(double t_final, int samples);

struct EnsembleRow {
  double t = 0.0;
  double a0 = 0.0;
  double p_tot = 0.0;
  long n_j = 0;
  double a_tot_bar = 0.0;
  double reconstructed = 0.0;
  double stderr_ = 0.0;
  double t_a = 0.0, t_b = 0.0, t_c = 0.0, t_d = 0.0;
};

struct EnsembleResult {
  double beta = 1.0;
  long n_traj = 0;
  double p_c = 0.0;
  double validity = 0.0;
  long multi_jump = 0;
  double wall_time_s = 0.0;
  bool compared = false;
  double max_abs_z = 0.0;
  std::vector<EnsembleRow> rows;
};

// Fans n_traj trajectories over a worker pool in fixed 1024-trajectory
// blocks; block partials are reduced in block order, so the result is
// bitwise identical for any worker count. workers <= 0 picks the
// hardware concurrency.
EnsembleResult run_ensemble(const RunConfig& cfg, int workers = 0);

struct CompareReport {
  std::vector<double> z;
  double max_abs_z = 0.0;
  double fraction_within_3 = 0.0;
  long flagged = 0;  // stderr = 0 with a non-negligible difference
};

CompareReport compare(const EnsembleResult& result, const std::vector<double>& oracle_curve);

// Master-equation oracle curve <n>(t) for the run's model/state/grid.
std::vector<double> oracle_curve(const RunConfig& cfg);

// Result table: '#' summary header then one row per sample time, 11
// space-separated columns, 17 significant digits (lossless round-trip).
void write_result(const EnsembleResult& result, std::ostream& out);
void write_result_file(const EnsembleResult& result, const std::string& path);
EnsembleResult read_result(std::istream& in);
EnsembleResult read_result_file(const std::string& path);

RunConfig fig1_config();  // Lindblad preset, coherent state
RunConfig fig2_config();  // non-Lindblad preset, doubled space
RunConfig fig3_config();  // fig2 with the term table emphasized

}  // namespace nmwf
