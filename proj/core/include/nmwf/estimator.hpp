#pragma once

#include <cstddef>
#include <vector>

#include "nmwf/flow.hpp"

namespace nmwf {

// Everything the reconstruction consumes, per sample time.
struct ScalingLedger {
  double beta = 1.0;
  std::vector<double> grid;
  std::vector<double> a0;        // <A>_0(t_k) along the deterministic path
  std::vector<double> p_tot;     // beta * Lambda(t_k)
  long n = 0;                    // ensemble size (multi-jump excluded)
  std::vector<long> n_j;         // jumped count per sample time
  std::vector<double> a_tot_bar; // ensemble mean over all realizations
};

// The four contributions whose sum is the reconstructed expectation.
struct TermBreakdown {
  double t_a = 0.0;  // <A>_0
  double t_b = 0.0;  // -P_tot <A>_0 / beta
  double t_c = 0.0;  // -[(N - N_j)/(beta N)] <A>_0
  double t_d = 0.0;  // <A-bar>_tot / beta
  double total() const { return (t_a + t_b) + (t_c + t_d); }
};

// P_tot(t_k) = beta * Lambda(t_k) from the no-jump path.
std::vector<double> total_transition_rate(const NoJumpPath& path, double beta);

TermBreakdown decompose(const ScalingLedger& ledger, std::size_t k);

// Reconstructed <A>(t_k); same arithmetic as decompose(...).total().
double reconstruct(const ScalingLedger& ledger, std::size_t k);

// stderr(t_k) = sample_std({y_i}) / (beta sqrt(N)) computed from the
// running sums of y_i = a_i - [not jumped] * a0 over the ensemble.
std::vector<double> standard_error(const std::vector<double>& sum_y,
                                   const std::vector<double>& sum_y2,
                                   double beta, long n);

// One-jump validity estimate: the cumulative scaled probability itself.
double validity_error(double p_c);

}  // namespace nmwf
