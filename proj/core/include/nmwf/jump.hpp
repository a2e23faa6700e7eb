#pragma once

#include <optional>
#include <vector>

#include "nmwf/fock.hpp"
#include "nmwf/model.hpp"

namespace nmwf {

struct StepProbabilities {
  std::vector<double> per_channel;  // scaled probabilities for this step
  double total = 0.0;
};

// Scaled per-step jump probabilities P_i = beta dt gamma_i <L_i^dag L_i>
// for the standard unravelling. Requires a Lindblad-regime model at t
// (nonnegative rates). Throws GuardError when the total reaches 0.1.
StepProbabilities step_probabilities_mcwf(const FockVector& psi, double t, double dt,
                                          double beta, const DecayModel& model);

// Cumulative-interval rule on [0, total); nullopt when u >= total.
// Channel order is fixed: 0 = up (raise), 1 = down (lower).
std::optional<int> decide(const StepProbabilities& probs, double u);

// L_i psi / |L_i psi|. Throws NumericalError when L_i annihilates psi.
FockVector apply_jump_mcwf(const FockVector& psi, int channel, const DecayModel& model);

// Scaled doubled-space jump rates (per unit time), using the absolute
// values of the channel coefficients.
std::vector<double> doubled_rates(const DoubledVector& pair, double t, double beta,
                                  const DecayModel& model);

// Monotone cumulative-rate table tau -> Lambda_beta(tau) with
// piecewise-linear interpolation between nodes.
struct CumulativeTable {
  std::vector<double> time;
  std::vector<double> value;

  double value_at(double t) const;
};

struct WaitingTime {
  bool beyond_horizon = false;
  double tau = 0.0;
};

// Inversion sampling: smallest tau with Lambda_beta(tau) >= -ln(1-u).
// The u = 0 boundary returns the first node where Lambda_beta > 0.
WaitingTime sample_waiting_time(const CumulativeTable& cumulative, double u);

// Doubled-space jump: theta -> (|theta| / |J_i theta|) (C_i phi, D_i psi)
// where C_i carries the sign of the channel coefficient and D_i does
// not. Norm is preserved.
DoubledVector apply_jump_doubled(const DoubledVector& pair, int channel, double t,
                                 const DecayModel& model);

}  // namespace nmwf
