#pragma once

#include <cstddef>
#include <vector>

#include "nmwf/fock.hpp"
#include "nmwf/model.hpp"

namespace nmwf {

struct NoJumpStep {
  FockVector state;  // unnormalized
  double shrink;     // 1 - |out|^2 / |in|^2
};

// One deterministic step of the non-Hermitian Schroedinger evolution
// with unscaled rates. Throws GuardError when shrink exceeds 0.1.
NoJumpStep evolve_nojump(const FockVector& state, double t, double dt,
                         const DecayModel& model);

// One step of the norm-conserving doubled-space flow. Both components
// follow the same non-Hermitian generator (A = B for the shipped
// models); the pair is rescaled so the combined norm is conserved
// exactly. Throws NumericalError on norm drift beyond 1e-8 in a step.
DoubledVector evolve_doubled(const DoubledVector& pair, double t, double dt,
                             const DecayModel& model);

// Deterministic no-jump reference path: normalized states, the
// cumulative unscaled transition rate Lambda(t), and the observable
// curve <A>_0(t) on the sample grid.
struct NoJumpPath {
  std::vector<double> grid;
  std::vector<FockVector> states;
  std::vector<double> cumulative_rate;   // Lambda(t_k)
  std::vector<double> observable_curve;  // <A>_0(t_k)
};

NoJumpPath build_nojump_path(const FockVector& psi0, const DecayModel& model,
                             const std::vector<double>& grid,
                             const DiagonalObservable& obs, double dt = 1e-3);

// Concatenation of each grid interval subdivided into steps of size at
// most dt. Grid points always land on substep boundaries;
// grid_index[k] is the substep index of grid[k].
std::vector<double> make_substeps(const std::vector<double>& grid, double dt,
                                  std::vector<std::size_t>* grid_index = nullptr);

// Unscaled total transition rate sum_i gamma_i(t) |L_i psi|^2 for a
// normalized state.
double transition_rate(const FockVector& state, double t, const DecayModel& model);

}  // namespace nmwf
