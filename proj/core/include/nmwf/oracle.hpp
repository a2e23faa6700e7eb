#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nmwf/fock.hpp"
#include "nmwf/model.hpp"

namespace nmwf {

using DensityMatrix = Eigen::MatrixXcd;

DensityMatrix pure_density(const FockVector& psi);
double number_expectation(const DensityMatrix& rho);

struct MasterIntegrationOptions {
  double substep = 1e-3;
  // Eigenvalue floor check at sample times (Lindblad-type runs only;
  // transient negativity is expected otherwise).
  bool check_positivity = false;
  double trace_tol = 1e-10;
  double hermiticity_tol = 1e-10;
};

// Fixed-step RK4 integration of the secular master equation, including
// the free commutator -i w0 [a^dag a, rho]. Trace and hermiticity are
// enforced at every grid point.
std::vector<DensityMatrix> integrate_master(const DensityMatrix& rho0,
                                            const DecayModel& model,
                                            const std::vector<double>& grid,
                                            const MasterIntegrationOptions& opt = {});

// Scalar moment equation d<n>/dt = Delta(t) - Gamma(t)(2<n> + 1),
// integrated with the same fixed-step RK4.
std::vector<double> heating_moment(double n0, const OhmicParams& p,
                                   const std::vector<double>& grid,
                                   double substep = 1e-3);

// Deterministic quadrature of the one-jump propagator expansion:
// [1 - Lambda(t)] <A>_0(t) plus the integral over jump times and
// channels of the post-jump deterministic expectation. Evaluated at
// every grid time; composite trapezoid over jump times with node
// spacing min(dt, t_final/nodes_min).
std::vector<double> path_integral_expectation(const FockVector& psi0,
                                              const DecayModel& model,
                                              const std::vector<double>& grid,
                                              const DiagonalObservable& obs,
                                              double dt = 1e-3,
                                              int nodes_min = 1000);

// Single-time convenience wrapper.
double path_integral_expectation(const FockVector& psi0, const DecayModel& model,
                                 double t, const DiagonalObservable& obs,
                                 double dt = 1e-3, int nodes_min = 1000);

}  // namespace nmwf
