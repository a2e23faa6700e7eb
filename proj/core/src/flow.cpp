#include "nmwf/flow.hpp"

#include <cmath>
#include <vector>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"

namespace nmwf {

namespace {

// <n| L^dag L |n> for a ladder channel.
inline double channel_weight(LadderKind kind, int n) {
  return kind == LadderKind::lower ? static_cast<double>(n) : static_cast<double>(n + 1);
}

// Exact per-component decay exponents: half the integrated rate times
// the diagonal weight, for each channel.
void diagonal_exponents(const DecayModel& model, double t, double dt, int n_max,
                        std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int ch = 0; ch < model.channel_count(); ++ch) {
    const double gint = model.gamma_integral(ch, t, t + dt);
    const LadderKind kind = model.channel_kind(ch);
    for (int n = 0; n <= n_max; ++n)
      out[static_cast<std::size_t>(n)] += 0.5 * gint * channel_weight(kind, n);
  }
}

FockVector diagonal_step(const FockVector& state, double t, double dt,
                         const DecayModel& model) {
  const int n_max = state.n_max();
  std::vector<double> expo;
  diagonal_exponents(model, t, dt, n_max, expo);
  const double w0 = model.system_frequency();
  FockVector out(n_max);
  for (int n = 0; n <= n_max; ++n) {
    const double phase = -w0 * n * dt;
    const Complex factor = std::exp(-expo[static_cast<std::size_t>(n)]) *
                           Complex(std::cos(phase), std::sin(phase));
    out.at(n) = state.amplitude(n) * factor;
  }
  return out;
}

// Classical fixed-step RK4 on i dpsi/dt = H(t) psi with the diagonal
// non-Hermitian H of a ladder-channel model. Generic fallback for
// models without the exact path.
FockVector rk4_step(const FockVector& state, double t, double dt,
                    const DecayModel& model) {
  const int n_max = state.n_max();
  const double w0 = model.system_frequency();
  auto deriv_coeff = [&](double time, int n) -> Complex {
    double decay = 0.0;
    for (int ch = 0; ch < model.channel_count(); ++ch)
      decay += model.gamma(ch, time) * channel_weight(model.channel_kind(ch), n);
    return Complex(-0.5 * decay, -w0 * n);
  };
  FockVector out(n_max);
  for (int n = 0; n <= n_max; ++n) {
    const Complex c = state.amplitude(n);
    const Complex d0 = deriv_coeff(t, n);
    const Complex dm = deriv_coeff(t + dt / 2.0, n);
    const Complex d1 = deriv_coeff(t + dt, n);
    const Complex k1 = d0 * c;
    const Complex k2 = dm * (c + 0.5 * dt * k1);
    const Complex k3 = dm * (c + 0.5 * dt * k2);
    const Complex k4 = d1 * (c + dt * k3);
    out.at(n) = c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

}  // namespace

NoJumpStep evolve_nojump(const FockVector& state, double t, double dt,
                         const DecayModel& model) {
  if (!(dt > 0.0)) throw ConfigError("evolve_nojump needs dt > 0");
  FockVector out = model.has_diagonal_flow() ? diagonal_step(state, t, dt, model)
                                             : rk4_step(state, t, dt, model);
  const double in2 = state.norm2();
  const double out2 = out.norm2();
  const double shrink = 1.0 - out2 / in2;
  if (shrink > 0.1)
    throw GuardError("deterministic step shrank the norm by more than 10%; dt too large");
  return {std::move(out), shrink};
}

DoubledVector evolve_doubled(const DoubledVector& pair, double t, double dt,
                             const DecayModel& model) {
  if (!(dt > 0.0)) throw ConfigError("evolve_doubled needs dt > 0");
  const double in_norm2 = pair.norm2();
  if (!(in_norm2 > 0.0)) throw NumericalError("doubled flow on a zero pair");
  FockVector phi = model.has_diagonal_flow() ? diagonal_step(pair.upper, t, dt, model)
                                             : rk4_step(pair.upper, t, dt, model);
  FockVector psi = model.has_diagonal_flow() ? diagonal_step(pair.lower, t, dt, model)
                                             : rk4_step(pair.lower, t, dt, model);
  const double raw_norm2 = phi.norm2() + psi.norm2();
  if (!(raw_norm2 > 0.0) || std::abs(raw_norm2 / in_norm2 - 1.0) > 0.2)
    throw NumericalError("doubled-flow integrator failure: norm collapsed in one step");
  // The nonlinear compensation term of the flow is a global scalar;
  // applying it exactly amounts to restoring the pair norm.
  const double rescale = std::sqrt(in_norm2 / raw_norm2);
  phi.scale(rescale);
  psi.scale(rescale);
  DoubledVector out(std::move(phi), std::move(psi));
  if (std::abs(out.norm2() - in_norm2) > 1e-8 * in_norm2)
    throw NumericalError("doubled-flow norm drift beyond 1e-8 in one step");
  return out;
}

std::vector<double> make_substeps(const std::vector<double>& grid, double dt,
                                  std::vector<std::size_t>* grid_index) {
  if (grid.size() < 2 || grid.front() != 0.0)
    throw ConfigError("sample grid must start at 0 and contain at least two points");
  std::vector<double> times;
  times.push_back(grid[0]);
  if (grid_index) {
    grid_index->clear();
    grid_index->push_back(0);
  }
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double span = grid[k + 1] - grid[k];
    if (!(span > 0.0)) throw ConfigError("sample grid must be strictly increasing");
    const long m = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(m);
    for (long j = 1; j <= m; ++j) {
      times.push_back(j == m ? grid[k + 1] : grid[k] + h * static_cast<double>(j));
    }
    if (grid_index) grid_index->push_back(times.size() - 1);
  }
  return times;
}

double transition_rate(const FockVector& state, double t, const DecayModel& model) {
  KahanSum sum;
  for (int ch = 0; ch < model.channel_count(); ++ch) {
    const LadderKind kind = model.channel_kind(ch);
    KahanSum w;
    for (int n = 0; n <= state.n_max(); ++n)
      w.add(channel_weight(kind, n) * std::norm(state.amplitude(n)));
    sum.add(model.gamma(ch, t) * w.value());
  }
  return sum.value();
}

NoJumpPath build_nojump_path(const FockVector& psi0, const DecayModel& model,
                             const std::vector<double>& grid,
                             const DiagonalObservable& obs, double dt) {
  std::vector<std::size_t> grid_index;
  const std::vector<double> sub = make_substeps(grid, dt, &grid_index);

  NoJumpPath path;
  path.grid = grid;
  path.states.reserve(grid.size());
  path.cumulative_rate.reserve(grid.size());
  path.observable_curve.reserve(grid.size());

  FockVector psi = psi0;
  psi.normalize();
  KahanSum lambda;
  double prev_rate = transition_rate(psi, sub[0], model);

  std::size_t next_grid = 0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (next_grid < grid_index.size() && i == grid_index[next_grid]) {
      if (psi.top_population() > 1e-6)
        throw LeakageError("population reached the top of the truncated basis");
      path.states.push_back(psi);
      path.cumulative_rate.push_back(lambda.value());
      path.observable_curve.push_back(observable_expectation(psi, obs));
      ++next_grid;
    }
    if (i + 1 == sub.size()) break;
    const double h = sub[i + 1] - sub[i];
    NoJumpStep step = evolve_nojump(psi, sub[i], h, model);
    psi = std::move(step.state);
    psi.normalize();
    const double rate = transition_rate(psi, sub[i + 1], model);
    lambda.add(0.5 * h * (prev_rate + rate));
    prev_rate = rate;
  }
  return path;
}

}  // namespace nmwf
