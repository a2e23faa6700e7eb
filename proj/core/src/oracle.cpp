#include "nmwf/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"
#include "nmwf/flow.hpp"

namespace nmwf {

DensityMatrix pure_density(const FockVector& psi) {
  const int dim = psi.dim();
  Eigen::VectorXcd v(dim);
  for (int n = 0; n < dim; ++n) v(n) = psi.amplitude(n);
  const double norm2 = v.squaredNorm();
  if (!(norm2 > 0.0)) throw NumericalError("zero state in pure_density");
  return v * v.adjoint() / norm2;
}

double number_expectation(const DensityMatrix& rho) {
  KahanSum s;
  for (int n = 0; n < rho.rows(); ++n) s.add(n * rho(n, n).real());
  return s.value();
}

namespace {

Eigen::MatrixXcd lowering_matrix(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

std::vector<double> substep_times(double t0, double t1, double substep) {
  const double span = t1 - t0;
  const long m = std::max(1L, static_cast<long>(std::ceil(span / substep - 1e-9)));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(m) + 1);
  for (long j = 0; j <= m; ++j)
    times.push_back(j == m ? t1 : t0 + span * static_cast<double>(j) / static_cast<double>(m));
  return times;
}

}  // namespace

std::vector<DensityMatrix> integrate_master(const DensityMatrix& rho0,
                                            const DecayModel& model,
                                            const std::vector<double>& grid,
                                            const MasterIntegrationOptions& opt) {
  if (grid.empty()) throw ConfigError("empty grid in integrate_master");
  const int dim = static_cast<int>(rho0.rows());
  const Eigen::MatrixXcd a = lowering_matrix(dim);
  const Eigen::MatrixXcd adag = a.adjoint();
  const Eigen::MatrixXcd num = adag * a;
  const double w0 = model.system_frequency();
  const Complex iu(0.0, 1.0);

  std::vector<Eigen::MatrixXcd> lops;
  std::vector<Eigen::MatrixXcd> ldl;
  for (int ch = 0; ch < model.channel_count(); ++ch) {
    lops.push_back(model.channel_kind(ch) == LadderKind::lower ? a : adag);
    ldl.push_back(lops.back().adjoint() * lops.back());
  }

  auto deriv = [&](double t, const DensityMatrix& rho) {
    DensityMatrix d = -iu * w0 * (num * rho - rho * num);
    for (int ch = 0; ch < model.channel_count(); ++ch) {
      const double g = model.gamma(ch, t);
      d += g * (lops[static_cast<std::size_t>(ch)] * rho *
                    lops[static_cast<std::size_t>(ch)].adjoint() -
                0.5 * (ldl[static_cast<std::size_t>(ch)] * rho +
                       rho * ldl[static_cast<std::size_t>(ch)]));
    }
    return d;
  };

  std::vector<DensityMatrix> out;
  out.reserve(grid.size());
  DensityMatrix rho = rho0;

  auto check_and_record = [&](DensityMatrix& r) {
    const double herm = (r - r.adjoint().eval()).cwiseAbs().maxCoeff();
    if (herm > opt.hermiticity_tol)
      throw NumericalError("density matrix lost hermiticity during integration");
    r = 0.5 * (r + r.adjoint().eval());
    const double tr = r.trace().real();
    if (std::abs(tr - 1.0) > opt.trace_tol)
      throw NumericalError("density matrix trace drifted during integration");
    r /= tr;
    if (opt.check_positivity) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(r, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-8)
        throw NumericalError("density matrix developed a negative eigenvalue");
    }
    out.push_back(r);
  };

  if (grid.front() == 0.0) {
    check_and_record(rho);
  }
  std::size_t start = grid.front() == 0.0 ? 1 : 0;
  double tcur = 0.0;
  for (std::size_t k = start; k < grid.size(); ++k) {
    const std::vector<double> times = substep_times(tcur, grid[k], opt.substep);
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      const double t = times[j];
      const double h = times[j + 1] - t;
      const DensityMatrix k1 = deriv(t, rho);
      const DensityMatrix k2 = deriv(t + h / 2.0, rho + (h / 2.0) * k1);
      const DensityMatrix k3 = deriv(t + h / 2.0, rho + (h / 2.0) * k2);
      const DensityMatrix k4 = deriv(t + h, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    tcur = grid[k];
    check_and_record(rho);
  }
  return out;
}

std::vector<double> heating_moment(double n0, const OhmicParams& p,
                                   const std::vector<double>& grid, double substep) {
  if (grid.empty()) throw ConfigError("empty grid in heating_moment");
  auto f = [&](double t, double n) {
    return delta_coefficient(t, p) - gamma_coefficient(t, p) * (2.0 * n + 1.0);
  };
  std::vector<double> out;
  out.reserve(grid.size());
  double n = n0;
  double tcur = 0.0;
  std::size_t start = 0;
  if (grid.front() == 0.0) {
    out.push_back(n);
    start = 1;
  }
  for (std::size_t k = start; k < grid.size(); ++k) {
    const std::vector<double> times = substep_times(tcur, grid[k], substep);
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      const double t = times[j];
      const double h = times[j + 1] - t;
      const double k1 = f(t, n);
      const double k2 = f(t + h / 2.0, n + (h / 2.0) * k1);
      const double k3 = f(t + h / 2.0, n + (h / 2.0) * k2);
      const double k4 = f(t + h, n + h * k3);
      n += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    tcur = grid[k];
    out.push_back(n);
  }
  return out;
}

namespace {

inline double ladder_weight(LadderKind kind, int n) {
  return kind == LadderKind::lower ? static_cast<double>(n) : static_cast<double>(n + 1);
}

double weight_expectation(const FockVector& state, LadderKind kind) {
  KahanSum w;
  for (int n = 0; n <= state.n_max(); ++n)
    w.add(ladder_weight(kind, n) * std::norm(state.amplitude(n)));
  return w.value();
}

// Per-interval diagonal flow multipliers on a node set.
std::vector<std::vector<Complex>> node_multipliers(const DecayModel& model,
                                                   const std::vector<double>& nodes,
                                                   int n_max) {
  std::vector<std::vector<Complex>> mult(nodes.size() - 1);
  const double w0 = model.system_frequency();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double h = nodes[i + 1] - nodes[i];
    std::vector<double> expo(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int ch = 0; ch < model.channel_count(); ++ch) {
      const double gint = model.gamma_integral(ch, nodes[i], nodes[i + 1]);
      for (int n = 0; n <= n_max; ++n)
        expo[static_cast<std::size_t>(n)] +=
            0.5 * gint * ladder_weight(model.channel_kind(ch), n);
    }
    mult[i].resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
      const double phase = -w0 * n * h;
      mult[i][static_cast<std::size_t>(n)] =
          std::exp(-expo[static_cast<std::size_t>(n)]) *
          Complex(std::cos(phase), std::sin(phase));
    }
  }
  return mult;
}

void apply_mult(FockVector& state, const std::vector<Complex>& m) {
  for (int n = 0; n <= state.n_max(); ++n)
    state.at(n) *= m[static_cast<std::size_t>(n)];
}

}  // namespace

std::vector<double> path_integral_expectation(const FockVector& psi0,
                                              const DecayModel& model,
                                              const std::vector<double>& grid,
                                              const DiagonalObservable& obs,
                                              double dt, int nodes_min) {
  if (!model.has_diagonal_flow())
    throw ConfigError("the quadrature oracle requires a diagonal-flow model");
  const double horizon = grid.back();
  const double h = std::min(dt, horizon / static_cast<double>(nodes_min));
  std::vector<std::size_t> gidx;
  const std::vector<double> nodes = make_substeps(grid, h, &gidx);
  const int n_max = psi0.n_max();
  const std::vector<std::vector<Complex>> mult = node_multipliers(model, nodes, n_max);

  // Deterministic no-jump path on the nodes with its cumulative rate.
  std::vector<FockVector> g;
  g.reserve(nodes.size());
  std::vector<double> lambda(nodes.size(), 0.0);
  {
    FockVector psi = psi0;
    psi.normalize();
    KahanSum acc;
    double prev = transition_rate(psi, nodes[0], model);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      g.push_back(psi);
      lambda[j] = acc.value();
      if (j + 1 == nodes.size()) break;
      apply_mult(psi, mult[j]);
      psi.normalize();
      const double r = transition_rate(psi, nodes[j + 1], model);
      acc.add(0.5 * (nodes[j + 1] - nodes[j]) * (prev + r));
      prev = r;
    }
  }

  std::vector<KahanSum> result(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    result[k].add((1.0 - lambda[gidx[k]]) * observable_expectation(g[gidx[k]], obs));

  // Integral over the jump time s: per node, jump on each channel, then
  // one deterministic sweep to the horizon recording the normalized
  // expectation at every later sample time. Composite trapezoid in s.
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (int ch = 0; ch < model.channel_count(); ++ch) {
      const double weight =
          model.gamma(ch, nodes[j]) * weight_expectation(g[j], model.channel_kind(ch));
      if (weight == 0.0) continue;
      LadderResult jumped = ladder_apply(model.channel_kind(ch), g[j]);
      const double nrm = jumped.state.norm();
      if (!(nrm > 0.0)) continue;
      jumped.state.scale(1.0 / nrm);
      FockVector psi = std::move(jumped.state);
      std::size_t k = 0;
      while (k < grid.size() && gidx[k] < j) ++k;
      for (std::size_t i = j; i < nodes.size(); ++i) {
        if (k < grid.size() && gidx[k] == i) {
          double c = 0.0;
          if (j > 0) c += 0.5 * (nodes[j] - nodes[j - 1]);
          if (j < gidx[k]) c += 0.5 * (nodes[j + 1] - nodes[j]);
          if (c > 0.0)
            result[k].add(c * weight * observable_expectation(psi, obs));
          ++k;
        }
        if (i + 1 == nodes.size() || k == grid.size()) break;
        apply_mult(psi, mult[i]);
        psi.normalize();
      }
    }
  }

  std::vector<double> out;
  out.reserve(grid.size());
  for (const KahanSum& s : result) out.push_back(s.value());
  return out;
}

double path_integral_expectation(const FockVector& psi0, const DecayModel& model,
                                 double t, const DiagonalObservable& obs,
                                 double dt, int nodes_min) {
  if (!(t > 0.0)) {
    FockVector psi = psi0;
    return observable_expectation(psi, obs);
  }
  const std::vector<double> grid = {0.0, t};
  return path_integral_expectation(psi0, model, grid, obs, dt, nodes_min).back();
}

}  // namespace nmwf
