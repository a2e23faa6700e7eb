#include "nmwf/estimator.hpp"

#include <cmath>

#include "nmwf/errors.hpp"

namespace nmwf {

std::vector<double> total_transition_rate(const NoJumpPath& path, double beta) {
  std::vector<double> p;
  p.reserve(path.cumulative_rate.size());
  for (double lambda : path.cumulative_rate) p.push_back(beta * lambda);
  return p;
}

namespace {

void check_index(const ScalingLedger& ledger, std::size_t k) {
  if (k >= ledger.grid.size() || ledger.a0.size() != ledger.grid.size() ||
      ledger.p_tot.size() != ledger.grid.size() ||
      ledger.n_j.size() != ledger.grid.size() ||
      ledger.a_tot_bar.size() != ledger.grid.size())
    throw ConfigError("scaling ledger columns are inconsistent");
  if (ledger.n <= 0) throw ConfigError("scaling ledger has an empty ensemble");
}

}  // namespace

TermBreakdown decompose(const ScalingLedger& ledger, std::size_t k) {
  check_index(ledger, k);
  const double a0 = ledger.a0[k];
  const double beta = ledger.beta;
  TermBreakdown t;
  t.t_a = a0;
  // Grouped so the t=0 ledger (p_tot = n_j = 0, a_tot_bar = a0) cancels
  // bitwise: t_b = -0 and t_c = -(a0/beta) = -t_d.
  t.t_b = -(ledger.p_tot[k] * a0) / beta;
  const double survivors =
      static_cast<double>(ledger.n - ledger.n_j[k]) / static_cast<double>(ledger.n);
  t.t_c = -(survivors * a0) / beta;
  t.t_d = ledger.a_tot_bar[k] / beta;
  return t;
}

double reconstruct(const ScalingLedger& ledger, std::size_t k) {
  return decompose(ledger, k).total();
}

std::vector<double> standard_error(const std::vector<double>& sum_y,
                                   const std::vector<double>& sum_y2,
                                   double beta, long n) {
  if (sum_y.size() != sum_y2.size())
    throw ConfigError("mismatched running-sum columns");
  std::vector<double> err(sum_y.size(), 0.0);
  if (n < 2) return err;
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < sum_y.size(); ++k) {
    const double var = (sum_y2[k] - sum_y[k] * sum_y[k] / dn) / (dn - 1.0);
    err[k] = std::sqrt(var > 0.0 ? var : 0.0) / (beta * std::sqrt(dn));
  }
  return err;
}

double validity_error(double p_c) { return p_c; }

}  // namespace nmwf
