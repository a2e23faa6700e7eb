#include <doctest.h>

#include <cmath>

#include "nmwf/errors.hpp"
#include "nmwf/estimator.hpp"

using namespace nmwf;

namespace {

ScalingLedger make_ledger() {
  ScalingLedger l;
  l.beta = 2.0;
  l.grid = {0.0, 1.0};
  l.a0 = {2.0, 2.0};
  l.p_tot = {0.0, 0.01};
  l.n = 100;
  l.n_j = {0, 1};
  l.a_tot_bar = {2.0, 1.99};
  return l;
}

}  // namespace

TEST_CASE("reconstruction reference arithmetic") {
  const ScalingLedger l = make_ledger();
  // (1 - 0.01/2 - 99/200)*2 + 1.99/2 = 1.995
  CHECK(reconstruct(l, 1) == doctest::Approx(1.995).epsilon(1e-15));
}

TEST_CASE("t = 0 collapses to the deterministic value bitwise") {
  ScalingLedger l = make_ledger();
  l.a0[0] = 2.0000000000000004;  // deliberately off the representable sweet spot
  l.a_tot_bar[0] = l.a0[0];
  CHECK(reconstruct(l, 0) == l.a0[0]);
  const TermBreakdown t = decompose(l, 0);
  CHECK(t.t_b == -0.0);
  CHECK(t.t_c == -t.t_d);
}

TEST_CASE("term sum is the reconstruction, bitwise") {
  ScalingLedger l = make_ledger();
  l.beta = 7.3;
  l.a0 = {1.234567, 0.987654};
  l.p_tot = {0.003, 0.017};
  l.n_j = {2, 9};
  l.a_tot_bar = {1.2401, 0.9914};
  for (std::size_t k = 0; k < 2; ++k) {
    const TermBreakdown t = decompose(l, k);
    CHECK((t.t_a + t.t_b) + (t.t_c + t.t_d) == reconstruct(l, k));
    CHECK(t.total() == reconstruct(l, k));
  }
}

TEST_CASE("beta = 1 with matching jump fraction returns the plain mean") {
  ScalingLedger l;
  l.beta = 1.0;
  l.grid = {0.0, 1.0};
  l.a0 = {2.0, 1.5};
  l.n = 1000;
  l.n_j = {0, 40};
  l.p_tot = {0.0, 0.04};  // n_j/N = p_tot exactly
  l.a_tot_bar = {2.0, 1.47};
  CHECK(reconstruct(l, 1) == doctest::Approx(l.a_tot_bar[1]).epsilon(1e-14));
}

TEST_CASE("affine identity in the deviation statistics") {
  const ScalingLedger l = make_ledger();
  // reconstruct = (1 - P/beta)*a0 + mean(y)/beta with
  // mean(y) = a_tot_bar - (N - N_j)/N * a0.
  const std::size_t k = 1;
  const double mean_y =
      l.a_tot_bar[k] - static_cast<double>(l.n - l.n_j[k]) / l.n * l.a0[k];
  CHECK(reconstruct(l, k) ==
        doctest::Approx((1.0 - l.p_tot[k] / l.beta) * l.a0[k] + mean_y / l.beta)
            .epsilon(1e-14));
}

TEST_CASE("deterministic limit: no jumps anywhere") {
  ScalingLedger l = make_ledger();
  l.n_j = {0, 0};
  l.a_tot_bar = l.a0;
  // t_c + t_d cancels exactly, so the result is the rounded sum a0 + t_b.
  const TermBreakdown t = decompose(l, 1);
  CHECK(reconstruct(l, 1) == l.a0[1] + t.t_b);
  CHECK(reconstruct(l, 1) - l.a0[1] == doctest::Approx(t.t_b).epsilon(1e-12));
}

TEST_CASE("standard error") {
  CHECK(standard_error({0.0, 0.0}, {0.0, 0.0}, 2.0, 100) ==
        std::vector<double>{0.0, 0.0});
  // Two samples y = {1, 3}: mean 2, var 2, std sqrt(2).
  const std::vector<double> err = standard_error({4.0}, {10.0}, 2.0, 2);
  CHECK(err[0] == doctest::Approx(std::sqrt(2.0) / (2.0 * std::sqrt(2.0))));
  // Degenerate ensembles return zeros rather than NaN.
  CHECK(standard_error({1.0}, {1.0}, 1.0, 1)[0] == 0.0);
  CHECK_THROWS_AS(standard_error({1.0}, {1.0, 2.0}, 1.0, 10), ConfigError);
}

TEST_CASE("total transition rate scaling and validity passthrough") {
  NoJumpPath path;
  path.grid = {0.0, 1.0};
  path.cumulative_rate = {0.0, 3e-5};
  const std::vector<double> p = total_transition_rate(path, 1e4);
  CHECK(p[1] == doctest::Approx(0.3));
  CHECK(validity_error(0.3) == 0.3);
}

TEST_CASE("ledger consistency checks") {
  ScalingLedger l = make_ledger();
  l.n = 0;
  CHECK_THROWS_AS(reconstruct(l, 0), ConfigError);
  l = make_ledger();
  l.a0.pop_back();
  CHECK_THROWS_AS(reconstruct(l, 0), ConfigError);
  l = make_ledger();
  CHECK_THROWS_AS(reconstruct(l, 5), ConfigError);
}
