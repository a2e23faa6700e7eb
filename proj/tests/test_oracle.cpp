#include <doctest.h>

#include <cmath>

#include "nmwf/ensemble.hpp"
#include "nmwf/errors.hpp"
#include "nmwf/oracle.hpp"

using namespace nmwf;

namespace {

const OhmicParams kHeating{1.2e-6, 0.5e-8, 10.0};
const OhmicParams kLowCutoff{2.4e-6, 0.5e-8, 0.1};

FockVector fock(int n, int n_max) {
  FockVector v(n_max);
  v.at(n) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("pure density and number expectation") {
  const DensityMatrix rho = pure_density(fock(2, 4));
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  CHECK(number_expectation(rho) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pure_density(FockVector(3)), NumericalError);
}

TEST_CASE("constant-rate amplitude damping decays exponentially") {
  const double lam = 0.35;
  CallableModel model(0.0, {{LadderKind::lower, [=](double) { return lam; }}});
  const std::vector<double> grid = {0.0, 0.5, 1.0, 2.0, 4.0};
  MasterIntegrationOptions opt;
  opt.check_positivity = true;
  const std::vector<DensityMatrix> rho =
      integrate_master(pure_density(fock(1, 4)), model, grid, opt);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(std::abs(number_expectation(rho[k]) - std::exp(-lam * grid[k])) < 1e-8);
}

TEST_CASE("moment equation matches the full master integration") {
  SUBCASE("heating parameters, coherent-mean start") {
    QbmModel model(kHeating);
    StateSpec s;
    s.kind = StateSpec::Kind::coherent;
    s.xi = std::sqrt(2.0);
    s.xi2 = 2.0;
    const std::vector<double> grid = make_sample_grid(5.0, 11);
    const std::vector<DensityMatrix> rho =
        integrate_master(pure_density(make_initial_state(s, 30)), model, grid);
    const std::vector<double> mom = heating_moment(2.0, kHeating, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(std::abs(number_expectation(rho[k]) - mom[k]) < 1e-8);
  }
  SUBCASE("low-cutoff parameters, two-level start") {
    QbmModel model(kLowCutoff);
    StateSpec s;
    s.kind = StateSpec::Kind::superposition;
    s.superposition = {Complex(1.0, 0.0), Complex(1.0, 0.0)};
    const std::vector<double> grid = make_sample_grid(3.0, 11);
    const FockVector psi0 = make_initial_state(s, 20);
    const std::vector<DensityMatrix> rho =
        integrate_master(pure_density(psi0), model, grid);
    const double n0 = observable_expectation(psi0, DiagonalObservable::number(20));
    const std::vector<double> mom = heating_moment(n0, kLowCutoff, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(std::abs(number_expectation(rho[k]) - mom[k]) < 1e-8);
  }
}

TEST_CASE("low-cutoff heating is non-monotone") {
  const std::vector<double> grid = make_sample_grid(3.0, 61);
  const std::vector<double> mom = heating_moment(0.5, kLowCutoff, grid);
  bool dips = false;
  for (std::size_t k = 1; k < mom.size(); ++k)
    if (mom[k] < mom[k - 1] - 1e-12) dips = true;
  CHECK(dips);
}

TEST_CASE("quadrature oracle: dissipation-free limit is exact") {
  CallableModel free(1.7, {{LadderKind::lower, [](double) { return 0.0; }}});
  StateSpec s;
  s.kind = StateSpec::Kind::superposition;
  s.superposition = {Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(0.5, 0.0)};
  const FockVector psi0 = make_initial_state(s, 8);
  const DiagonalObservable obs = DiagonalObservable::number(8);
  const double a0 = observable_expectation(psi0, obs);
  const std::vector<double> curve =
      path_integral_expectation(psi0, free, {0.0, 0.5, 1.0}, obs);
  for (double v : curve) CHECK(v == doctest::Approx(a0).epsilon(1e-13));
}

TEST_CASE("quadrature oracle tracks the master equation") {
  QbmModel model(kHeating);
  StateSpec s;
  s.kind = StateSpec::Kind::coherent;
  s.xi = std::sqrt(2.0);
  s.xi2 = 2.0;
  const FockVector psi0 = make_initial_state(s, 30);
  const DiagonalObservable obs = DiagonalObservable::number(30);
  const std::vector<double> grid = make_sample_grid(5.0, 11);
  const std::vector<double> quad = path_integral_expectation(psi0, model, grid, obs);
  const std::vector<DensityMatrix> rho = integrate_master(pure_density(psi0), model, grid);
  // The neglected weight is the two-jump probability ~ Lambda^2/2;
  // Lambda(5) ~ 2.4e-5 here, so 1e-8 dominates the bound.
  const double lambda = 2.4e-5;
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(std::abs(quad[k] - number_expectation(rho[k])) <
          2.0 * lambda * lambda + 1e-8);
  // Single-time wrapper agrees with the batch.
  CHECK(path_integral_expectation(psi0, model, 5.0, obs) ==
        doctest::Approx(quad.back()).epsilon(1e-12));
}

TEST_CASE("integration guards") {
  CHECK_THROWS_AS(integrate_master(pure_density(fock(0, 3)),
                                   QbmModel(kHeating), std::vector<double>{}),
                  ConfigError);
}
