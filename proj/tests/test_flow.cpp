#include <doctest.h>

#include <cmath>

#include "nmwf/errors.hpp"
#include "nmwf/flow.hpp"
#include "nmwf/fock.hpp"
#include "nmwf/model.hpp"

using namespace nmwf;

namespace {

const OhmicParams kHeating{1.2e-6, 0.5e-8, 10.0};

FockVector plus_state(int n_max) {
  FockVector v(n_max);
  v.at(0) = 1.0;
  v.at(1) = 1.0;
  v.normalize();
  return v;
}

}  // namespace

TEST_CASE("diagonal step matches the generic integrator") {
  QbmModel exact(kHeating);
  CallableModel generic(exact.system_frequency(),
                        {{LadderKind::raise, [&](double t) { return exact.gamma(0, t); }},
                         {LadderKind::lower, [&](double t) { return exact.gamma(1, t); }}},
                        /*diagonal=*/false);
  FockVector psi(8);
  for (int n = 0; n <= 8; ++n) psi.at(n) = Complex(1.0 / (n + 1.0), 0.1 * n);
  psi.normalize();
  FockVector a = psi;
  FockVector b = psi;
  for (int step = 0; step < 200; ++step) {
    a = evolve_nojump(a, step * 1e-3, 1e-3, exact).state;
    b = evolve_nojump(b, step * 1e-3, 1e-3, generic).state;
  }
  for (int n = 0; n <= 8; ++n)
    CHECK(std::abs(a.amplitude(n) - b.amplitude(n)) < 1e-12);
}

TEST_CASE("free evolution only rotates phases") {
  CallableModel model(2.0, {});
  FockVector psi = plus_state(3);
  NoJumpStep step = evolve_nojump(psi, 0.0, 0.25, model);
  CHECK(step.shrink == doctest::Approx(0.0).epsilon(1e-15));
  // |1> picks up phase e^{-i w0 t} = e^{-i 0.5}.
  CHECK(step.state.amplitude(1).real() ==
        doctest::Approx(std::cos(0.5) / std::sqrt(2.0)));
  CHECK(step.state.amplitude(1).imag() ==
        doctest::Approx(-std::sin(0.5) / std::sqrt(2.0)));
}

TEST_CASE("norm-shrink guard") {
  CallableModel strong(0.0, {{LadderKind::lower, [](double) { return 300.0; }}});
  FockVector one(3);
  one.at(1) = 1.0;
  CHECK_THROWS_AS(evolve_nojump(one, 0.0, 0.01, strong), GuardError);
}

TEST_CASE("doubled flow conserves the pair norm") {
  QbmModel model({2.4e-6, 0.5e-8, 0.1});
  FockVector psi = plus_state(5);
  DoubledVector pair(psi, psi);
  const double n0 = pair.norm2();
  for (int step = 0; step < 3000; ++step)
    pair = evolve_doubled(pair, step * 1e-3, 1e-3, model);
  CHECK(std::abs(std::sqrt(pair.norm2() / n0) - 1.0) < 1e-8);
}

TEST_CASE("substep construction") {
  const std::vector<double> grid = {0.0, 0.25, 1.0};
  std::vector<std::size_t> idx;
  const std::vector<double> sub = make_substeps(grid, 0.1, &idx);
  REQUIRE(idx.size() == 3);
  CHECK(sub[idx[0]] == 0.0);
  CHECK(sub[idx[1]] == 0.25);
  CHECK(sub[idx[2]] == 1.0);
  for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
    CHECK(sub[i + 1] > sub[i]);
    CHECK(sub[i + 1] - sub[i] <= 0.1 + 1e-12);
  }
  CHECK_THROWS_AS(make_substeps({0.5, 1.0}, 0.1, nullptr), ConfigError);
  CHECK_THROWS_AS(make_substeps({0.0, 1.0, 0.5}, 0.1, nullptr), ConfigError);
}

TEST_CASE("transition rate on a number state") {
  CallableModel model(1.0, {{LadderKind::raise, [](double) { return 3.0; }},
                            {LadderKind::lower, [](double) { return 2.0; }}});
  FockVector one(4);
  one.at(1) = 1.0;
  // gamma_up <aa^dag> + gamma_down <a^dag a> = 3*2 + 2*1.
  CHECK(transition_rate(one, 0.0, model) == doctest::Approx(8.0));
}

TEST_CASE("no-jump path with constant decay") {
  const double lam = 0.02;
  CallableModel model(0.0, {{LadderKind::lower, [=](double) { return lam; }}});
  FockVector one(4);
  one.at(1) = 1.0;
  const std::vector<double> grid = {0.0, 0.5, 1.0};
  NoJumpPath path = build_nojump_path(one, model, grid, DiagonalObservable::number(4), 1e-3);
  REQUIRE(path.states.size() == 3);
  // A pure |1> renormalizes back to itself, so the rate is constant and
  // Lambda(t) = lam * t.
  CHECK(path.cumulative_rate[2] == doctest::Approx(lam).epsilon(1e-10));
  CHECK(path.observable_curve[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("leakage guard on the path") {
  CallableModel model(0.0, {});
  FockVector top(4);
  top.at(4) = 1.0;
  CHECK_THROWS_AS(
      build_nojump_path(top, model, {0.0, 1.0}, DiagonalObservable::number(4), 1e-2),
      LeakageError);
}
