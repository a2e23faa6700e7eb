#include <doctest.h>

#include <cmath>

#include "nmwf/errors.hpp"
#include "nmwf/fock.hpp"

using namespace nmwf;

TEST_CASE("fock basis state") {
  StateSpec s;
  s.kind = StateSpec::Kind::fock;
  s.fock_n = 3;
  FockVector v = make_initial_state(s, 10);
  CHECK(v.amplitude(3) == Complex(1.0, 0.0));
  CHECK(v.norm2() == 1.0);
  CHECK(observable_expectation(v, DiagonalObservable::number(10)) == 3.0);

  s.fock_n = 11;
  CHECK_THROWS_AS(make_initial_state(s, 10), ConfigError);
}

TEST_CASE("coherent state with exact squared amplitude") {
  StateSpec s;
  s.kind = StateSpec::Kind::coherent;
  s.xi = std::sqrt(2.0);
  s.xi2 = 2.0;
  FockVector v = make_initial_state(s, 30);
  CHECK(observable_expectation(v, DiagonalObservable::number(30)) == 2.0);
  CHECK(v.norm2() == doctest::Approx(1.0).epsilon(1e-14));
  // Poisson populations: p1/p0 = 2.
  CHECK(std::norm(v.amplitude(1)) / std::norm(v.amplitude(0)) ==
        doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("coherent truncation guard") {
  StateSpec s;
  s.kind = StateSpec::Kind::coherent;
  s.xi = 3.0;
  CHECK_THROWS_AS(make_initial_state(s, 5), ConfigError);
  CHECK_NOTHROW(make_initial_state(s, 30));
}

TEST_CASE("superposition state") {
  StateSpec s;
  s.kind = StateSpec::Kind::superposition;
  s.superposition = {Complex(1.0, 0.0), Complex(1.0, 0.0)};
  FockVector v = make_initial_state(s, 30);
  CHECK(observable_expectation(v, DiagonalObservable::number(30)) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(v.norm2() == doctest::Approx(1.0).epsilon(1e-14));

  s.superposition.assign(32, Complex(1.0, 0.0));
  CHECK_THROWS_AS(make_initial_state(s, 30), ConfigError);
  s.superposition.clear();
  CHECK_THROWS_AS(make_initial_state(s, 30), ConfigError);
}

TEST_CASE("normalize is bitwise idempotent") {
  FockVector v(4);
  v.at(0) = Complex(0.3, 0.1);
  v.at(2) = Complex(-0.7, 0.4);
  v.normalize();
  FockVector w = v;
  w.normalize();
  for (int n = 0; n <= 4; ++n) CHECK(w.amplitude(n) == v.amplitude(n));
}

TEST_CASE("ladder operators") {
  FockVector v(5);
  v.at(2) = 1.0;
  LadderResult lo = ladder_apply(LadderKind::lower, v);
  CHECK(lo.state.amplitude(1).real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(lo.leaked == 0.0);
  LadderResult hi = ladder_apply(LadderKind::raise, v);
  CHECK(hi.state.amplitude(3).real() == doctest::Approx(std::sqrt(3.0)));

  FockVector vac(5);
  vac.at(0) = 1.0;
  LadderResult dead = ladder_apply(LadderKind::lower, vac);
  CHECK(dead.state.norm2() == 0.0);

  FockVector top(5);
  top.at(5) = 1.0;
  LadderResult leak = ladder_apply(LadderKind::raise, top);
  CHECK(leak.leaked == doctest::Approx(6.0));
  CHECK(leak.state.norm2() == 0.0);
}

TEST_CASE("expectations") {
  FockVector zero(3);
  CHECK_THROWS_AS(observable_expectation(zero, DiagonalObservable::number(3)),
                  NumericalError);

  FockVector phi(2), psi(2);
  phi.at(1) = Complex(0.5, 0.5);
  psi.at(1) = Complex(1.0, 0.0);
  psi.at(2) = Complex(0.0, 1.0);
  DoubledVector pair(phi, psi);
  // <psi|n|phi> = conj(psi_1)*phi_1*1 = 0.5 + 0.5i
  const Complex c = cross_expectation(pair, DiagonalObservable::number(2));
  CHECK(c.real() == doctest::Approx(0.5));
  CHECK(c.imag() == doctest::Approx(0.5));
  CHECK(cross_expectation(pair, DiagonalObservable::identity(2)).real() ==
        doctest::Approx(0.5));
}

TEST_CASE("density accumulator") {
  FockVector a(1), b(1);
  a.at(0) = 1.0;
  b.at(1) = 1.0;
  DensityAccumulator acc(1);
  acc.add(DoubledVector(a, a));
  acc.add(DoubledVector(b, b));
  CHECK(acc.count() == 2);
  CHECK(acc.mean(0, 0).real() == doctest::Approx(0.5));
  CHECK(acc.mean(1, 1).real() == doctest::Approx(0.5));
  CHECK(acc.mean(0, 1) == Complex(0.0, 0.0));

  DensityAccumulator other(1);
  other.add(DoubledVector(a, b));  // |a><b|
  other.merge(acc);
  CHECK(other.count() == 3);
  CHECK(other.mean(0, 1).real() == doctest::Approx(1.0 / 3.0));
}
