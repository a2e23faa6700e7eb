#include <doctest.h>

#include <cmath>

#include "nmwf/errors.hpp"
#include "nmwf/model.hpp"

using namespace nmwf;

namespace {
const OhmicParams kHeating{1.2e-6, 0.5e-8, 10.0};   // high-cutoff set
const OhmicParams kLowCutoff{2.4e-6, 0.5e-8, 0.1};  // low-cutoff set
}  // namespace

TEST_CASE("coefficients vanish at t = 0 exactly") {
  CHECK(delta_coefficient(0.0, kHeating) == 0.0);
  CHECK(gamma_coefficient(0.0, kHeating) == 0.0);
  CHECK(delta_coefficient(0.0, kLowCutoff) == 0.0);
  CHECK(gamma_coefficient(0.0, kLowCutoff) == 0.0);
}

TEST_CASE("coefficient reference values") {
  // Frozen from an independent high-precision evaluation of the closed forms.
  CHECK(delta_coefficient(1.0, kHeating) ==
        doctest::Approx(7.57581492911155887e-7).epsilon(1e-12));
  CHECK(gamma_coefficient(1.0, kLowCutoff) ==
        doctest::Approx(6.57767615567058e-11).epsilon(1e-12));
  // Long-time plateaus: pref = r^2/(1+r^2) times the bare prefactor.
  CHECK(delta_coefficient(60.0, kHeating) ==
        doctest::Approx(1.1881188118811881e-6).epsilon(1e-12));
  CHECK(gamma_coefficient(60.0, kHeating) ==
        doctest::Approx(4.9504950495049505e-9).epsilon(1e-12));
}

TEST_CASE("integral reference values and antiderivative consistency") {
  CHECK(delta_integral(0.0, 5.0, kHeating) ==
        doctest::Approx(4.78212869910905318e-6).epsilon(1e-12));
  CHECK(gamma_integral(0.0, 5.0, kHeating) ==
        doctest::Approx(1.5164232006092525e-8).epsilon(1e-12));
  // Additivity of the antiderivative form.
  CHECK(delta_integral(0.0, 2.0, kLowCutoff) + delta_integral(2.0, 3.0, kLowCutoff) ==
        doctest::Approx(delta_integral(0.0, 3.0, kLowCutoff)).epsilon(1e-13));
}

TEST_CASE("closed-form integrals match the generic quadrature") {
  QbmModel model(kHeating);
  // Same rates through the generic interface, which falls back to the
  // base-class composite Simpson rule.
  CallableModel generic(model.system_frequency(),
                        {{LadderKind::raise, [&](double t) { return model.gamma(0, t); }},
                         {LadderKind::lower, [&](double t) { return model.gamma(1, t); }}});
  for (int ch = 0; ch < 2; ++ch) {
    CHECK(model.gamma_integral(ch, 0.3, 1.7) ==
          doctest::Approx(generic.gamma_integral(ch, 0.3, 1.7)).epsilon(1e-10));
  }
}

TEST_CASE("channel split") {
  const double t = 1.3;
  const ChannelRates rates = channel_rates(t, kLowCutoff);
  CHECK(rates.gamma_up ==
        delta_coefficient(t, kLowCutoff) - gamma_coefficient(t, kLowCutoff));
  CHECK(rates.gamma_down ==
        delta_coefficient(t, kLowCutoff) + gamma_coefficient(t, kLowCutoff));

  QbmModel model(kLowCutoff);
  CHECK(model.gamma(0, t) == rates.gamma_up);
  CHECK(model.gamma(1, t) == rates.gamma_down);
  CHECK(model.channel_kind(0) == LadderKind::raise);
  CHECK(model.channel_kind(1) == LadderKind::lower);
}

TEST_CASE("regime classification") {
  CHECK(classify(kHeating, 5.0) == MasterEqKind::lindblad);
  CHECK(classify(kLowCutoff, 3.0) == MasterEqKind::non_lindblad);
  // The up-channel rate first goes negative well before t = 1.
  CHECK(classify(kLowCutoff, 1.0) == MasterEqKind::non_lindblad);
  // Monotone in the horizon.
  CHECK(classify(kLowCutoff, 3.0) == MasterEqKind::non_lindblad);
  // Dissipation-free model is trivially a Lindblad generator.
  CHECK(classify(OhmicParams{0.0, 0.0, 1.0}, 5.0) == MasterEqKind::lindblad);
}

TEST_CASE("low-cutoff up channel dips negative") {
  // Minimum of Delta - Gamma on (0, 3] sits near t = 0.471 and is
  // about -1.246e-7 for the low-cutoff parameters.
  const ChannelRates rates = channel_rates(0.471, kLowCutoff);
  CHECK(rates.gamma_up < -1.2e-7);
  CHECK(rates.gamma_up == doctest::Approx(-1.24621374929e-7).epsilon(1e-4));
}

TEST_CASE("diffusion coefficient is nonnegative for r >= 1") {
  for (double r : {1.0, 2.0, 10.0, 50.0}) {
    const OhmicParams p{1e-6, 1e-8, r};
    for (int i = 0; i <= 500; ++i) {
      const double t = 5.0 * i / 500.0;
      CHECK(delta_coefficient(t, p) >= -1e-18);
    }
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(delta_coefficient(1.0, OhmicParams{1e-6, 1e-8, 0.0}), ConfigError);
  CHECK_THROWS_AS(gamma_coefficient(1.0, OhmicParams{-1e-6, 1e-8, 1.0}), ConfigError);
}
