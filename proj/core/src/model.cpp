#include "nmwf/model.hpp"

#include <cmath>

#include "nmwf/errors.hpp"

namespace nmwf {

namespace {

void check_params(const OhmicParams& p) {
  if (!(p.r > 0.0)) throw ConfigError("cutoff ratio r must be > 0");
  if (p.theta_bar < 0.0 || p.g_bar < 0.0)
    throw ConfigError("environment prefactors must be >= 0");
}

// int_0^T e^{-s} cos(w s) ds
double exp_cos_integral(double T, double w) {
  return (1.0 - std::exp(-T) * (std::cos(w * T) - w * std::sin(w * T))) / (1.0 + w * w);
}

// int_0^T e^{-s} sin(w s) ds
double exp_sin_integral(double T, double w) {
  return (w - std::exp(-T) * (std::sin(w * T) + w * std::cos(w * T))) / (1.0 + w * w);
}

}  // namespace

double delta_coefficient(double t, const OhmicParams& p) {
  check_params(p);
  const double w0 = 1.0 / p.r;
  const double pref = p.theta_bar * p.r * p.r / (1.0 + p.r * p.r);
  return pref * (1.0 - std::exp(-t) * (std::cos(w0 * t) - (1.0 / p.r) * std::sin(w0 * t)));
}

double gamma_coefficient(double t, const OhmicParams& p) {
  check_params(p);
  const double w0 = 1.0 / p.r;
  const double pref = p.g_bar * p.r * p.r / (1.0 + p.r * p.r);
  return pref * (1.0 - std::exp(-t) * std::cos(w0 * t) - p.r * std::exp(-t) * std::sin(w0 * t));
}

double delta_integral(double t0, double t1, const OhmicParams& p) {
  check_params(p);
  const double w0 = 1.0 / p.r;
  const double pref = p.theta_bar * p.r * p.r / (1.0 + p.r * p.r);
  auto anti = [&](double T) {
    return T - exp_cos_integral(T, w0) + (1.0 / p.r) * exp_sin_integral(T, w0);
  };
  return pref * (anti(t1) - anti(t0));
}

double gamma_integral(double t0, double t1, const OhmicParams& p) {
  check_params(p);
  const double w0 = 1.0 / p.r;
  const double pref = p.g_bar * p.r * p.r / (1.0 + p.r * p.r);
  auto anti = [&](double T) {
    return T - exp_cos_integral(T, w0) - p.r * exp_sin_integral(T, w0);
  };
  return pref * (anti(t1) - anti(t0));
}

ChannelRates channel_rates(double t, const OhmicParams& p) {
  const double d = delta_coefficient(t, p);
  const double g = gamma_coefficient(t, p);
  return {d - g, d + g};
}

double DecayModel::gamma_integral(int channel, double t0, double t1) const {
  // Composite Simpson; models with closed forms override.
  const int n = 64;
  const double h = (t1 - t0) / n;
  double sum = gamma(channel, t0) + gamma(channel, t1);
  for (int i = 1; i < n; ++i)
    sum += gamma(channel, t0 + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double QbmModel::gamma(int channel, double t) const {
  const double d = delta_coefficient(t, p_);
  const double g = gamma_coefficient(t, p_);
  return channel == 0 ? d - g : d + g;
}

double QbmModel::gamma_integral(int channel, double t0, double t1) const {
  const double id = delta_integral(t0, t1, p_);
  const double ig = nmwf::gamma_integral(t0, t1, p_);
  return channel == 0 ? id - ig : id + ig;
}

MasterEqKind classify(const DecayModel& model, double horizon, double scan_dt) {
  if (!(horizon > 0.0)) throw ConfigError("classification horizon must be > 0");
  const long steps = static_cast<long>(std::ceil(horizon / scan_dt));
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(horizon, k * scan_dt);
    for (int i = 0; i < model.channel_count(); ++i) {
      if (model.gamma(i, t) < -1e-18) return MasterEqKind::non_lindblad;
    }
  }
  return MasterEqKind::lindblad;
}

MasterEqKind classify(const OhmicParams& p, double horizon, double scan_dt) {
  QbmModel m(p);
  return classify(m, horizon, scan_dt);
}

}  // namespace nmwf
