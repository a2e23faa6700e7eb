#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "nmwf/fock.hpp"

namespace nmwf {

// Dimensionless quantum-Brownian-motion environment parameters, in
// units where the cutoff frequency is 1.
struct OhmicParams {
  double theta_bar = 0.0;  // 2 a^2 kT / w_c
  double g_bar = 0.0;      // a^2 w_0 / w_c
  double r = 1.0;          // w_c / w_0
};

struct ChannelRates {
  double gamma_up = 0.0;    // raise channel, Delta - Gamma
  double gamma_down = 0.0;  // lower channel, Delta + Gamma
};

// Closed-form diffusion coefficient Delta(t) for the high-temperature
// Ohmic environment with Lorentz-Drude cutoff.
double delta_coefficient(double t, const OhmicParams& p);
// Closed-form dissipation coefficient Gamma(t).
double gamma_coefficient(double t, const OhmicParams& p);
// Exact antiderivative differences, used by the diagonal flow.
double delta_integral(double t0, double t1, const OhmicParams& p);
double gamma_integral(double t0, double t1, const OhmicParams& p);

ChannelRates channel_rates(double t, const OhmicParams& p);

enum class MasterEqKind { lindblad, non_lindblad };

// Decay-channel interface: each channel is a ladder operator plus a
// time-dependent (possibly negative) rate.
class DecayModel {
 public:
  virtual ~DecayModel() = default;

  // System Hamiltonian is omega0 * a^dag a.
  virtual double system_frequency() const = 0;
  virtual int channel_count() const = 0;
  virtual LadderKind channel_kind(int channel) const = 0;
  virtual double gamma(int channel, double t) const = 0;
  // Integral of gamma over [t0, t1]. Default is composite Simpson;
  // models with closed forms override.
  virtual double gamma_integral(int channel, double t0, double t1) const;
  // True when H_S and all channels are diagonal/ladder in the Fock
  // basis, enabling the exact per-component propagator.
  virtual bool has_diagonal_flow() const { return true; }
};

class QbmModel final : public DecayModel {
 public:
  explicit QbmModel(OhmicParams p) : p_(p) {}

  const OhmicParams& params() const { return p_; }
  double system_frequency() const override { return 1.0 / p_.r; }
  int channel_count() const override { return 2; }
  LadderKind channel_kind(int channel) const override {
    return channel == 0 ? LadderKind::raise : LadderKind::lower;
  }
  double gamma(int channel, double t) const override;
  double gamma_integral(int channel, double t0, double t1) const override;

 private:
  OhmicParams p_;
};

// Generic instance of the channel interface; rates are arbitrary
// callables. Used for constant-rate and ramp models in tests.
class CallableModel final : public DecayModel {
 public:
  using Rate = std::function<double(double)>;
  CallableModel(double omega0, std::vector<std::pair<LadderKind, Rate>> channels,
                bool diagonal = true)
      : omega0_(omega0), channels_(std::move(channels)), diagonal_(diagonal) {}

  double system_frequency() const override { return omega0_; }
  int channel_count() const override { return static_cast<int>(channels_.size()); }
  LadderKind channel_kind(int channel) const override {
    return channels_[static_cast<std::size_t>(channel)].first;
  }
  double gamma(int channel, double t) const override {
    return channels_[static_cast<std::size_t>(channel)].second(t);
  }
  bool has_diagonal_flow() const override { return diagonal_; }

 private:
  double omega0_;
  std::vector<std::pair<LadderKind, Rate>> channels_;
  bool diagonal_;
};

// Dense scan of the channel rates over [0, horizon]; non_lindblad iff
// any rate drops below -1e-18.
MasterEqKind classify(const DecayModel& model, double horizon, double scan_dt = 1e-3);
MasterEqKind classify(const OhmicParams& p, double horizon, double scan_dt = 1e-3);

}  // namespace nmwf
