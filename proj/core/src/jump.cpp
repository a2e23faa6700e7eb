#include "nmwf/jump.hpp"

#include <algorithm>
#include <cmath>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"

namespace nmwf {

namespace {

double ladder_weight_expectation(const FockVector& state, LadderKind kind) {
  KahanSum w;
  for (int n = 0; n <= state.n_max(); ++n) {
    const double weight = kind == LadderKind::lower ? static_cast<double>(n)
                                                    : static_cast<double>(n + 1);
    w.add(weight * std::norm(state.amplitude(n)));
  }
  return w.value();
}

}  // namespace

StepProbabilities step_probabilities_mcwf(const FockVector& psi, double t, double dt,
                                          double beta, const DecayModel& model) {
  StepProbabilities probs;
  probs.per_channel.resize(static_cast<std::size_t>(model.channel_count()), 0.0);
  const double norm2 = psi.norm2();
  KahanSum total;
  for (int ch = 0; ch < model.channel_count(); ++ch) {
    const double rate = model.gamma(ch, t);
    if (rate < 0.0)
      throw GuardError("standard unravelling invoked with a negative channel rate");
    // beta multiplies last so the scaled probabilities are exactly
    // beta times the unscaled ones, componentwise.
    const double p =
        beta * (dt * rate * ladder_weight_expectation(psi, model.channel_kind(ch)) / norm2);
    probs.per_channel[static_cast<std::size_t>(ch)] = p;
    total.add(p);
  }
  probs.total = total.value();
  if (probs.total >= 0.1)
    throw GuardError("scaled per-step jump probability reached 0.1; reduce dt or beta");
  return probs;
}

std::optional<int> decide(const StepProbabilities& probs, double u) {
  double upper = 0.0;
  for (std::size_t ch = 0; ch < probs.per_channel.size(); ++ch) {
    upper += probs.per_channel[ch];
    if (u < upper) return static_cast<int>(ch);
  }
  return std::nullopt;
}

FockVector apply_jump_mcwf(const FockVector& psi, int channel, const DecayModel& model) {
  LadderResult res = ladder_apply(model.channel_kind(channel), psi);
  const double norm = res.state.norm();
  if (!(norm > 0.0))
    throw NumericalError("jump operator annihilated the state");
  res.state.scale(1.0 / norm);
  return res.state;
}

std::vector<double> doubled_rates(const DoubledVector& pair, double t, double beta,
                                  const DecayModel& model) {
  std::vector<double> rates(static_cast<std::size_t>(model.channel_count()), 0.0);
  const double norm2 = pair.norm2();
  for (int ch = 0; ch < model.channel_count(); ++ch) {
    const double g = std::abs(model.gamma(ch, t));
    const LadderKind kind = model.channel_kind(ch);
    const double w =
        ladder_weight_expectation(pair.upper, kind) + ladder_weight_expectation(pair.lower, kind);
    rates[static_cast<std::size_t>(ch)] = beta * g * w / norm2;
  }
  return rates;
}

double CumulativeTable::value_at(double t) const {
  if (time.empty()) throw ConfigError("empty cumulative-rate table");
  if (t <= time.front()) return value.front();
  if (t >= time.back()) return value.back();
  const auto it = std::upper_bound(time.begin(), time.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - time.begin());
  const std::size_t lo = hi - 1;
  const double span = time[hi] - time[lo];
  const double frac = span > 0.0 ? (t - time[lo]) / span : 0.0;
  return value[lo] + frac * (value[hi] - value[lo]);
}

WaitingTime sample_waiting_time(const CumulativeTable& cumulative, double u) {
  if (cumulative.time.size() != cumulative.value.size() || cumulative.time.empty())
    throw ConfigError("malformed cumulative-rate table");
  const double target = -std::log1p(-u);
  if (target > cumulative.value.back()) return {true, 0.0};
  // Smallest tau with Lambda(tau) >= target; linear inversion inside the
  // bracketing segment.
  const auto it =
      std::lower_bound(cumulative.value.begin(), cumulative.value.end(), target);
  std::size_t hi = static_cast<std::size_t>(it - cumulative.value.begin());
  if (target == 0.0) {
    while (hi < cumulative.value.size() && cumulative.value[hi] <= 0.0) ++hi;
    if (hi == cumulative.value.size()) return {true, 0.0};
    return {false, cumulative.time[hi]};
  }
  if (hi == 0) return {false, cumulative.time[0]};
  const std::size_t lo = hi - 1;
  const double dv = cumulative.value[hi] - cumulative.value[lo];
  if (dv <= 0.0) return {false, cumulative.time[hi]};
  const double frac = (target - cumulative.value[lo]) / dv;
  return {false, cumulative.time[lo] + frac * (cumulative.time[hi] - cumulative.time[lo])};
}

DoubledVector apply_jump_doubled(const DoubledVector& pair, int channel, double t,
                                 const DecayModel& model) {
  const double rate = model.gamma(channel, t);
  const double sign = rate < 0.0 ? -1.0 : 1.0;
  LadderResult up = ladder_apply(model.channel_kind(channel), pair.upper);
  LadderResult lo = ladder_apply(model.channel_kind(channel), pair.lower);
  up.state.scale(sign);
  const double jumped2 = up.state.norm2() + lo.state.norm2();
  if (!(jumped2 > 0.0))
    throw NumericalError("doubled jump operator annihilated the pair");
  const double rescale = std::sqrt(pair.norm2() / jumped2);
  up.state.scale(rescale);
  lo.state.scale(rescale);
  return DoubledVector(std::move(up.state), std::move(lo.state));
}

}  // namespace nmwf
