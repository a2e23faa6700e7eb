#include "nmwf/trajectory.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"

namespace nmwf {

namespace {

inline double ladder_weight(LadderKind kind, int n) {
  return kind == LadderKind::lower ? static_cast<double>(n) : static_cast<double>(n + 1);
}

double weight_expectation_raw(const FockVector& state, LadderKind kind) {
  KahanSum w;
  for (int n = 0; n <= state.n_max(); ++n)
    w.add(ladder_weight(kind, n) * std::norm(state.amplitude(n)));
  return w.value();
}

DiagonalObservable make_observable(const TrajectoryConfig& cfg) {
  if (cfg.observable_weights.empty()) return DiagonalObservable::number(cfg.n_max);
  if (static_cast<int>(cfg.observable_weights.size()) != cfg.n_max + 1)
    throw ConfigError("observable weight list does not match the basis size");
  return DiagonalObservable(cfg.observable_weights);
}

void check_config(const TrajectoryConfig& cfg) {
  if (cfg.model == nullptr) throw ConfigError("trajectory config has no model");
  if (!(cfg.beta >= 1.0)) throw ConfigError("beta must be >= 1");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.n_max < 1) throw ConfigError("n_max must be at least 1");
  if (cfg.sample_grid.size() < 2 || cfg.sample_grid.front() != 0.0 ||
      cfg.sample_grid.back() != cfg.horizon)
    throw ConfigError("sample grid must run from 0 to the horizon");
}

// Per-substep diagonal flow multipliers exp(-i w0 n h - sum_ch gint/2 * w_ch(n)),
// one row per step, for the exact propagation of diagonal-flow models.
std::vector<std::vector<Complex>> step_multipliers(const DecayModel& model,
                                                   const std::vector<double>& sub,
                                                   int n_max) {
  std::vector<std::vector<Complex>> mult(sub.size() - 1);
  const double w0 = model.system_frequency();
  for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
    const double h = sub[i + 1] - sub[i];
    std::vector<double> expo(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int ch = 0; ch < model.channel_count(); ++ch) {
      const double gint = model.gamma_integral(ch, sub[i], sub[i + 1]);
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

void apply_multipliers(FockVector& state, const std::vector<Complex>& mult) {
  for (int n = 0; n <= state.n_max(); ++n)
    state.at(n) *= mult[static_cast<std::size_t>(n)];
}

}  // namespace

// ---------------------------------------------------------------------------
// Standard unravelling
// ---------------------------------------------------------------------------

struct McwfDriver::Impl {
  TrajectoryConfig cfg;
  DiagonalObservable obs;
  std::vector<double> sub;               // substep times
  std::vector<std::size_t> grid_index;   // positions of sample times in sub
  std::vector<FockVector> states;        // normalized no-jump state per substep
  std::vector<std::vector<Complex>> mult;  // per-step diagonal multipliers
  std::vector<StepProbabilities> probs;  // scaled per-step jump probabilities
  std::vector<std::vector<double>> gammas;  // per-step channel rates at step start
  NoJumpPath nojump;                     // grid-resolution reference path
  double cumulative_scaled = 0.0;        // beta * Lambda(horizon)

  explicit Impl(const TrajectoryConfig& c) : cfg(c), obs(make_observable(c)) {
    check_config(cfg);
    const DecayModel& model = *cfg.model;
    sub = make_substeps(cfg.sample_grid, cfg.dt, &grid_index);
    if (!model.has_diagonal_flow())
      throw ConfigError("the trajectory drivers require a diagonal-flow model");
    mult = step_multipliers(model, sub, cfg.n_max);

    FockVector psi = make_initial_state(cfg.initial, cfg.n_max);
    states.reserve(sub.size());
    probs.reserve(sub.size() - 1);
    gammas.reserve(sub.size() - 1);

    nojump.grid = cfg.sample_grid;
    KahanSum lambda;
    double prev_rate = transition_rate(psi, sub[0], model);
    std::size_t next_grid = 0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      states.push_back(psi);
      if (next_grid < grid_index.size() && i == grid_index[next_grid]) {
        if (psi.top_population() > 1e-6)
          throw LeakageError("population reached the top of the truncated basis");
        nojump.states.push_back(psi);
        nojump.cumulative_rate.push_back(lambda.value());
        nojump.observable_curve.push_back(observable_expectation(psi, obs));
        ++next_grid;
      }
      if (i + 1 == sub.size()) break;
      const double h = sub[i + 1] - sub[i];
      // Scaled jump probabilities along the shared no-jump path; this
      // also rejects negative rates, which the standard scheme cannot
      // handle.
      probs.push_back(step_probabilities_mcwf(psi, sub[i], h, cfg.beta, model));
      std::vector<double> g(static_cast<std::size_t>(model.channel_count()));
      for (int ch = 0; ch < model.channel_count(); ++ch)
        g[static_cast<std::size_t>(ch)] = model.gamma(ch, sub[i]);
      gammas.push_back(std::move(g));
      apply_multipliers(psi, mult[i]);
      psi.normalize();
      const double rate = transition_rate(psi, sub[i + 1], model);
      lambda.add(0.5 * h * (prev_rate + rate));
      prev_rate = rate;
    }
    cumulative_scaled = cfg.beta * lambda.value();
    if (cumulative_scaled > 0.5)
      throw GuardError(
          "cumulative scaled jump probability exceeds 0.5 over the horizon; "
          "the one-jump reconstruction is outside its regime");
  }

  TrajectoryRecord run(TrajectoryStream& stream, std::uint64_t trajectory_id) const {
    const DecayModel& model = *cfg.model;
    TrajectoryRecord rec;
    rec.values.reserve(cfg.sample_grid.size());
    rec.jumped_by.reserve(cfg.sample_grid.size());

    bool jumped = false;
    FockVector local(cfg.n_max);
    std::size_t next_grid = 0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      if (next_grid < grid_index.size() && i == grid_index[next_grid]) {
        rec.values.push_back(jumped ? observable_expectation(local, obs)
                                    : nojump.observable_curve[next_grid]);
        rec.jumped_by.push_back(jumped ? 1 : 0);
        ++next_grid;
      }
      if (i + 1 == sub.size()) break;
      const double u = stream.next_uniform();
      if (!jumped) {
        if (u < probs[i].total) {
          const auto channel = decide(probs[i], u);
          local = apply_jump_mcwf(states[i], *channel, model);
          jumped = true;
          rec.jump_log.push_back({sub[i], *channel, trajectory_id});
        }
        continue;
      }
      // Post-jump branch: explicit propagation of the local state.
      const double h = sub[i + 1] - sub[i];
      StepProbabilities p;
      p.per_channel.resize(gammas[i].size());
      KahanSum tot;
      const double norm2 = local.norm2();
      for (std::size_t ch = 0; ch < gammas[i].size(); ++ch) {
        const double v = cfg.beta * h * gammas[i][ch] *
                         weight_expectation_raw(local, model.channel_kind(static_cast<int>(ch))) /
                         norm2;
        p.per_channel[ch] = v;
        tot.add(v);
      }
      p.total = tot.value();
      if (u < p.total) {
        const auto channel = decide(p, u);
        local = apply_jump_mcwf(local, *channel, model);
        rec.multi_jump = true;
        rec.jump_log.push_back({sub[i], *channel, trajectory_id});
      } else {
        apply_multipliers(local, mult[i]);
        local.normalize();
        if (local.top_population() > 1e-6)
          throw LeakageError("jumped state reached the top of the truncated basis");
      }
    }
    return rec;
  }
};

McwfDriver::McwfDriver(const TrajectoryConfig& cfg) : impl_(new Impl(cfg)) {}
McwfDriver::~McwfDriver() = default;
McwfDriver::McwfDriver(McwfDriver&&) noexcept = default;

TrajectoryRecord McwfDriver::run(std::uint64_t master_seed,
                                 std::uint64_t trajectory_id) const {
  TrajectoryStream stream(master_seed, trajectory_id);
  return impl_->run(stream, trajectory_id);
}

TrajectoryRecord McwfDriver::run(TrajectoryStream& stream,
                                 std::uint64_t trajectory_id) const {
  return impl_->run(stream, trajectory_id);
}

const NoJumpPath& McwfDriver::path() const { return impl_->nojump; }

double McwfDriver::cumulative_scaled_probability() const {
  return impl_->cumulative_scaled;
}

// ---------------------------------------------------------------------------
// Doubled-space unravelling
// ---------------------------------------------------------------------------

struct DoubledDriver::Impl {
  TrajectoryConfig cfg;
  DiagonalObservable obs;
  std::vector<double> sub;
  std::vector<std::size_t> grid_index;
  std::vector<DoubledVector> pairs;        // deterministic pair per substep
  std::vector<std::vector<Complex>> mult;  // per-step diagonal multipliers
  CumulativeTable scaled_cumulative;       // Lambda_beta on substeps
  NoJumpPath nojump;                       // grid data (states left empty)
  std::vector<double> trace;               // Re<psi|phi> on the grid
  std::vector<std::vector<double>> rate_rows;  // per-substep unscaled |gamma| rates
  double cumulative_scaled = 0.0;

  explicit Impl(const TrajectoryConfig& c) : cfg(c), obs(make_observable(c)) {
    check_config(cfg);
    const DecayModel& model = *cfg.model;
    sub = make_substeps(cfg.sample_grid, cfg.dt, &grid_index);
    if (!model.has_diagonal_flow())
      throw ConfigError("the trajectory drivers require a diagonal-flow model");
    mult = step_multipliers(model, sub, cfg.n_max);

    FockVector psi0 = make_initial_state(cfg.initial, cfg.n_max);
    DoubledVector pair(psi0, psi0);
    const double norm2_ref = pair.norm2();

    nojump.grid = cfg.sample_grid;
    pairs.reserve(sub.size());
    rate_rows.reserve(sub.size());
    scaled_cumulative.time = sub;
    scaled_cumulative.value.reserve(sub.size());

    KahanSum lambda;          // unscaled doubled-space cumulative rate
    double prev_rate = pair_rate(pair, sub[0], model);
    std::size_t next_grid = 0;
    for (std::size_t i = 0; i < sub.size(); ++i) {
      pairs.push_back(pair);
      rate_rows.push_back(channel_pair_rates(pair, sub[i], model));
      scaled_cumulative.value.push_back(cfg.beta * lambda.value());
      if (next_grid < grid_index.size() && i == grid_index[next_grid]) {
        if (pair.upper.top_population() > 1e-6 || pair.lower.top_population() > 1e-6)
          throw LeakageError("population reached the top of the truncated basis");
        nojump.cumulative_rate.push_back(lambda.value());
        nojump.observable_curve.push_back(cross_expectation(pair, obs).real());
        trace.push_back(cross_expectation(pair, DiagonalObservable::identity(cfg.n_max)).real());
        ++next_grid;
      }
      if (i + 1 == sub.size()) break;
      const double h = sub[i + 1] - sub[i];
      step_pair(pair, i, norm2_ref);
      const double rate = pair_rate(pair, sub[i + 1], model);
      lambda.add(0.5 * h * (prev_rate + rate));
      prev_rate = rate;
    }
    cumulative_scaled = scaled_cumulative.value.back();
    if (cumulative_scaled > 0.5)
      throw GuardError(
          "cumulative scaled jump probability exceeds 0.5 over the horizon; "
          "the one-jump reconstruction is outside its regime");
  }

  static std::vector<double> channel_pair_rates(const DoubledVector& pair, double t,
                                                const DecayModel& model) {
    std::vector<double> r(static_cast<std::size_t>(model.channel_count()));
    const double norm2 = pair.norm2();
    for (int ch = 0; ch < model.channel_count(); ++ch) {
      const LadderKind kind = model.channel_kind(ch);
      r[static_cast<std::size_t>(ch)] =
          std::abs(model.gamma(ch, t)) *
          (weight_expectation_raw(pair.upper, kind) +
           weight_expectation_raw(pair.lower, kind)) /
          norm2;
    }
    return r;
  }

  static double pair_rate(const DoubledVector& pair, double t, const DecayModel& model) {
    const std::vector<double> r = channel_pair_rates(pair, t, model);
    KahanSum s;
    for (double v : r) s.add(v);
    return s.value();
  }

  // One diagonal step with exact restoration of the pair norm, which is
  // how the norm-conserving flow acts on parallel components.
  void step_pair(DoubledVector& pair, std::size_t i, double norm2_ref) const {
    apply_multipliers(pair.upper, mult[i]);
    apply_multipliers(pair.lower, mult[i]);
    const double raw = pair.norm2();
    if (!(raw > 0.0)) throw NumericalError("doubled pair collapsed during a step");
    const double s = std::sqrt(norm2_ref / raw);
    if (std::abs(s - 1.0) > 1e-13) {
      pair.upper.scale(s);
      pair.lower.scale(s);
    }
  }

  // Propagate a local pair from tcur (inside step i) to time t.
  void partial_step(DoubledVector& pair, double tcur, double t, double norm2_ref) const {
    if (t <= tcur) return;
    DoubledVector next = evolve_doubled(pair, tcur, t - tcur, *cfg.model);
    const double raw = next.norm2();
    const double s = std::sqrt(norm2_ref / raw);
    if (std::abs(s - 1.0) > 1e-13) {
      next.upper.scale(s);
      next.lower.scale(s);
    }
    pair = std::move(next);
  }

  TrajectoryRecord run(TrajectoryStream& stream, std::uint64_t trajectory_id) const {
    const DecayModel& model = *cfg.model;
    const std::size_t n_samples = cfg.sample_grid.size();
    TrajectoryRecord rec;

    const double u0 = stream.next_uniform();
    const WaitingTime first = sample_waiting_time(scaled_cumulative, u0);
    if (first.beyond_horizon) {
      rec.values = nojump.observable_curve;
      rec.trace_values = trace;
      rec.jumped_by.assign(n_samples, 0);
      if (cfg.record_snapshots)
        for (std::size_t k = 0; k < n_samples; ++k)
          rec.snapshots.push_back(pairs[grid_index[k]]);
      return rec;
    }

    rec.values.reserve(n_samples);
    rec.trace_values.reserve(n_samples);
    rec.jumped_by.reserve(n_samples);

    const double norm2_ref = pairs.front().norm2();
    const DiagonalObservable ident = DiagonalObservable::identity(cfg.n_max);

    // Copy the shared curves up to the first sample time at or past the
    // jump; they are bitwise what this trajectory would have recorded.
    std::size_t next_grid = 0;
    while (next_grid < n_samples && cfg.sample_grid[next_grid] < first.tau) {
      rec.values.push_back(nojump.observable_curve[next_grid]);
      rec.trace_values.push_back(trace[next_grid]);
      rec.jumped_by.push_back(0);
      if (cfg.record_snapshots) rec.snapshots.push_back(pairs[grid_index[next_grid]]);
      ++next_grid;
    }

    // Locate the substep containing tau and build the pair at tau.
    std::size_t seg = 0;
    while (seg + 1 < sub.size() && sub[seg + 1] < first.tau) ++seg;
    DoubledVector pair = pairs[seg];
    partial_step(pair, sub[seg], first.tau, norm2_ref);
    double tcur = first.tau;
    int jumps = 0;

    // Channel selection proportional to the per-channel rates at tau.
    auto pick_channel = [&](const DoubledVector& p, double t) {
      const std::vector<double> r = channel_pair_rates(p, t, model);
      double total = 0.0;
      for (double v : r) total += v;
      const double draw = stream.next_uniform() * total;
      double acc = 0.0;
      for (std::size_t ch = 0; ch < r.size(); ++ch) {
        acc += r[ch];
        if (draw < acc) return static_cast<int>(ch);
      }
      return static_cast<int>(r.size()) - 1;
    };

    int channel = pick_channel(pair, tcur);
    pair = apply_jump_doubled(pair, channel, tcur, model);
    rec.jump_log.push_back({tcur, channel, trajectory_id});
    jumps = 1;

    // Continue with fresh waiting times measured from the jump.
    double target = -std::log1p(-stream.next_uniform());
    KahanSum cum;
    double prev_rate = cfg.beta * pair_rate(pair, tcur, model);

    std::size_t i = seg;  // current pair sits inside [sub[i], sub[i+1])
    while (true) {
      // Record any samples at or before the next node boundary.
      while (next_grid < n_samples && cfg.sample_grid[next_grid] <= tcur + 1e-15) {
        rec.values.push_back(cross_expectation(pair, obs).real());
        rec.trace_values.push_back(cross_expectation(pair, ident).real());
        rec.jumped_by.push_back(1);
        if (cfg.record_snapshots) rec.snapshots.push_back(pair);
        ++next_grid;
      }
      if (i + 1 >= sub.size()) break;
      const double tnext = sub[i + 1];
      DoubledVector trial = pair;
      partial_step(trial, tcur, tnext, norm2_ref);
      const double rate_next = cfg.beta * pair_rate(trial, tnext, model);
      const double inc = 0.5 * (tnext - tcur) * (prev_rate + rate_next);
      if (cum.value() + inc >= target && inc > 0.0) {
        // Invert linearly inside this step for the jump time.
        const double frac = (target - cum.value()) / inc;
        const double tau = tcur + frac * (tnext - tcur);
        partial_step(pair, tcur, tau, norm2_ref);
        tcur = tau;
        channel = pick_channel(pair, tcur);
        pair = apply_jump_doubled(pair, channel, tcur, model);
        rec.jump_log.push_back({tcur, channel, trajectory_id});
        ++jumps;
        rec.multi_jump = jumps > 1;
        target = -std::log1p(-stream.next_uniform());
        cum = KahanSum();
        prev_rate = cfg.beta * pair_rate(pair, tcur, model);
        continue;
      }
      cum.add(inc);
      pair = std::move(trial);
      tcur = tnext;
      prev_rate = rate_next;
      ++i;
      if (pair.upper.top_population() > 1e-6 || pair.lower.top_population() > 1e-6)
        throw LeakageError("jumped pair reached the top of the truncated basis");
    }
    while (next_grid < n_samples) {
      rec.values.push_back(cross_expectation(pair, obs).real());
      rec.trace_values.push_back(cross_expectation(pair, ident).real());
      rec.jumped_by.push_back(1);
      if (cfg.record_snapshots) rec.snapshots.push_back(pair);
      ++next_grid;
    }
    return rec;
  }
};

DoubledDriver::DoubledDriver(const TrajectoryConfig& cfg) : impl_(new Impl(cfg)) {}
DoubledDriver::~DoubledDriver() = default;
DoubledDriver::DoubledDriver(DoubledDriver&&) noexcept = default;

TrajectoryRecord DoubledDriver::run(std::uint64_t master_seed,
                                    std::uint64_t trajectory_id) const {
  TrajectoryStream stream(master_seed, trajectory_id);
  return impl_->run(stream, trajectory_id);
}

TrajectoryRecord DoubledDriver::run(TrajectoryStream& stream,
                                    std::uint64_t trajectory_id) const {
  return impl_->run(stream, trajectory_id);
}

const NoJumpPath& DoubledDriver::path() const { return impl_->nojump; }

const std::vector<double>& DoubledDriver::trace_curve() const { return impl_->trace; }

double DoubledDriver::cumulative_scaled_probability() const {
  return impl_->cumulative_scaled;
}

std::vector<DensityAccumulator> accumulate_density(
    const std::vector<TrajectoryRecord>& records, int n_max, std::size_t n_samples) {
  std::vector<DensityAccumulator> acc;
  acc.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) acc.emplace_back(n_max);
  for (const TrajectoryRecord& rec : records) {
    if (rec.snapshots.size() != n_samples)
      throw ConfigError("density accumulation needs snapshots at every sample time");
    for (std::size_t k = 0; k < n_samples; ++k) acc[k].add(rec.snapshots[k]);
  }
  return acc;
}

}  // namespace nmwf
