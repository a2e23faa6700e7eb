#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nmwf/flow.hpp"
#include "nmwf/fock.hpp"
#include "nmwf/jump.hpp"
#include "nmwf/model.hpp"
#include "nmwf/rng.hpp"

namespace nmwf {

enum class Unravelling { mcwf, doubled };

struct TrajectoryConfig {
  const DecayModel* model = nullptr;
  Unravelling unravelling = Unravelling::mcwf;
  double beta = 1.0;
  double dt = 1e-3;
  double horizon = 0.0;
  std::vector<double> sample_grid;  // starts at 0, ends at horizon
  int n_max = 30;
  StateSpec initial;
  std::vector<double> observable_weights;  // empty => number operator
  bool record_snapshots = false;           // doubled pairs at sample times
};

struct JumpEvent {
  double time = 0.0;
  int channel = 0;
  std::uint64_t trajectory_id = 0;
};

struct TrajectoryRecord {
  std::vector<double> values;        // a_i(t_k): <A> (mcwf) or Re<psi|A|phi> (doubled)
  std::vector<double> trace_values;  // Re<psi|phi> per sample time (doubled only)
  std::vector<std::uint8_t> jumped_by;
  std::vector<JumpEvent> jump_log;
  bool multi_jump = false;
  std::vector<DoubledVector> snapshots;  // when record_snapshots
};

// Shared per-run tables for the standard (MCWF) driver: the no-jump
// flow on substeps, precomputed per-step decay multipliers, scaled
// per-step jump probabilities, and the cumulative rate.
class McwfDriver {
 public:
  explicit McwfDriver(const TrajectoryConfig& cfg);
  ~McwfDriver();
  McwfDriver(McwfDriver&&) noexcept;

  TrajectoryRecord run(std::uint64_t master_seed, std::uint64_t trajectory_id) const;
  TrajectoryRecord run(TrajectoryStream& stream, std::uint64_t trajectory_id = 0) const;

  const NoJumpPath& path() const;          // on the sample grid
  double cumulative_scaled_probability() const;  // beta * Lambda(horizon)

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Doubled-space driver: waiting-time inversion along the evolving
// pair, sign-carrying jumps, rebuilt cumulative tables after a jump.
class DoubledDriver {
 public:
  explicit DoubledDriver(const TrajectoryConfig& cfg);
  ~DoubledDriver();
  DoubledDriver(DoubledDriver&&) noexcept;

  TrajectoryRecord run(std::uint64_t master_seed, std::uint64_t trajectory_id) const;
  TrajectoryRecord run(TrajectoryStream& stream, std::uint64_t trajectory_id = 0) const;

  // No-jump reference data on the sample grid. observable_curve holds
  // Re<psi|A|phi> along the deterministic pair; cumulative_rate is the
  // unscaled doubled-space Lambda.
  const NoJumpPath& path() const;
  // Re<psi|phi> along the deterministic pair (identically 1 for the
  // shipped models with phi = psi initially).
  const std::vector<double>& trace_curve() const;
  double cumulative_scaled_probability() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Density accumulation over records with snapshots enabled: one
// accumulator per sample time.
std::vector<DensityAccumulator> accumulate_density(
    const std::vector<TrajectoryRecord>& records, int n_max, std::size_t n_samples);

}  // namespace nmwf
