#pragma once

#include <complex>
#include <vector>

namespace nmwf {

using Complex = std::complex<double>;

// Diagonal observable in the Fock basis: number operator, identity, or
// arbitrary per-level weights.
class DiagonalObservable {
 public:
  explicit DiagonalObservable(std::vector<double> weights);
  static DiagonalObservable number(int n_max);
  static DiagonalObservable identity(int n_max);

  double weight(int n) const { return w_[static_cast<std::size_t>(n)]; }
  int n_max() const { return static_cast<int>(w_.size()) - 1; }

 private:
  std::vector<double> w_;
};

// State vector over a truncated Fock basis |0>..|n_max>.
class FockVector {
 public:
  explicit FockVector(int n_max);
  FockVector(int n_max, std::vector<Complex> amplitudes);

  int n_max() const { return n_max_; }
  int dim() const { return n_max_ + 1; }
  const std::vector<Complex>& amplitudes() const { return amp_; }
  Complex amplitude(int n) const { return amp_[static_cast<std::size_t>(n)]; }
  Complex& at(int n) { return amp_[static_cast<std::size_t>(n)]; }

  double norm2() const;
  double norm() const;
  // No-op when the norm is already within 1e-13 of 1, which makes
  // normalize idempotent bitwise.
  void normalize();
  void scale(Complex factor);
  bool is_finite() const;
  // Population in the top two levels; the truncation-leak monitor.
  double top_population() const;

 private:
  int n_max_;
  std::vector<Complex> amp_;
};

// Pair (phi, psi) of Fock vectors evolving in the doubled space.
struct DoubledVector {
  FockVector upper;  // phi
  FockVector lower;  // psi

  DoubledVector(FockVector phi, FockVector psi);
  int n_max() const { return upper.n_max(); }
  double norm2() const { return upper.norm2() + lower.norm2(); }
};

enum class LadderKind { lower, raise };

struct StateSpec {
  enum class Kind { fock, coherent, superposition };
  Kind kind = Kind::fock;
  int fock_n = 0;
  Complex xi = 0.0;                    // coherent amplitude
  // Optional exact squared amplitude. |xi|^2 of the stored double is
  // off by ~1 ulp when xi itself is irrational (e.g. sqrt 2); setting
  // this keeps the initial moments exact.
  double xi2 = -1.0;
  std::vector<Complex> superposition;  // amplitudes over |0>, |1>, ...
};

// Builds the (normalized) initial state. Coherent states are truncated
// and renormalized; a tail population >= 1e-8 is a ConfigError.
FockVector make_initial_state(const StateSpec& spec, int n_max);

struct LadderResult {
  FockVector state;          // unnormalized
  double leaked = 0.0;       // population dropped past n_max (raise only)
};

LadderResult ladder_apply(LadderKind kind, const FockVector& state);

// <psi|A|psi> / <psi|psi>. Throws NumericalError on zero-norm input.
double observable_expectation(const FockVector& state, const DiagonalObservable& obs);

// <psi|A|phi>, unnormalized.
Complex cross_expectation(const DoubledVector& pair, const DiagonalObservable& obs);

// Running sum of outer products |phi><psi| over realizations.
class DensityAccumulator {
 public:
  explicit DensityAccumulator(int n_max);

  void add(const DoubledVector& pair);
  void merge(const DensityAccumulator& other);
  long count() const { return count_; }
  int dim() const { return dim_; }
  // (row, col) entry of matrix_sum / count.
  Complex mean(int row, int col) const;

 private:
  int dim_;
  long count_ = 0;
  std::vector<Complex> sum_;  // row-major dim x dim
};

}  // namespace nmwf
