#include "nmwf/fock.hpp"

#include <cmath>
#include <cstddef>

#include "nmwf/accum.hpp"
#include "nmwf/errors.hpp"

namespace nmwf {

DiagonalObservable::DiagonalObservable(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw ConfigError("observable needs at least one weight");
}

DiagonalObservable DiagonalObservable::number(int n_max) {
  std::vector<double> w(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) w[static_cast<std::size_t>(n)] = n;
  return DiagonalObservable(std::move(w));
}

DiagonalObservable DiagonalObservable::identity(int n_max) {
  return DiagonalObservable(std::vector<double>(static_cast<std::size_t>(n_max) + 1, 1.0));
}

FockVector::FockVector(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  amp_.resize(static_cast<std::size_t>(n_max) + 1, Complex(0.0, 0.0));
}

FockVector::FockVector(int n_max, std::vector<Complex> amplitudes) : n_max_(n_max), amp_(std::move(amplitudes)) {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (amp_.size() != static_cast<std::size_t>(n_max) + 1)
    throw ConfigError("amplitude count does not match n_max + 1");
}

double FockVector::norm2() const {
  KahanSum s;
  for (const Complex& c : amp_) s.add(std::norm(c));
  return s.value();
}

double FockVector::norm() const { return std::sqrt(norm2()); }

void FockVector::normalize() {
  double nrm = norm();
  if (nrm == 0.0) throw NumericalError("cannot normalize a zero state");
  if (std::abs(nrm - 1.0) <= 1e-13) return;
  for (Complex& c : amp_) c /= nrm;
}

void FockVector::scale(Complex factor) {
  for (Complex& c : amp_) c *= factor;
}

bool FockVector::is_finite() const {
  for (const Complex& c : amp_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

double FockVector::top_population() const {
  const std::size_t d = amp_.size();
  return std::norm(amp_[d - 1]) + std::norm(amp_[d - 2]);
}

DoubledVector::DoubledVector(FockVector phi, FockVector psi)
    : upper(std::move(phi)), lower(std::move(psi)) {
  if (upper.n_max() != lower.n_max())
    throw ConfigError("doubled-space components must share n_max");
}

FockVector make_initial_state(const StateSpec& spec, int n_max) {
  FockVector out(n_max);
  switch (spec.kind) {
    case StateSpec::Kind::fock: {
      if (spec.fock_n < 0 || spec.fock_n > n_max)
        throw ConfigError("fock level outside the truncated basis");
      out.at(spec.fock_n) = 1.0;
      return out;
    }
    case StateSpec::Kind::coherent: {
      // c_n = xi^n / sqrt(n!), built recursively in extended precision
      // and renormalized over the kept levels, so moments of the stored
      // amplitudes round to the exact truncated values.
      const std::complex<long double> xi(spec.xi.real(), spec.xi.imag());
      const long double x2 = spec.xi2 > 0.0 ? static_cast<long double>(spec.xi2)
                                            : std::norm(xi);
      const std::complex<long double> unit =
          std::abs(xi) > 0.0L ? xi / std::abs(xi) : std::complex<long double>(1.0L);
      // Populations first (p_n = x2^n / n!), phases reattached after.
      std::vector<long double> p(static_cast<std::size_t>(n_max) + 1);
      p[0] = 1.0L;
      long double kept = 1.0L;
      for (int n = 1; n <= n_max; ++n) {
        p[static_cast<std::size_t>(n)] =
            p[static_cast<std::size_t>(n - 1)] * x2 / static_cast<long double>(n);
        kept += p[static_cast<std::size_t>(n)];
      }
      if (static_cast<double>(1.0L - kept / std::exp(x2)) >= 1e-8)
        throw ConfigError("truncation too small for coherent state tail");
      const long double nrm = std::sqrt(kept);
      std::complex<long double> phase = 1.0L;
      for (int n = 0; n <= n_max; ++n) {
        const std::complex<long double> v =
            phase * (std::sqrt(p[static_cast<std::size_t>(n)]) / nrm);
        out.at(n) = Complex(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        phase *= unit;
      }
      return out;
    }
    case StateSpec::Kind::superposition: {
      if (spec.superposition.empty()) throw ConfigError("empty superposition list");
      if (spec.superposition.size() > static_cast<std::size_t>(n_max) + 1)
        throw ConfigError("superposition list longer than the truncated basis");
      for (std::size_t n = 0; n < spec.superposition.size(); ++n)
        out.at(static_cast<int>(n)) = spec.superposition[n];
      out.normalize();
      return out;
    }
  }
  throw ConfigError("unknown state kind");
}

LadderResult ladder_apply(LadderKind kind, const FockVector& state) {
  const int n_max = state.n_max();
  LadderResult out{FockVector(n_max), 0.0};
  if (kind == LadderKind::lower) {
    // (a psi)_n = sqrt(n+1) c_{n+1}
    for (int n = 0; n < n_max; ++n)
      out.state.at(n) = std::sqrt(static_cast<double>(n + 1)) * state.amplitude(n + 1);
  } else {
    // (a^dag psi)_n = sqrt(n) c_{n-1}; the component leaving the
    // truncated basis is dropped and flagged.
    for (int n = 1; n <= n_max; ++n)
      out.state.at(n) = std::sqrt(static_cast<double>(n)) * state.amplitude(n - 1);
    out.leaked = static_cast<double>(n_max + 1) * std::norm(state.amplitude(n_max));
  }
  return out;
}

double observable_expectation(const FockVector& state, const DiagonalObservable& obs) {
  if (obs.n_max() != state.n_max()) throw ConfigError("observable/state n_max mismatch");
  KahanSum num;
  KahanSum den;
  for (int n = 0; n <= state.n_max(); ++n) {
    const double p = std::norm(state.amplitude(n));
    num.add(obs.weight(n) * p);
    den.add(p);
  }
  const double d = den.value();
  if (d == 0.0) throw NumericalError("expectation of a zero-norm state");
  return num.value() / d;
}

Complex cross_expectation(const DoubledVector& pair, const DiagonalObservable& obs) {
  if (obs.n_max() != pair.n_max()) throw ConfigError("observable/pair n_max mismatch");
  KahanSum re;
  KahanSum im;
  for (int n = 0; n <= pair.n_max(); ++n) {
    const Complex term =
        std::conj(pair.lower.amplitude(n)) * pair.upper.amplitude(n) * obs.weight(n);
    re.add(term.real());
    im.add(term.imag());
  }
  return {re.value(), im.value()};
}

DensityAccumulator::DensityAccumulator(int n_max) : dim_(n_max + 1) {
  sum_.resize(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_),
              Complex(0.0, 0.0));
}

void DensityAccumulator::add(const DoubledVector& pair) {
  if (pair.n_max() + 1 != dim_) throw ConfigError("accumulator/pair dimension mismatch");
  for (int i = 0; i < dim_; ++i) {
    const Complex phi_i = pair.upper.amplitude(i);
    for (int j = 0; j < dim_; ++j) {
      sum_[static_cast<std::size_t>(i * dim_ + j)] +=
          phi_i * std::conj(pair.lower.amplitude(j));
    }
  }
  ++count_;
}

void DensityAccumulator::merge(const DensityAccumulator& other) {
  if (other.dim_ != dim_) throw ConfigError("accumulator dimension mismatch");
  for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += other.sum_[k];
  count_ += other.count_;
}

Complex DensityAccumulator::mean(int row, int col) const {
  if (count_ == 0) throw NumericalError("empty density accumulator");
  return sum_[static_cast<std::size_t>(row * dim_ + col)] / static_cast<double>(count_);
}

}  // namespace nmwf
