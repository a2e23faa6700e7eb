#pragma once

namespace nmwf {

// Neumaier compensated summation. Used wherever sums feed tight
// tolerances (expectation values, ensemble statistics).
class KahanSum {
 public:
  void add(double x) {
    double t = s_ + x;
    if ((s_ >= 0 ? s_ : -s_) >= (x >= 0 ? x : -x)) {
      c_ += (s_ - t) + x;
    } else {
      c_ += (x - t) + s_;
    }
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace nmwf
