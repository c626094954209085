#pragma once

namespace mzv {

/// Neumaier variant of compensated summation; robust when an addend exceeds the running sum.
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double value) {
    const double t = sum + value;
    if ((sum >= 0 ? sum : -sum) >= (value >= 0 ? value : -value)) {
      compensation += (sum - t) + value;
    } else {
      compensation += (value - t) + sum;
    }
    sum = t;
  }

  CompensatedSum& operator+=(double value) {
    add(value);
    return *this;
  }

  double value() const { return sum + compensation; }
};

}  // namespace mzv
