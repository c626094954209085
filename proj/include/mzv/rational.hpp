#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace mzv {

/// Arbitrary-precision rational in canonical form (gcd(num, den) = 1, den > 0).
class BigRational {
 public:
  BigRational() = default;
  BigRational(long value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  BigRational(long num, long den);

  static BigRational from_string(const std::string& text);

  BigRational& operator+=(const BigRational& rhs) {
    value_ += rhs.value_;
    return *this;
  }
  BigRational& operator-=(const BigRational& rhs) {
    value_ -= rhs.value_;
    return *this;
  }
  BigRational& operator*=(const BigRational& rhs) {
    value_ *= rhs.value_;
    return *this;
  }
  BigRational& operator/=(const BigRational& rhs);

  friend BigRational operator+(BigRational a, const BigRational& b) { return a += b; }
  friend BigRational operator-(BigRational a, const BigRational& b) { return a -= b; }
  friend BigRational operator*(BigRational a, const BigRational& b) { return a *= b; }
  friend BigRational operator/(BigRational a, const BigRational& b) { return a /= b; }
  BigRational operator-() const;

  friend bool operator==(const BigRational& a, const BigRational& b) { return a.value_ == b.value_; }
  friend bool operator<(const BigRational& a, const BigRational& b) { return a.value_ < b.value_; }
  friend bool operator>(const BigRational& a, const BigRational& b) { return a.value_ > b.value_; }
  friend bool operator<=(const BigRational& a, const BigRational& b) { return a.value_ <= b.value_; }

  /// this^(-exponent), exponent >= 0.
  BigRational inverse_power(int exponent) const;

  int sign() const { return sgn(value_); }
  /// Correctly rounded to nearest.
  double to_double() const;
  /// "num/den", or "num" when den = 1.
  std::string to_string() const { return value_.get_str(); }
  std::string numerator() const { return value_.get_num().get_str(); }
  std::string denominator() const { return value_.get_den().get_str(); }

 private:
  explicit BigRational(mpq_class v) : value_(std::move(v)) {}
  mpq_class value_;
};

}  // namespace mzv
