#include "mzv/rational.hpp"

#include <cmath>

#include "mzv/error.hpp"

namespace mzv {

BigRational::BigRational(long num, long den) : value_(num, den) {
  if (den == 0) throw PreconditionError("zero denominator");
  value_.canonicalize();
}

BigRational BigRational::from_string(const std::string& text) {
  mpq_class v;
  if (v.set_str(text, 10) != 0) throw ParseError("not a rational number: " + text, 0);
  if (v.get_den() == 0) throw PreconditionError("zero denominator in " + text);
  v.canonicalize();
  return BigRational(std::move(v));
}

BigRational& BigRational::operator/=(const BigRational& rhs) {
  if (rhs.value_ == 0) throw PreconditionError("division by zero");
  value_ /= rhs.value_;
  return *this;
}

BigRational BigRational::operator-() const { return BigRational(mpq_class(-value_)); }

BigRational BigRational::inverse_power(int exponent) const {
  if (value_ == 0 && exponent > 0) throw PreconditionError("zero to a negative power");
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), value_.get_den().get_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), value_.get_num().get_mpz_t(), static_cast<unsigned long>(exponent));
  mpq_class out(num, den);
  out.canonicalize();
  return BigRational(std::move(out));
}

double BigRational::to_double() const {
  if (value_ == 0) return 0.0;
  mpz_class num = abs(value_.get_num());
  mpz_class den = value_.get_den();
  // Scale so the integer quotient carries 55-56 significant bits, then round to 53.
  const long shift = 55 - static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) +
                     static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  if (shift >= 0) {
    num <<= static_cast<mp_bitcnt_t>(shift);
  } else {
    den <<= static_cast<mp_bitcnt_t>(-shift);
  }
  mpz_class quotient, remainder;
  mpz_fdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  const long extra = static_cast<long>(mpz_sizeinbase(quotient.get_mpz_t(), 2)) - 53;
  const mpz_class unit = mpz_class(1) << static_cast<mp_bitcnt_t>(extra);
  const mpz_class half = unit >> 1;
  mpz_class low = quotient % unit;
  quotient >>= static_cast<mp_bitcnt_t>(extra);
  const bool above_half = low > half || (low == half && remainder != 0);
  const bool tie = low == half && remainder == 0;
  if (above_half || (tie && mpz_odd_p(quotient.get_mpz_t()))) quotient += 1;
  const double magnitude = std::ldexp(quotient.get_d(), static_cast<int>(extra - shift));
  return sgn(value_) < 0 ? -magnitude : magnitude;
}

}  // namespace mzv
