// Copyright 2026 The mps Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mps {

/// Exact rational number backed by GMP's mpq, always kept in lowest terms.
///
/// Every processing time, load and threshold in the library is a Rational;
/// nothing is ever rounded. Values are regular value types: copyable,
/// totally ordered, hashable.
class Rational {
 public:
  Rational() = default;
  Rational(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(int value) : q_(static_cast<long>(value)) {}  // NOLINT
  Rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
  }
  explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }
  Rational(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    q_ = mpq_class(num, den);
    q_.canonicalize();
  }

  /// Parses "a/b", "a" or a decimal literal such as "0.25" or "3.".
  /// Decimals are read exactly as numerator over a power of ten.
  static Rational parse(std::string_view text);

  const mpq_class& raw() const { return q_; }
  mpz_class numerator() const { return q_.get_num(); }
  mpz_class denominator() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  bool is_integer() const { return q_.get_den() == 1; }

  mpz_class floor() const {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return r;
  }
  mpz_class ceil() const {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
    return r;
  }
  /// floor() narrowed to a machine integer; throws if it does not fit.
  long floor_long() const { return narrow(floor()); }
  long ceil_long() const { return narrow(ceil()); }

  double to_double() const { return q_.get_d(); }

  /// Canonical "a/b" form, lowest terms, denominator always written.
  std::string str() const {
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("rational: division by zero");
    q_ /= o.q_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return cmp(a.q_, b.q_) == 0;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  static long narrow(const mpz_class& z) {
    if (!z.fits_slong_p()) throw std::overflow_error("rational: value does not fit in long");
    return z.get_si();
  }

  mpq_class q_;
};

inline Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("rational: malformed literal '" + std::string(text) + "'");
  };
  auto all_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  };
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return fail();

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return fail();
    mpz_class n(std::string(num), 10), d(std::string(den), 10);
    if (d == 0) throw std::invalid_argument("rational: zero denominator in '" + std::string(text) + "'");
    return Rational(n, d);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return fail();
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))) return fail();
    mpz_class n(std::string(whole.empty() ? "0" : whole) + std::string(frac), 10);
    mpz_class d;
    mpz_ui_pow_ui(d.get_mpz_t(), 10, frac.size());
    return Rational(n, d);
  }
  if (!all_digits(text)) return fail();
  return Rational(mpz_class(std::string(text), 10), mpz_class(1));
}

inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }

/// base^exponent for any integer exponent (base must be nonzero if exponent < 0).
inline Rational pow(const Rational& base, long exponent) {
  if (exponent < 0) return Rational(1) / pow(base, -exponent);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), static_cast<unsigned long>(exponent));
  mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), static_cast<unsigned long>(exponent));
  return Rational(num, den);
}

/// Smallest integer k (possibly negative) with base^k >= x. Exact: found by
/// repeated multiplication or division, never through floating-point logs.
inline long ceil_log(const Rational& x, const Rational& base) {
  if (x.sign() <= 0) throw std::domain_error("ceil_log: argument must be positive");
  if (base <= Rational(1)) throw std::domain_error("ceil_log: base must exceed 1");
  long k = 0;
  Rational v(1);
  if (v >= x) {
    // Walk down while the next lower power still covers x.
    for (Rational lower = v / base; lower >= x; lower /= base) {
      v = lower;
      --k;
    }
    return k;
  }
  while (v < x) {
    v *= base;
    ++k;
  }
  return k;
}

}  // namespace mps

template <>
struct std::hash<mps::Rational> {
  std::size_t operator()(const mps::Rational& r) const noexcept {
    const std::size_t h1 = std::hash<std::string>{}(r.numerator().get_str(16));
    const std::size_t h2 = std::hash<std::string>{}(r.denominator().get_str(16));
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
  }
};
