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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mps/rational.hpp"

namespace mps::detail {

// Exact integer image of a set of rationals: value_i = p_i * scale.
// Search kernels run on int64 whenever every partial sum they can form
// (bounded by `sum_bound` copies of the values) provably fits.
struct ScaledValues {
  std::vector<std::int64_t> values;
  mpz_class scale;
};

inline std::optional<ScaledValues> scale_to_int64(std::span<const Rational> xs, const mpz_class& sum_bound) {
  mpz_class lcm_den = 1;
  for (const auto& x : xs) {
    mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), x.raw().get_den_mpz_t());
  }
  ScaledValues out;
  out.scale = lcm_den;
  mpz_class largest = 0;
  for (const auto& x : xs) {
    mpz_class v = x.raw().get_num() * (lcm_den / x.raw().get_den());
    if (v > largest) largest = v;
    if (!v.fits_slong_p()) return std::nullopt;
    out.values.push_back(v.get_si());
  }
  // Leave a factor of 4 headroom for doubled comparisons.
  const mpz_class limit = mpz_class(std::numeric_limits<std::int64_t>::max() / 4);
  if (largest * sum_bound > limit) return std::nullopt;
  return out;
}

inline Rational unscale(std::int64_t v, const mpz_class& scale) {
  return Rational(mpz_class(static_cast<long>(v)), scale);
}
inline Rational unscale(const Rational& v, const mpz_class&) { return v; }

inline long ceil_div(std::int64_t a, std::int64_t b) {
  // b > 0
  return static_cast<long>(a >= 0 ? (a + b - 1) / b : -((-a) / b));
}
inline long ceil_div(const Rational& a, const Rational& b) { return (a / b).ceil_long(); }

}  // namespace mps::detail
