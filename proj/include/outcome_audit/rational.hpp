/*
 * Copyright 2026 The outcome-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>

namespace outcome_audit {

// Exact rational arithmetic for the built-in demo fixtures, whose masses and
// qualification levels are small integers and tenths. Keeping these values
// exact lets the demo reports print, e.g., 0.75 as "0.75" rather than as a
// rounded double.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // always > 0, gcd(|num|, den) == 1

  static Rational of(std::int64_t n, std::int64_t d) {
    Rational r{n, d};
    r.normalize();
    return r;
  }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Rational operator+(Rational a, Rational b) {
    return of(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(Rational a, Rational b) {
    return of(a.num * b.num, a.den * b.den);
  }
  friend Rational operator/(Rational a, Rational b) {
    return of(a.num * b.den, a.den * b.num);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }

  // Exact decimal when the reduced denominator is of the form 2^a * 5^b
  // ("0.75", "0.6"); otherwise a 15-significant-digit decimal followed by
  // the exact fraction, e.g. "0.783333333333333 (47/60)".
  std::string to_display() const {
    std::int64_t d = den;
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    if (d == 1) {
      // Terminating decimal: scale the fraction to a power of ten.
      std::int64_t scale = 1;
      std::int64_t rem = den;
      while (rem > 1) {
        scale *= 10;
        rem = den / std::gcd(den, scale);
        if (scale > 1000000000000LL) break;
      }
      const std::int64_t whole = num / den;
      std::int64_t frac_num = (num % den) * scale / den;
      if (frac_num < 0) frac_num = -frac_num;
      const std::string sign = (num < 0 && whole == 0) ? "-" : "";
      if (frac_num == 0) return sign + std::to_string(whole);
      std::string frac = std::to_string(frac_num);
      std::int64_t digits = 0;
      for (std::int64_t s = scale; s > 1; s /= 10) ++digits;
      frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
      while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
      return sign + std::to_string(whole) + "." + frac;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g (%lld/%lld)", value(),
                  static_cast<long long>(num), static_cast<long long>(den));
    return buf;
  }
};

}  // namespace outcome_audit
