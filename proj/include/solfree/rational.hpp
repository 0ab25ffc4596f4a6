#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace solfree {

/// Exact arbitrary-precision rational; every measure and density is one.
using Rational = mpq_class;
using BigInt = mpz_class;

/// Canonical "p/q" form; integers are printed without a denominator.
std::string to_string(const Rational& q);

/// Accepts "p/q", "p" or a finite decimal such as "0.25".
Rational parse_rational(std::string_view text);

/// Exact binary value of a double (no rounding).
Rational rational_from_double(double x);

Rational make_rational(std::int64_t num, std::int64_t den = 1);

BigInt to_bigint(unsigned __int128 v);

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t lcm64(std::int64_t a, std::int64_t b);

/// Residue of a mod m in [0, m).
inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

/// Inverse of a modulo m; m > 1 and gcd(a, m) = 1 required.
std::int64_t mod_inverse(std::int64_t a, std::int64_t m);

}  // namespace solfree
