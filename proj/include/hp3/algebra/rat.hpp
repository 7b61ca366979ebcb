#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace hp3 {

/// Exact rational number. GMP keeps numerator/denominator coprime with a
/// positive denominator after every arithmetic operation.
using Rat = mpq_class;
using BigInt = mpz_class;

inline Rat make_rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline bool is_zero(const Rat& r) { return sgn(r) == 0; }

/// "p/q" or "p"; never uses a decimal point.
inline std::string to_string(const Rat& r) { return r.get_str(); }

inline double to_double(const Rat& r) { return r.get_d(); }

/// r^k for k >= 0.
inline Rat pow(const Rat& r, unsigned k) {
  Rat out(1);
  Rat base = r;
  while (k != 0) {
    if (k & 1U) out *= base;
    base *= base;
    k >>= 1U;
  }
  return out;
}

}  // namespace hp3
