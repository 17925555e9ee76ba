#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "error.hpp"

namespace edgereg::core {

using BigInt = boost::multiprecision::cpp_int;
// Arbitrary precision: thresholds like eta^3 = eps^12/16^3 overflow any
// fixed-width numerator/denominator for decimal eps.
using Rational = boost::multiprecision::cpp_rational;

inline BigInt floor_rat(const Rational& x) {
  BigInt q = numerator(x) / denominator(x);  // truncates toward zero
  if (numerator(x) < 0 && q * denominator(x) != numerator(x)) --q;
  return q;
}

inline BigInt ceil_rat(const Rational& x) { return -floor_rat(-x); }

// Smallest integer >= x as a size (negative x clamps to 0). Used for every
// size bound written as a real quantity (eps*m, eps^4*n/16, ...).
inline std::size_t ceil_size(const Rational& x) {
  BigInt c = ceil_rat(x);
  if (c < 0) return 0;
  return c.convert_to<std::size_t>();
}

inline double approx(const Rational& x) { return x.convert_to<double>(); }

// Accepts "p/q", integers, and decimals ("0.375"), all parsed exactly.
inline Rational parse_rational(std::string_view s) {
  auto fail = [&] { throw Error("bad-rational", std::string(s)); };
  std::string_view body = s;
  bool neg = false;
  if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
    neg = body[0] == '-';
    body.remove_prefix(1);
  }
  if (body.empty()) fail();

  auto digits_ok = [](std::string_view d) {
    if (d.empty()) return false;
    for (char c : d)
      if (c < '0' || c > '9') return false;
    return true;
  };

  Rational out;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    std::string_view ns = body.substr(0, slash), ds = body.substr(slash + 1);
    if (!digits_ok(ns) || !digits_ok(ds)) fail();
    BigInt num{std::string(ns)}, den{std::string(ds)};
    if (den == 0) fail();
    out = Rational(num, den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view is = body.substr(0, dot), fs = body.substr(dot + 1);
    if (is.empty() && fs.empty()) fail();
    if (!is.empty() && !digits_ok(is)) fail();
    if (!fs.empty() && !digits_ok(fs)) fail();
    BigInt num = is.empty() ? BigInt(0) : BigInt(std::string(is));
    BigInt den = 1;
    for (char c : fs) {
      num = num * 10 + (c - '0');
      den *= 10;
    }
    out = Rational(num, den);
  } else {
    if (!digits_ok(body)) fail();
    out = Rational(BigInt{std::string(body)});
  }
  if (neg) out = -out;
  return out;
}

}  // namespace edgereg::core
