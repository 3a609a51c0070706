#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace qtlab {

/// Exact edge lengths and distances. All core metric computations stay in
/// this type; floating point only appears in fitted constants.
using Rational = boost::rational<std::int64_t>;

/// "p/q", or "p" when q == 1.
std::string to_string(const Rational& q);

/// Accepts "p", "p/q", and finite decimals such as "0.5".
Rational parse_rational(std::string_view text);

inline double to_double(const Rational& q) {
  return boost::rational_cast<double>(q);
}

inline Rational abs(const Rational& q) { return q < 0 ? -q : q; }

}  // namespace qtlab

// Boost 1.74's mixed rational/integer operator== recurses forever under
// C++20 rewritten comparisons. Exact non-template overloads win overload
// resolution and end the recursion.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == static_cast<std::int64_t>(b); }
inline bool operator==(std::int64_t b, const rational<std::int64_t>& a) { return a == b; }
inline bool operator==(int b, const rational<std::int64_t>& a) { return a == static_cast<std::int64_t>(b); }
}  // namespace boost
