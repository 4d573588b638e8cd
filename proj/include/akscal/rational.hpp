#pragma once

// Exact rational scalar used by the exact-arithmetic code paths, plus the
// glue that lets Eigen's dense containers hold it.

#include <Eigen/Core>
#include <boost/rational.hpp>

#include <cctype>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

namespace akscal {

using Rational = boost::rational<std::int64_t>;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

inline double toDouble(double v) { return v; }
inline double toDouble(const Rational& v) {
  return static_cast<double>(v.numerator()) / static_cast<double>(v.denominator());
}

template <class S>
S fromInt(std::int64_t v) {
  return S(v);
}

/// S(num)/S(den) without going through double for the exact type.
template <class S>
S ratio(std::int64_t num, std::int64_t den) {
  if constexpr (is_exact_v<S>) {
    return Rational(num, den);
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

inline std::string toString(const Rational& v) {
  if (v.denominator() == 1) return std::to_string(v.numerator());
  return std::to_string(v.numerator()) + "/" + std::to_string(v.denominator());
}

/// Parses "7", "-3/4" or a plain decimal "0.125" exactly. Exponent
/// notation and anything else return nullopt.
inline std::optional<Rational> parseRational(std::string_view text) {
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char ch : s)
      if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
  };
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  try {
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
      auto num = body.substr(0, slash);
      auto den = body.substr(slash + 1);
      if (!digits(num) || !digits(den)) return std::nullopt;
      std::int64_t d = std::stoll(std::string(den));
      if (d == 0) return std::nullopt;
      Rational r(std::stoll(std::string(num)), d);
      return negative ? -r : r;
    }
    auto dot = body.find('.');
    std::string_view whole = body.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if (!whole.empty() && !digits(whole)) return std::nullopt;
    if (dot != std::string_view::npos && !frac.empty() && !digits(frac)) return std::nullopt;
    if (frac.size() > 15) return std::nullopt;
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    std::int64_t w = whole.empty() ? 0 : std::stoll(std::string(whole));
    std::int64_t f = frac.empty() ? 0 : std::stoll(std::string(frac));
    if (w > (std::numeric_limits<std::int64_t>::max() - f) / scale) return std::nullopt;
    Rational r(w * scale + f, scale);
    return negative ? -r : r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace akscal

namespace Eigen {

template <>
struct NumTraits<akscal::Rational> : GenericNumTraits<akscal::Rational> {
  using Real = akscal::Rational;
  using NonInteger = akscal::Rational;
  using Literal = akscal::Rational;
  using Nested = akscal::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  static Real epsilon() { return Real(0); }
  static Real dummy_precision() { return Real(0); }
  static Real highest() { return Real(std::numeric_limits<std::int64_t>::max()); }
  static Real lowest() { return Real(std::numeric_limits<std::int64_t>::min() + 1); }
  static int digits10() { return 18; }
};

}  // namespace Eigen
