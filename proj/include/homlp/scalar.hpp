#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <string_view>

#include <boost/multiprecision/float128.hpp>

namespace homlp {

/// 113-bit significand software float (IEEE binary128 via libquadmath).
using Quad = boost::multiprecision::float128;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr const char* name = "Float64";
  static double parse(std::string_view s) { return std::stod(std::string(s)); }
  static std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
};

template <>
struct ScalarTraits<Quad> {
  static constexpr const char* name = "Float128";
  static Quad parse(std::string_view s) { return Quad(std::string(s)); }
  static std::string format(const Quad& v) { return v.str(36, std::ios_base::fmtflags(0)); }
};

template <class T>
T machine_epsilon() {
  return std::numeric_limits<T>::epsilon();
}

template <class T>
T sqrt_epsilon() {
  using std::sqrt;
  return sqrt(machine_epsilon<T>());
}

template <class T>
T infinity() {
  return std::numeric_limits<T>::infinity();
}

template <class T>
bool is_finite(const T& v) {
  using std::isfinite;
  return static_cast<bool>(isfinite(v));
}

template <class T>
double to_double(const T& v) {
  return static_cast<double>(v);
}

/// A real number extended with -inf and +inf.
///
/// Bounds are stored through this type instead of as huge sentinel values so
/// that infinite bounds can never leak into norms or products.
template <class T>
class ExtendedReal {
 public:
  enum class Kind { NegInf, Finite, PosInf };

  ExtendedReal() = default;
  ExtendedReal(T v) : kind_(Kind::Finite), value_(v) {  // NOLINT(implicit)
    using std::isinf;
    if (isinf(v)) {
      kind_ = v > 0 ? Kind::PosInf : Kind::NegInf;
      value_ = T(0);
    }
  }

  static ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf); }
  static ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf); }

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::Finite; }
  bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  /// Finite value; only meaningful when finite().
  const T& value() const { return value_; }

  /// Value as T with +-infinity for the infinite kinds (for comparisons only).
  T as_scalar() const {
    switch (kind_) {
      case Kind::NegInf: return -infinity<T>();
      case Kind::PosInf: return infinity<T>();
      default: return value_;
    }
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::Finite || a.value_ == b.value_);
  }

 private:
  explicit ExtendedReal(Kind k) : kind_(k), value_(T(0)) {}
  Kind kind_ = Kind::Finite;
  T value_ = T(0);
};

}  // namespace homlp
