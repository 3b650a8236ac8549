#pragma once

#include <cmath>

namespace htlip {

/// Second-order forward-mode jet: value with first and second derivative
/// with respect to a single scalar variable. Used to differentiate the
/// closed-form surface programs exactly.
template <typename T>
struct Jet2 {
  T v{0}, d1{0}, d2{0};

  constexpr Jet2() = default;
  constexpr Jet2(T value) : v(value) {}  // NOLINT: implicit constant lift
  constexpr Jet2(T value, T first, T second) : v(value), d1(first), d2(second) {}

  static constexpr Jet2 variable(T x) { return {x, T{1}, T{0}}; }
};

template <typename T>
constexpr Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
template <typename T>
constexpr Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
template <typename T>
constexpr Jet2<T> operator-(const Jet2<T>& a) {
  return {-a.v, -a.d1, -a.d2};
}
template <typename T>
constexpr Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + T{2} * a.d1 * b.d1 + a.v * b.d2};
}
template <typename T>
constexpr Jet2<T> operator*(T s, const Jet2<T>& a) {
  return {s * a.v, s * a.d1, s * a.d2};
}
template <typename T>
constexpr Jet2<T> operator*(const Jet2<T>& a, T s) {
  return s * a;
}
template <typename T>
constexpr Jet2<T> operator+(const Jet2<T>& a, T s) {
  return {a.v + s, a.d1, a.d2};
}
template <typename T>
constexpr Jet2<T> operator+(T s, const Jet2<T>& a) {
  return a + s;
}

// Chain rule for a unary function with derivatives f0, f1, f2 at a.v.
template <typename T>
constexpr Jet2<T> compose(const Jet2<T>& a, T f0, T f1, T f2) {
  return {f0, f1 * a.d1, f2 * a.d1 * a.d1 + f1 * a.d2};
}

template <typename T>
Jet2<T> sin(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v);
  return compose(a, s, cos(a.v), -s);
}
template <typename T>
Jet2<T> cos(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a.v);
  return compose(a, c, -sin(a.v), -c);
}
template <typename T>
Jet2<T> exp(const Jet2<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return compose(a, e, e, e);
}
template <typename T>
Jet2<T> sqrt(const Jet2<T>& a) {
  using std::sqrt;
  const T r = sqrt(a.v);
  return compose(a, r, T{0.5} / r, T{-0.25} / (r * a.v));
}

}  // namespace htlip
