#ifndef LANGMPC_DSL_DUAL_HPP_
#define LANGMPC_DSL_DUAL_HPP_

#include <array>
#include <cmath>

namespace langmpc::dsl {

/// Forward-mode dual number carrying N directional derivatives.
template <int N>
struct Dual {
  double v{0.0};
  std::array<double, N> d{};

  static Dual constant(double value) { return Dual{value, {}}; }
  static Dual seeded(double value, int lane) {
    Dual out{value, {}};
    out.d[static_cast<std::size_t>(lane)] = 1.0;
    return out;
  }
};

template <int N>
Dual<N> operator+(const Dual<N>& x, const Dual<N>& y) {
  Dual<N> r{x.v + y.v, {}};
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] + y.d[i];
  return r;
}

template <int N>
Dual<N> operator-(const Dual<N>& x, const Dual<N>& y) {
  Dual<N> r{x.v - y.v, {}};
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] - y.d[i];
  return r;
}

template <int N>
Dual<N> operator-(const Dual<N>& x) {
  Dual<N> r{-x.v, {}};
  for (int i = 0; i < N; ++i) r.d[i] = -x.d[i];
  return r;
}

template <int N>
Dual<N> operator*(const Dual<N>& x, const Dual<N>& y) {
  Dual<N> r{x.v * y.v, {}};
  for (int i = 0; i < N; ++i) r.d[i] = x.d[i] * y.v + x.v * y.d[i];
  return r;
}

template <int N>
Dual<N> operator/(const Dual<N>& x, const Dual<N>& y) {
  const double inv = 1.0 / y.v;
  Dual<N> r{x.v * inv, {}};
  for (int i = 0; i < N; ++i) r.d[i] = (x.d[i] - r.v * y.d[i]) * inv;
  return r;
}

/// Applies f(x) given f and f'(x).
template <int N>
Dual<N> chain(const Dual<N>& x, double value, double slope) {
  Dual<N> r{value, {}};
  for (int i = 0; i < N; ++i) r.d[i] = slope * x.d[i];
  return r;
}

template <int N>
Dual<N> sqrt(const Dual<N>& x) {
  const double s = std::sqrt(x.v);
  return chain(x, s, 0.5 / s);
}

template <int N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.v);
  return chain(x, e, e);
}

template <int N>
Dual<N> powi(const Dual<N>& x, int n) {
  if (n == 0) {
    return Dual<N>::constant(1.0);
  }
  return chain(x, std::pow(x.v, n), n * std::pow(x.v, n - 1));
}

inline double powi(double x, int n) { return std::pow(x, n); }

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual<N>& x) {
  return x.v;
}

template <class T>
T lift(double value) {
  if constexpr (std::is_same_v<T, double>) {
    return value;
  } else {
    return T::constant(value);
  }
}

}  // namespace langmpc::dsl

#endif  // LANGMPC_DSL_DUAL_HPP_
