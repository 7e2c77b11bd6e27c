#pragma once

#include <cmath>

#include "lorentz/types.hpp"

namespace lorentz {

// First order forward-mode value: f and grad f at a point.
struct Jet1 {
  double v = 0.0;
  Vec g;

  static Jet1 constant(int n, double c) {
    Jet1 j;
    j.v = c;
    j.g = Vec::Zero(n);
    return j;
  }
  static Jet1 coordinate(int n, int i, double x) {
    Jet1 j = constant(n, x);
    j.g(i) = 1.0;
    return j;
  }
};

// Second order: f, grad f, Hess f. All update rules below keep the Hessian
// bitwise symmetric: rank-two terms are assembled as S + S^T before use.
struct Jet2 {
  double v = 0.0;
  Vec g;
  Mat h;

  static Jet2 constant(int n, double c) {
    Jet2 j;
    j.v = c;
    j.g = Vec::Zero(n);
    j.h = Mat::Zero(n, n);
    return j;
  }
  static Jet2 coordinate(int n, int i, double x) {
    Jet2 j = constant(n, x);
    j.g(i) = 1.0;
    return j;
  }
};

inline Mat sym_outer(const Vec& a, const Vec& b) {
  Mat s = a * b.transpose();
  Mat out = s + s.transpose();
  return out;
}

inline Jet1 operator+(const Jet1& a, const Jet1& b) { return {a.v + b.v, a.g + b.g}; }
inline Jet1 operator-(const Jet1& a, const Jet1& b) { return {a.v - b.v, a.g - b.g}; }
inline Jet1 operator-(const Jet1& a) { return {-a.v, -a.g}; }
inline Jet1 operator*(const Jet1& a, const Jet1& b) { return {a.v * b.v, a.g * b.v + b.g * a.v}; }
inline Jet1 operator/(const Jet1& a, const Jet1& b) {
  double q = a.v / b.v;
  return {q, (a.g - b.g * q) / b.v};
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.h}; }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v * b.v;
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v + sym_outer(a.g, b.g);
  return r;
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.v = a.v / b.v;
  r.g = (a.g - b.g * r.v) / b.v;
  r.h = (a.h - b.h * r.v - sym_outer(r.g, b.g)) / b.v;
  return r;
}

// Composition with u(f): needs u(f), u'(f), u''(f).
inline Jet1 compose(const Jet1& f, double u, double du) { return {u, f.g * du}; }
inline Jet2 compose(const Jet2& f, double u, double du, double ddu) {
  Jet2 r;
  r.v = u;
  r.g = f.g * du;
  r.h = f.h * du + (f.g * f.g.transpose()) * ddu;
  return r;
}

inline Jet1 exp(const Jet1& f) { double e = std::exp(f.v); return compose(f, e, e); }
inline Jet2 exp(const Jet2& f) { double e = std::exp(f.v); return compose(f, e, e, e); }

inline Jet1 log(const Jet1& f) { return compose(f, std::log(f.v), 1.0 / f.v); }
inline Jet2 log(const Jet2& f) {
  return compose(f, std::log(f.v), 1.0 / f.v, -1.0 / (f.v * f.v));
}

inline Jet1 sin(const Jet1& f) { return compose(f, std::sin(f.v), std::cos(f.v)); }
inline Jet2 sin(const Jet2& f) {
  double s = std::sin(f.v);
  return compose(f, s, std::cos(f.v), -s);
}

inline Jet1 cos(const Jet1& f) { return compose(f, std::cos(f.v), -std::sin(f.v)); }
inline Jet2 cos(const Jet2& f) {
  double c = std::cos(f.v);
  return compose(f, c, -std::sin(f.v), -c);
}

inline Jet1 sinh(const Jet1& f) { return compose(f, std::sinh(f.v), std::cosh(f.v)); }
inline Jet2 sinh(const Jet2& f) {
  double s = std::sinh(f.v);
  return compose(f, s, std::cosh(f.v), s);
}

inline Jet1 cosh(const Jet1& f) { return compose(f, std::cosh(f.v), std::sinh(f.v)); }
inline Jet2 cosh(const Jet2& f) {
  double c = std::cosh(f.v);
  return compose(f, c, std::sinh(f.v), c);
}

inline Jet1 tanh(const Jet1& f) {
  double t = std::tanh(f.v);
  return compose(f, t, 1.0 - t * t);
}
inline Jet2 tanh(const Jet2& f) {
  double t = std::tanh(f.v);
  double d = 1.0 - t * t;
  return compose(f, t, d, -2.0 * t * d);
}

inline Jet1 sqrt(const Jet1& f) {
  double s = std::sqrt(f.v);
  return compose(f, s, 0.5 / s);
}
inline Jet2 sqrt(const Jet2& f) {
  double s = std::sqrt(f.v);
  return compose(f, s, 0.5 / s, -0.25 / (s * f.v));
}

inline Jet1 pow(const Jet1& f, int k) {
  if (k == 0) return Jet1::constant(static_cast<int>(f.g.size()), 1.0);
  if (k == 1) return f;
  double u = std::pow(f.v, k);
  double du = k * std::pow(f.v, k - 1);
  return compose(f, u, du);
}
inline Jet2 pow(const Jet2& f, int k) {
  if (k == 0) return Jet2::constant(static_cast<int>(f.g.size()), 1.0);
  if (k == 1) return f;
  double u = std::pow(f.v, k);
  double du = k * std::pow(f.v, k - 1);
  double ddu = static_cast<double>(k) * (k - 1) * std::pow(f.v, k - 2);
  return compose(f, u, du, ddu);
}

}  // namespace lorentz
