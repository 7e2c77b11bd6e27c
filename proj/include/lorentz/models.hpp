#pragma once

#include <string>

#include "lorentz/metric.hpp"

namespace lorentz {

MetricField minkowski(int n);
MetricField euclidean(int n);

// Half-space chart, curvature -1/r^2.
MetricField hyperbolic(int n, double r);

// Conformal planar chart (eta, x_1, ..., x_{n-1}), eta in [0.5, 2];
// curvature +1/r^2.
MetricField de_sitter(int n, double r);

// n = 3 uses the SL(2,R) group chart shared with berger_sl2; other n use the
// Poincare-style half-space chart with z last. Curvature -1/r^2.
MetricField anti_de_sitter(int n, double r);

struct WarpedSpec {
  std::string name;
  MetricField base;   // Riemannian factor L
  MetricField fiber;  // Lorentzian factor N
  Expr warp;          // positive function of the base coordinates
};

// Product chart with metric h (+) w * g. Fiber coordinates colliding with
// base names get a "_f" suffix.
MetricField warped(const WarpedSpec& spec, const Tolerances& tol = default_tolerances());

// Left-invariant Lorentz metric on SL(2,R) in the N*A*N coordinates
// (h, u, v): the Killing-form pairing is kept on the span of the two
// nilpotent directions and the hyperbolic direction is scaled by epsilon.
// epsilon = 1 is anti-de Sitter; epsilon != 1 is the bi-polarized
// deformation.
MetricField berger_sl2(double epsilon);

// Chart point of the group element N(u) D(h) M(v), and its inverse. Used by
// tests to realize isometries as chart self-maps.
Eigen::Matrix2d sl2_from_chart(const Vec& p);
Vec sl2_to_chart(const Eigen::Matrix2d& a);

}  // namespace lorentz
