#pragma once

#include <vector>

#include "lorentz/metric.hpp"

namespace lorentz {

struct GeodesicState {
  double s = 0.0;
  Vec x;
  Vec v;
};

struct IntegrateOptions {
  double step = 0.0;     // <= 0 picks s_max / 1000
  int store_every = 1;   // keep every k-th state (first and last always kept)
};

// Fixed-step RK4 on x'' + Gamma(x)(x', x') = 0. Throws a chart-bounds error
// if the path leaves the box.
std::vector<GeodesicState> integrate_geodesic(const MetricField& m, const Vec& x0, const Vec& v0,
                                              double s_max, const IntegrateOptions& opt = {},
                                              const Tolerances& tol = default_tolerances());

// Relative drift of g(v, v) along the states (exact conservation law of the
// geodesic flow).
double energy_drift(const MetricField& m, const std::vector<GeodesicState>& states,
                    const Tolerances& tol = default_tolerances());

Vec exp_map(const MetricField& m, const Vec& x, const Vec& w, int steps = 16,
            const Tolerances& tol = default_tolerances());

// exp_x(w) together with the differential of exp_x at w applied to each of
// `dirs`, via the variational (Jacobi) equation integrated alongside the
// geodesic. dirs are tangent vectors at x.
struct ExpFrame {
  Vec y;
  Vec v_end;
  std::vector<Vec> jac;
};

ExpFrame exp_map_with_jacobian(const MetricField& m, const Vec& x, const Vec& w,
                               const std::vector<Vec>& dirs, int steps = 16,
                               const Tolerances& tol = default_tolerances());

// Sampled exponential image of a plane through x. plane rows span the plane;
// they are orthonormalized (Euclidean) before use, so patch parameters w live
// in a well-conditioned frame.
struct ExpPatch {
  MetricField metric;
  Vec center;
  Eigen::MatrixXd plane;  // k x n, orthonormal rows
  double radius = 0.0;
  int grid = 0;
  int steps = 16;
  std::vector<Vec> w_samples;  // k-dim parameters, w_samples[0] = 0
  std::vector<Vec> samples;    // chart points, samples[0] = center
};

ExpPatch exp_patch(const MetricField& m, const Vec& x, const Eigen::MatrixXd& plane, double radius,
                   int grid = 5, int steps = 16, const Tolerances& tol = default_tolerances());

// Euclidean distance from q to the patch surface, by Gauss-Newton over the
// patch parameters (seeded from w_seed when given, else the nearest sample).
// Errors out when the minimizer runs past the patch rim.
double surface_offset(const ExpPatch& patch, const Vec& q,
                      const Vec* w_seed = nullptr,
                      const Tolerances& tol = default_tolerances());

}  // namespace lorentz
