#pragma once

#include <string>
#include <vector>

#include "lorentz/metric.hpp"

namespace lorentz {

struct VectorField {
  std::string name;
  std::vector<Expr> comp;
};

Vec field_at(const VectorField& v, const Vec& p);

// Lattice of per_axis points per coordinate over the interior of the box.
std::vector<Vec> box_grid(const MetricField& m, int per_axis);

// max_ij |(L_V g)_ij| at p, with (L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k
// + g_ik d_j V^k. Zero within tolerance iff V is Killing at p.
double killing_residual(const MetricField& m, const VectorField& v, const Vec& p,
                        const Tolerances& tol = default_tolerances());

struct LightlikeCheck {
  bool lightlike_everywhere = false;
  double max_q = 0.0;  // worst |g(V,V)| / (1 + |V|^2) over the grid
};

LightlikeCheck lightlike_check(const MetricField& m, const VectorField& v,
                               const std::vector<Vec>& grid,
                               const Tolerances& tol = default_tolerances());

// Euclidean norm of (nabla_V V)(p). Zero for geodesic orbits.
double geodesic_orbit_residual(const MetricField& m, const VectorField& v, const Vec& p,
                               const Tolerances& tol = default_tolerances());

struct NullFieldCandidate {
  Vec coeffs;            // unit coefficient vector over the basis
  double max_q = 0.0;    // max |g(V,V)| over the grid
  double min_norm = 0.0; // min Euclidean |V| over the grid
  double max_orbit_residual = 0.0;
};

struct NullSearchReport {
  std::vector<NullFieldCandidate> found;
  unsigned long long seed = 0;
  int trials = 0;
};

// Multistart minimization of max_grid |g(V_c, V_c)| over unit coefficient
// vectors c; returns the certified null combinations. Deterministic for a
// fixed seed.
NullSearchReport lightlike_killing_search(const MetricField& m,
                                          const std::vector<VectorField>& basis,
                                          const std::vector<Vec>& grid, int trials,
                                          unsigned long long seed = 20240823ull,
                                          const Tolerances& tol = default_tolerances());

// Linear combination with the coefficients as constant expressions.
VectorField combine(const std::vector<VectorField>& basis, const Vec& coeffs,
                    const std::string& name = "combo");

// Pullback deviation max_ij |(F*g - g)_ij| over the grid for a chart
// self-map F given componentwise.
double pullback_residual(const MetricField& m, const std::vector<Expr>& map_comp,
                         const std::vector<Vec>& grid,
                         const Tolerances& tol = default_tolerances());

struct WarpedSpec;  // models.hpp

// Extends a fiber-coordinate map f to (x, y) -> (x, f(y)) on the warped
// product and reports the pullback residual over the grid.
double extend_isometry_pullback_residual(const WarpedSpec& spec, const std::vector<Expr>& fiber_map,
                                         const std::vector<Vec>& grid,
                                         const Tolerances& tol = default_tolerances());

// Shipped Killing bases for the model charts.
std::vector<VectorField> minkowski_translations(int n);
std::vector<VectorField> minkowski_killing(int n);
std::vector<VectorField> de_sitter3_killing();
std::vector<VectorField> sl2_killing(bool deformed);  // deformed: Berger subalgebra only

}  // namespace lorentz
