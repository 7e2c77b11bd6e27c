#pragma once

#include <vector>

#include "lorentz/models.hpp"
#include "lorentz/submanifold.hpp"

namespace lorentz {

// A metric whose first base_dim coordinates are declared the base block.
struct ProductChartSpec {
  MetricField metric;
  int base_dim = 0;

  int fiber_dim() const { return metric.dim() - base_dim; }
};

void validate_product_chart(const ProductChartSpec& spec);

Vec base_part(const ProductChartSpec& spec, const Vec& p);
Vec fiber_part(const ProductChartSpec& spec, const Vec& p);

// Fiber metric with the base coordinates frozen at x0 (includes any
// conformal factor the full metric carries there).
MetricField fiber_restriction(const ProductChartSpec& spec, const Vec& x0);

Immersion base_leaf(const ProductChartSpec& spec, const Vec& y0);
Immersion fiber_leaf(const ProductChartSpec& spec, const Vec& x0);

// Lift of a fiber immersion S to L x S on the product chart.
Immersion lift_to_product(const ProductChartSpec& spec, const Immersion& fiber_im);

struct BlockReport {
  double off_block_max = 0.0;
  bool fiber_conformal = false;
  double conformal_fit_residual = 0.0;  // worst entrywise misfit of lambda * B(x0, y)
  double scalar_y_variation = 0.0;      // worst base-slice variation of lambda over y
};

BlockReport check_block_structure(const ProductChartSpec& spec, int grid_per_axis = 3,
                                  const Tolerances& tol = default_tolerances());

struct HolonomyReport {
  double ratio = 1.0;          // consensus fiber-block ratio at the reference fiber point
  double max_variation = 0.0;  // max over grid and entries of |r_ab(y) - ratio|
  int skipped_entries = 0;     // entries under the division guard
};

HolonomyReport holonomy_homothety_check(const ProductChartSpec& spec, const Vec& x1, const Vec& x2,
                                        int fiber_grid_per_axis = 3,
                                        const Tolerances& tol = default_tolerances());

enum class WarpedClass { warped, not_warped, inconclusive };

const char* to_string(WarpedClass c);

enum class CheckState { pass, fail, inconclusive };

const char* to_string(CheckState c);

struct WarpedVerdict {
  WarpedClass verdict = WarpedClass::inconclusive;

  double off_block_max = 0.0;
  bool fiber_conformal = false;
  CheckState block_structure = CheckState::inconclusive;

  double base_residual = 0.0;
  CheckState base_geodesic = CheckState::inconclusive;

  double fiber_residual = 0.0;
  CheckState fiber_umbilical = CheckState::inconclusive;

  double holonomy_variation = 0.0;
  double holonomy_ratio = 1.0;
  CheckState holonomy_homothetic = CheckState::inconclusive;

  double fiber_k_mean = 0.0;
  double fiber_spread = 0.0;
  CheckState fiber_constant_curvature = CheckState::inconclusive;

  double hypersurface_residual_max = 0.0;
  int normal_rank = 0;
  CheckState hypersurfaces_geodesic = CheckState::inconclusive;
};

// The warped-product criterion over a declared product chart: block
// structure, geodesic base leaves, umbilical fiber leaves, homothetic
// holonomy, constant-curvature fibers, and a spanning family of geodesic
// lightlike hypersurfaces. Hypersurfaces must be base-saturated lifts; their
// characteristic normals must span the fiber tangent (rank error otherwise).
WarpedVerdict warped_criterion(const ProductChartSpec& spec,
                               const std::vector<Immersion>& hypersurfaces, int grid_per_axis = 3,
                               unsigned long long seed = 20240823ull,
                               const Tolerances& tol = default_tolerances());

struct ConformalReport {
  bool is_conformal = false;
  double factor_variation = 0.0;
  double lambda0 = 0.0;
  double fit_residual = 0.0;
};

// Pullback of m2 under phi against m1, entrywise: conformal when one scalar
// per point explains the ratio; homothetic when that scalar is constant.
ConformalReport conformal_factor_map(const MetricField& m1, const MetricField& m2,
                                     const std::vector<Expr>& phi, int grid_per_axis = 3,
                                     const Tolerances& tol = default_tolerances());

}  // namespace lorentz
