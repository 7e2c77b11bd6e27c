#pragma once

#include <string>
#include <vector>

#include "lorentz/geodesic.hpp"
#include "lorentz/metric.hpp"
#include "lorentz/submanifold.hpp"

namespace lorentz {

enum class CxClass { empty, mono, bi, finite_k, cone };

const char* to_string(CxClass c);

struct ScanGridEntry {
  Vec angles;      // n-2 sphere angles of this grid node
  Vec dir;         // isotropic direction, unit Euclidean, chart components
  double residual = 0.0;
  bool accepted = false;
};

struct ScanCluster {
  Vec angles;
  Vec dir;
  double residual = 0.0;
  int members = 0;
};

struct ScanReport {
  std::string manifold;
  Vec at;
  int resolution = 0;
  double radius = 0.0;
  double certificate = 0.0;
  double reject = 0.0;
  CxClass class_label = CxClass::empty;
  double accepted_fraction = 0.0;
  std::vector<ScanGridEntry> grid;
  std::vector<ScanCluster> clusters;
  int span_dim = 0;
  Eigen::MatrixXd span_basis;  // rows, Euclidean-orthonormal
};

struct ScanOptions {
  int resolution = 24;
  double radius = 0.12;      // exp-patch radius
  int patch_grid = 3;
  int exp_steps = 16;
  int probe_points = 2;      // off-center probe points per direction
  int probe_dirs = 3;        // tangent probe directions per probe point
  int refine_limit = 8;      // most local minima refined per scan
  int refine_iters = 36;     // golden-section steps
  GeodesyOptions geodesy;    // reserved for immersion-based callers
};

// Geodesy residual of exp_x(span of the g-orthogonal of dir): probes are
// taken at off-center points of the patch so radial triviality cannot mask
// curvature.
double direction_geodesy_residual(const MetricField& m, const Vec& x, const Vec& dir,
                                  const ScanOptions& opt = {},
                                  const Tolerances& tol = default_tolerances());

ScanReport scan_cx(const MetricField& m, const Vec& x, int resolution,
                   const Tolerances& tol = default_tolerances());
ScanReport scan_cx(const MetricField& m, const Vec& x, const ScanOptions& opt,
                   const Tolerances& tol = default_tolerances());

struct SpanEstimate {
  int dim = 0;
  Eigen::MatrixXd basis;  // rows
};

SpanEstimate span_e(const ScanReport& report, const Tolerances& tol = default_tolerances());

struct TautologicalSample {
  bool member = false;
  double residual = 0.0;
};

TautologicalSample tautological_integrability_sample(const MetricField& m, const Vec& x,
                                                     const Vec& u, const ScanOptions& opt = {},
                                                     const Tolerances& tol = default_tolerances());

}  // namespace lorentz
