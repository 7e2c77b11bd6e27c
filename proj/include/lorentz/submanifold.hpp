#pragma once

#include <string>
#include <vector>

#include "lorentz/geodesic.hpp"
#include "lorentz/metric.hpp"

namespace lorentz {

// Parametrized submanifold u -> (X^0(u), ..., X^{n-1}(u)) of a chart.
struct Immersion {
  std::string name;
  std::vector<std::string> params;
  std::vector<Expr> map;
  Vec box_lo, box_hi;

  int param_dim() const { return static_cast<int>(params.size()); }
  int ambient_dim() const { return static_cast<int>(map.size()); }
  bool inside_box(const Vec& u, double slack_frac = 0.0) const;
};

Immersion make_immersion(std::string name, std::vector<std::string> params, std::vector<Expr> map,
                         const Vec& box_lo, const Vec& box_hi);

// Value, differential and per-coordinate parameter Hessians of the map.
struct ImmersionJet {
  Vec y;
  Eigen::MatrixXd d;         // n x k
  std::vector<Mat> hess;     // n entries, each k x k
};

ImmersionJet immersion_jet(const Immersion& im, const Vec& u,
                           const Tolerances& tol = default_tolerances());

struct InducedMetric {
  Mat g;  // k x k pullback
  double det = 0.0;
  bool degenerate = false;
};

InducedMetric induced_metric(const MetricField& m, const Immersion& im, const Vec& u,
                             const Tolerances& tol = default_tolerances());

struct SecondFundamentalForm {
  Vec at;                 // parameter point
  std::vector<Mat> ii;    // ambient component i -> k x k matrix II^i_ab
  Vec mean_normal;        // least-squares n_x of the umbilical decomposition
  double max_abs = 0.0;
  double umbilical_residual = 0.0;  // max |II - g * n|
};

SecondFundamentalForm second_fundamental_form(const MetricField& m, const Immersion& im,
                                              const Vec& u,
                                              const Tolerances& tol = default_tolerances());

// Matrix of A_Z in the coordinate frame of the parameters: column a holds the
// tangential coefficients of the ambient derivative of a normal extension of
// Z along X_a. Satisfies <II(X,Y),Z> = <-A_Z X, Y>.
Mat weingarten(const MetricField& m, const Immersion& im, const Vec& u, const Vec& z,
               const Tolerances& tol = default_tolerances());

enum class SubmanifoldClass { geodesic, umbilical, generic };

SubmanifoldClass classify(const MetricField& m, const Immersion& im, const Vec& u,
                          const Tolerances& tol = default_tolerances());

struct GeodesyOptions {
  double s = 0.08;    // probe arc length
  int steps = 12;     // RK4 steps per probe geodesic
  int samples = 2;    // offsets measured at s, s/2, ...
};

// Deviation-based geodesy residual for a degenerate (lightlike) submanifold:
// geodesics from im(u) along `probes` tangent directions, offset / s^2. The
// first probe direction is always the characteristic (kernel) direction.
double lightlike_geodesy_test(const MetricField& m, const Immersion& im, const Vec& u, int probes,
                              const GeodesyOptions& opt = {},
                              const Tolerances& tol = default_tolerances());

// max |II| when the induced metric is nondegenerate, otherwise the deviation
// residual. Lets the geodesy of degenerate and nondegenerate surfaces be
// compared on one scale.
double geodesy_residual(const MetricField& m, const Immersion& im, const Vec& u, int probes = 6,
                        const GeodesyOptions& opt = {},
                        const Tolerances& tol = default_tolerances());

}  // namespace lorentz
