#pragma once

#include <array>
#include <string>
#include <vector>

#include "lorentz/expr.hpp"
#include "lorentz/tolerances.hpp"
#include "lorentz/types.hpp"

namespace lorentz {

// Symbolic metric on one coordinate chart. Components are stored as the
// upper triangle, so g_ij and g_ji are the same expression by construction.
class MetricField {
 public:
  MetricField() = default;
  MetricField(std::string name, std::vector<std::string> coords, std::vector<int> signature,
              const Vec& box_lo, const Vec& box_hi);

  int dim() const { return static_cast<int>(coords_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::vector<int>& signature() const { return signature_; }
  const Vec& box_lo() const { return lo_; }
  const Vec& box_hi() const { return hi_; }
  Vec box_center() const { return 0.5 * (lo_ + hi_); }

  const Expr& component(int i, int j) const;
  void set_component(int i, int j, const Expr& e);

  bool inside_box(const Vec& p, double slack_frac = 0.0) const;

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<int> signature_;
  std::vector<Expr> tri_;  // row-major upper triangle
  Vec lo_, hi_;
};

// Probes a coarse grid over the box: symmetry, nondegeneracy and the declared
// signature must hold everywhere. Throws on violation.
void validate_metric(const MetricField& m, int probes_per_axis = 3,
                     const Tolerances& tol = default_tolerances());

struct MetricValue {
  Mat g;
  Mat g_inv;
};

MetricValue metric_at(const MetricField& m, const Vec& p,
                      const Tolerances& tol = default_tolerances());

// Christoffel symbols of the second kind, gamma(l,i,j) = Gamma^l_ij.
struct Christoffel {
  int n = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> a{};
  double& operator()(int l, int i, int j) { return a[(l * kMaxDim + i) * kMaxDim + j]; }
  double operator()(int l, int i, int j) const { return a[(l * kMaxDim + i) * kMaxDim + j]; }
};

void christoffel_at(const MetricField& m, const Vec& p, Christoffel& out,
                    const Tolerances& tol = default_tolerances());

// Gamma plus its coordinate derivatives, dgamma(m,l,i,j) = d_m Gamma^l_ij.
struct ChristoffelJet {
  Christoffel gamma;
  Tensor4 dgamma;
  MetricValue mv;
};

ChristoffelJet christoffel_derivatives(const MetricField& m, const Vec& p,
                                       const Tolerances& tol = default_tolerances());

// riem(l,i,j,k) are the components of R(d_i, d_j) d_k; riem_lo(i,j,k,l) is
// the lowered tensor g_lm R^m_ijk. Pair symmetries and the first Bianchi
// identity are verified before the bundle is returned.
struct CurvatureBundle {
  Vec p;
  Mat g;
  Mat g_inv;
  Tensor3 gamma;
  Tensor4 riem;
  Tensor4 riem_lo;
};

CurvatureBundle curvature_at(const MetricField& m, const Vec& p,
                             const Tolerances& tol = default_tolerances());

// Matrix of v -> R(u, v) u in chart components.
Mat curvature_operator(const CurvatureBundle& cb, const Vec& u);

double sectional_curvature(const CurvatureBundle& cb, const Vec& u, const Vec& v,
                           const Tolerances& tol = default_tolerances());

struct CurvatureSpreadReport {
  double k_mean = 0.0;
  double spread = 0.0;
  int samples = 0;
};

// Samples random nondegenerate planes at p; small spread certifies constant
// curvature at that point.
CurvatureSpreadReport constant_curvature_residual(const MetricField& m, const Vec& p, int samples,
                                                  unsigned long long seed = 20240823ull,
                                                  const Tolerances& tol = default_tolerances());

inline double inner(const Mat& g, const Vec& u, const Vec& v) { return u.dot(g * v); }

enum class Causal { timelike, lightlike, spacelike };

Causal causal_type(const Mat& g, const Vec& v, const Tolerances& tol = default_tolerances());

inline bool is_isotropic(const Mat& g, const Vec& v, const Tolerances& tol = default_tolerances()) {
  return causal_type(g, v, tol) == Causal::lightlike;
}

// Columns form a g-orthonormal frame, timelike directions first; the sign of
// each column is canonicalized so the frame is deterministic.
Mat orthonormal_frame(const Mat& g, const std::vector<int>& signature);

// Pointwise rescaling of every component by the scalar expression `factor`.
MetricField conformally_scaled(const MetricField& m, const Expr& factor, const std::string& name);

}  // namespace lorentz
