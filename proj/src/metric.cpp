#include "lorentz/metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace lorentz {

namespace {

// Boxes are enforced with a small relative grace margin so integrator stages
// near the boundary do not trip the chart check.
constexpr double kBoxSlack = 0.02;

int tri_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

}  // namespace

MetricField::MetricField(std::string name, std::vector<std::string> coords,
                         std::vector<int> signature, const Vec& box_lo, const Vec& box_hi)
    : name_(std::move(name)),
      coords_(std::move(coords)),
      signature_(std::move(signature)),
      lo_(box_lo),
      hi_(box_hi) {
  const int n = dim();
  if (n < 1 || n > kMaxDim)
    fail(ErrorKind::bad_argument, "chart dimension must be between 1 and " + std::to_string(kMaxDim));
  std::set<std::string> seen;
  for (const auto& c : coords_) {
    if (!is_identifier(c)) fail(ErrorKind::bad_argument, "coordinate name '" + c + "' is not an identifier");
    if (is_reserved_word(c)) fail(ErrorKind::bad_argument, "coordinate name '" + c + "' is reserved");
    if (!seen.insert(c).second) fail(ErrorKind::bad_argument, "duplicate coordinate name '" + c + "'");
  }
  if (static_cast<int>(signature_.size()) != n)
    fail(ErrorKind::bad_argument, "signature length must match the dimension");
  for (int s : signature_)
    if (s != 1 && s != -1) fail(ErrorKind::bad_argument, "signature entries must be +1 or -1");
  if (lo_.size() != n || hi_.size() != n)
    fail(ErrorKind::bad_argument, "box bounds must match the dimension");
  for (int k = 0; k < n; ++k)
    if (!(lo_(k) < hi_(k))) fail(ErrorKind::bad_argument, "box lower bound must be below upper bound");
  tri_.assign(static_cast<size_t>(n) * (n + 1) / 2, Expr::constant(0.0));
}

const Expr& MetricField::component(int i, int j) const {
  const int n = dim();
  if (i < 0 || j < 0 || i >= n || j >= n) fail(ErrorKind::bad_argument, "component index out of range");
  return tri_[tri_index(n, i, j)];
}

void MetricField::set_component(int i, int j, const Expr& e) {
  const int n = dim();
  if (i < 0 || j < 0 || i >= n || j >= n) fail(ErrorKind::bad_argument, "component index out of range");
  if (!e.valid()) fail(ErrorKind::bad_argument, "empty expression");
  if (e.min_dim() > n) fail(ErrorKind::bad_argument, "component references coordinates beyond the chart");
  tri_[tri_index(n, i, j)] = e;
}

bool MetricField::inside_box(const Vec& p, double slack_frac) const {
  for (int k = 0; k < dim(); ++k) {
    double margin = slack_frac * (hi_(k) - lo_(k)) + 1e-12;
    if (p(k) < lo_(k) - margin || p(k) > hi_(k) + margin) return false;
  }
  return true;
}

namespace {

void check_point(const MetricField& m, const Vec& p) {
  if (p.size() != m.dim()) fail(ErrorKind::bad_argument, "point dimension does not match the chart");
  if (!m.inside_box(p, kBoxSlack)) {
    std::ostringstream os;
    os << "point outside the chart box of '" << m.name() << "'";
    fail(ErrorKind::chart_bounds, os.str());
  }
}

struct Factored {
  Mat g;
  Mat g_inv;
  Eigen::PartialPivLU<Mat> lu;
};

void invert_checked(const MetricField& m, Factored& f, const Tolerances& tol) {
  const int n = static_cast<int>(f.g.rows());
  f.lu.compute(f.g);
  double det = f.lu.determinant();
  if (std::abs(det) < tol.metric_degenerate_det)
    fail(ErrorKind::degenerate_metric, "metric of '" + m.name() + "' is degenerate (|det| = " +
                                           std::to_string(std::abs(det)) + ")");
  f.g_inv = f.lu.inverse();
  double resid = (f.g * f.g_inv - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  if (resid > tol.metric_inverse_check)
    fail(ErrorKind::numeric, "metric inverse of '" + m.name() + "' failed its residual check");
}

}  // namespace

MetricValue metric_at(const MetricField& m, const Vec& p, const Tolerances& tol) {
  check_point(m, p);
  const int n = m.dim();
  Factored f;
  f.g = Mat(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = eval(m.component(i, j), p);
      f.g(i, j) = v;
      f.g(j, i) = v;
    }
  invert_checked(m, f, tol);
  return {f.g, f.g_inv};
}

void christoffel_at(const MetricField& m, const Vec& p, Christoffel& out, const Tolerances& tol) {
  check_point(m, p);
  const int n = m.dim();
  Factored f;
  f.g = Mat(n, n);
  Tensor3 dg(n);  // dg(k,i,j) = d_k g_ij
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet1 jj = eval_jet1(m.component(i, j), p);
      f.g(i, j) = jj.v;
      f.g(j, i) = jj.v;
      for (int k = 0; k < n; ++k) {
        dg(k, i, j) = jj.g(k);
        dg(k, j, i) = jj.g(k);
      }
    }
  invert_checked(m, f, tol);
  out.n = n;
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += f.g_inv(l, k) * (dg(i, k, j) + dg(j, k, i) - dg(k, i, j));
        s *= 0.5;
        out(l, i, j) = s;
        out(l, j, i) = s;
      }
}

ChristoffelJet christoffel_derivatives(const MetricField& m, const Vec& p, const Tolerances& tol) {
  check_point(m, p);
  const int n = m.dim();
  Factored f;
  f.g = Mat(n, n);
  Tensor3 dg(n);
  std::vector<Jet2> jets(static_cast<size_t>(n) * n);  // full square for easy lookup
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet2 jj = eval_jet2(m.component(i, j), p);
      jets[i * n + j] = jj;
      jets[j * n + i] = jj;
      f.g(i, j) = jj.v;
      f.g(j, i) = jj.v;
      for (int k = 0; k < n; ++k) {
        dg(k, i, j) = jj.g(k);
        dg(k, j, i) = jj.g(k);
      }
    }
  invert_checked(m, f, tol);

  ChristoffelJet out;
  out.mv = {f.g, f.g_inv};
  out.gamma.n = n;
  Tensor3 gamma_lo(n);  // gamma_lo(k,i,j) = Gamma_{k,ij}
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.5 * (dg(i, k, j) + dg(j, k, i) - dg(k, i, j));
        gamma_lo(k, i, j) = s;
        gamma_lo(k, j, i) = s;
      }
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += f.g_inv(l, k) * gamma_lo(k, i, j);
        out.gamma(l, i, j) = s;
        out.gamma(l, j, i) = s;
      }

  // d_m g^{lk} = -g^{la} (d_m g_ab) g^{bk}
  Tensor3 dginv(n);
  for (int mm = 0; mm < n; ++mm) {
    Mat dgm(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dgm(a, b) = dg(mm, a, b);
    Mat d = -(f.g_inv * dgm * f.g_inv);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) dginv(mm, l, k) = d(l, k);
  }

  out.dgamma = Tensor4(n);
  for (int mm = 0; mm < n; ++mm)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) {
            const Jet2& jkj = jets[k * n + j];
            const Jet2& jki = jets[k * n + i];
            const Jet2& jij = jets[i * n + j];
            double dgl = 0.5 * (jkj.h(mm, i) + jki.h(mm, j) - jij.h(mm, k));
            s += dginv(mm, l, k) * gamma_lo(k, i, j) + f.g_inv(l, k) * dgl;
          }
          out.dgamma(mm, l, i, j) = s;
          out.dgamma(mm, l, j, i) = s;
        }
  return out;
}

CurvatureBundle curvature_at(const MetricField& m, const Vec& p, const Tolerances& tol) {
  ChristoffelJet cj = christoffel_derivatives(m, p, tol);
  const int n = m.dim();

  CurvatureBundle cb;
  cb.p = p;
  cb.g = cj.mv.g;
  cb.g_inv = cj.mv.g_inv;
  cb.gamma = Tensor3(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cb.gamma(l, i, j) = cj.gamma(l, i, j);

  cb.riem = Tensor4(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = cj.dgamma(i, l, j, k) - cj.dgamma(j, l, i, k);
          for (int mm = 0; mm < n; ++mm)
            s += cj.gamma(mm, j, k) * cj.gamma(l, i, mm) - cj.gamma(mm, i, k) * cj.gamma(l, j, mm);
          cb.riem(l, i, j, k) = s;
        }

  cb.riem_lo = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int mm = 0; mm < n; ++mm) s += cb.g(l, mm) * cb.riem(mm, i, j, k);
          cb.riem_lo(i, j, k, l) = s;
        }

  double scale = std::max(1.0, cb.riem_lo.max_abs());
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = cb.riem_lo(i, j, k, l);
          worst = std::max(worst, std::abs(r + cb.riem_lo(j, i, k, l)));
          worst = std::max(worst, std::abs(r + cb.riem_lo(i, j, l, k)));
          worst = std::max(worst, std::abs(r - cb.riem_lo(k, l, i, j)));
          worst = std::max(worst,
                           std::abs(r + cb.riem_lo(j, k, i, l) + cb.riem_lo(k, i, j, l)));
        }
  if (worst > tol.curvature_symmetry * scale)
    fail(ErrorKind::numeric, "curvature tensor of '" + m.name() + "' failed its symmetry checks");
  return cb;
}

Mat curvature_operator(const CurvatureBundle& cb, const Vec& u) {
  const int n = static_cast<int>(cb.g.rows());
  if (u.size() != n) fail(ErrorKind::bad_argument, "vector dimension does not match the bundle");
  Mat a = Mat::Zero(n, n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) s += cb.riem(l, i, j, k) * u(i) * u(k);
      a(l, j) = s;
    }
  return a;
}

double sectional_curvature(const CurvatureBundle& cb, const Vec& u, const Vec& v,
                           const Tolerances& tol) {
  const int n = static_cast<int>(cb.g.rows());
  if (u.size() != n || v.size() != n)
    fail(ErrorKind::bad_argument, "vector dimension does not match the bundle");
  double guu = inner(cb.g, u, u);
  double gvv = inner(cb.g, v, v);
  double guv = inner(cb.g, u, v);
  double denom = guu * gvv - guv * guv;
  if (std::abs(denom) < tol.plane_degenerate)
    fail(ErrorKind::degenerate_plane, "plane is degenerate for the sectional curvature");
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) num += cb.riem_lo(i, j, k, l) * u(i) * v(j) * v(k) * u(l);
  return num / denom;
}

CurvatureSpreadReport constant_curvature_residual(const MetricField& m, const Vec& p, int samples,
                                                  unsigned long long seed, const Tolerances& tol) {
  if (samples < 1) fail(ErrorKind::bad_argument, "need at least one plane sample");
  CurvatureBundle cb = curvature_at(m, p, tol);
  const int n = m.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> ks;
  ks.reserve(samples);
  long long attempts = 0;
  const long long max_attempts = 100ll * samples;
  while (static_cast<int>(ks.size()) < samples) {
    if (++attempts > max_attempts)
      fail(ErrorKind::numeric, "plane sampling kept hitting near-degenerate planes");
    Vec u(n), v(n);
    for (int i = 0; i < n; ++i) u(i) = gauss(rng);
    for (int i = 0; i < n; ++i) v(i) = gauss(rng);
    if (u.norm() < 1e-6 || v.norm() < 1e-6) continue;
    u.normalize();
    v.normalize();
    double guu = inner(cb.g, u, u);
    double gvv = inner(cb.g, v, v);
    double guv = inner(cb.g, u, v);
    double denom = guu * gvv - guv * guv;
    // Near-degenerate draws amplify roundoff, so they are rejected well above
    // the hard floor used by sectional_curvature.
    if (std::abs(denom) < tol.plane_sample_floor) continue;
    ks.push_back(sectional_curvature(cb, u, v, tol));
  }
  CurvatureSpreadReport rep;
  rep.samples = samples;
  double sum = 0.0;
  for (double k : ks) sum += k;
  rep.k_mean = sum / samples;
  for (double k : ks) rep.spread = std::max(rep.spread, std::abs(k - rep.k_mean));
  return rep;
}

Causal causal_type(const Mat& g, const Vec& v, const Tolerances& tol) {
  double q = inner(g, v, v);
  double scale = v.squaredNorm();
  if (scale == 0.0) fail(ErrorKind::bad_argument, "causal type of the zero vector is undefined");
  if (std::abs(q) <= tol.isotropy_rel * scale) return Causal::lightlike;
  return q < 0.0 ? Causal::timelike : Causal::spacelike;
}

Mat orthonormal_frame(const Mat& g, const std::vector<int>& signature) {
  const int n = static_cast<int>(g.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  if (es.info() != Eigen::Success) fail(ErrorKind::numeric, "eigendecomposition failed");
  int want_neg = 0;
  for (int s : signature) want_neg += s < 0 ? 1 : 0;
  int got_neg = 0;
  for (int i = 0; i < n; ++i) got_neg += es.eigenvalues()(i) < 0 ? 1 : 0;
  if (got_neg != want_neg)
    fail(ErrorKind::degenerate_metric, "metric signature does not match its declaration");
  Mat frame(n, n);
  for (int i = 0; i < n; ++i) {
    double lam = es.eigenvalues()(i);
    Vec col = es.eigenvectors().col(i) / std::sqrt(std::abs(lam));
    int imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0) col = -col;
    frame.col(i) = col;
  }
  return frame;
}

void validate_metric(const MetricField& m, int probes_per_axis, const Tolerances& tol) {
  const int n = m.dim();
  if (probes_per_axis < 1) fail(ErrorKind::bad_argument, "need at least one probe per axis");
  long long total = 1;
  for (int k = 0; k < n; ++k) total *= probes_per_axis;
  for (long long idx = 0; idx < total; ++idx) {
    Vec p(n);
    long long rest = idx;
    for (int k = 0; k < n; ++k) {
      int step = static_cast<int>(rest % probes_per_axis);
      rest /= probes_per_axis;
      double t = (step + 1.0) / (probes_per_axis + 1.0);
      p(k) = m.box_lo()(k) + t * (m.box_hi()(k) - m.box_lo()(k));
    }
    MetricValue mv = metric_at(m, p, tol);
    orthonormal_frame(mv.g, m.signature());
  }
}

MetricField conformally_scaled(const MetricField& m, const Expr& factor, const std::string& name) {
  MetricField out(name, m.coords(), m.signature(), m.box_lo(), m.box_hi());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) out.set_component(i, j, factor * m.component(i, j));
  return out;
}

}  // namespace lorentz
