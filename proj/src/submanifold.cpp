#include "lorentz/submanifold.hpp"

#include <cmath>
#include <set>

namespace lorentz {

namespace {

constexpr double kBoxSlack = 0.02;

void check_param(const Immersion& im, const Vec& u) {
  if (u.size() != im.param_dim())
    fail(ErrorKind::bad_argument, "parameter dimension does not match the immersion");
  if (!im.inside_box(u, kBoxSlack))
    fail(ErrorKind::chart_bounds, "parameter point lies outside the box of '" + im.name + "'");
}

// Ambient covariant derivative of the immersion, one ambient vector per
// parameter pair: D^i_ab = d_a d_b X^i + Gamma^i_jk d_a X^j d_b X^k.
struct CovariantHessian {
  ImmersionJet jet;
  InducedMetric induced;
  Mat g;  // ambient metric at the point
  std::vector<Mat> d;
};

CovariantHessian covariant_hessian(const MetricField& m, const Immersion& im, const Vec& u,
                                   const Tolerances& tol) {
  const int n = m.dim();
  const int k = im.param_dim();
  CovariantHessian out;
  out.jet = immersion_jet(im, u, tol);
  if (!m.inside_box(out.jet.y, kBoxSlack))
    fail(ErrorKind::chart_bounds, "immersion image leaves the chart box of '" + m.name() + "'");
  MetricValue mv = metric_at(m, out.jet.y, tol);
  out.g = mv.g;
  Christoffel gamma;
  christoffel_at(m, out.jet.y, gamma, tol);

  out.induced.g = out.jet.d.transpose() * mv.g * out.jet.d;
  out.induced.det = out.induced.g.determinant();
  out.induced.degenerate = std::abs(out.induced.det) < tol.lightlike_det;

  out.d.resize(n);
  for (int i = 0; i < n; ++i) {
    Mat di = out.jet.hess[i];
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) s += gamma(i, j, l) * out.jet.d(j, a) * out.jet.d(l, b);
        di(a, b) += s;
      }
    out.d[i] = di;
  }
  return out;
}

}  // namespace

bool Immersion::inside_box(const Vec& u, double slack_frac) const {
  if (u.size() != param_dim()) return false;
  for (int i = 0; i < param_dim(); ++i) {
    double span = box_hi(i) - box_lo(i);
    double slack = slack_frac * span;
    if (u(i) < box_lo(i) - slack || u(i) > box_hi(i) + slack) return false;
  }
  return true;
}

Immersion make_immersion(std::string name, std::vector<std::string> params, std::vector<Expr> map,
                         const Vec& box_lo, const Vec& box_hi) {
  Immersion im;
  im.name = std::move(name);
  im.params = std::move(params);
  im.map = std::move(map);
  im.box_lo = box_lo;
  im.box_hi = box_hi;
  const int k = im.param_dim();
  if (im.name.empty()) fail(ErrorKind::bad_argument, "immersion needs a name");
  if (k < 1 || k > kMaxDim) fail(ErrorKind::bad_argument, "parameter count is out of range");
  if (im.map.empty()) fail(ErrorKind::bad_argument, "immersion map is empty");
  std::set<std::string> seen;
  for (const auto& p : im.params) {
    if (!is_identifier(p)) fail(ErrorKind::bad_argument, "parameter name '" + p + "' is not an identifier");
    if (is_reserved_word(p)) fail(ErrorKind::bad_argument, "parameter name '" + p + "' is reserved");
    if (!seen.insert(p).second) fail(ErrorKind::bad_argument, "duplicate parameter name '" + p + "'");
  }
  for (const auto& e : im.map) {
    if (!e.valid()) fail(ErrorKind::bad_argument, "immersion component is missing");
    if (e.min_dim() > k)
      fail(ErrorKind::bad_argument, "immersion component references parameters beyond the list");
  }
  if (box_lo.size() != k || box_hi.size() != k)
    fail(ErrorKind::bad_argument, "immersion box must match the parameter count");
  for (int i = 0; i < k; ++i)
    if (!(box_lo(i) < box_hi(i))) fail(ErrorKind::bad_argument, "immersion box is empty");
  return im;
}

ImmersionJet immersion_jet(const Immersion& im, const Vec& u, const Tolerances& tol) {
  check_param(im, u);
  (void)tol;
  const int n = im.ambient_dim();
  const int k = im.param_dim();
  ImmersionJet out;
  out.y = Vec(n);
  out.d = Eigen::MatrixXd(n, k);
  out.hess.resize(n);
  for (int i = 0; i < n; ++i) {
    Jet2 j = eval_jet2(im.map[i], u);
    out.y(i) = j.v;
    out.d.row(i) = j.g.head(k).transpose();
    out.hess[i] = j.h.topLeftCorner(k, k);
  }
  return out;
}

InducedMetric induced_metric(const MetricField& m, const Immersion& im, const Vec& u,
                             const Tolerances& tol) {
  ImmersionJet jet = immersion_jet(im, u, tol);
  if (!m.inside_box(jet.y, kBoxSlack))
    fail(ErrorKind::chart_bounds, "immersion image leaves the chart box of '" + m.name() + "'");
  MetricValue mv = metric_at(m, jet.y, tol);
  InducedMetric out;
  out.g = jet.d.transpose() * mv.g * jet.d;
  out.det = out.g.determinant();
  out.degenerate = std::abs(out.det) < tol.lightlike_det;
  return out;
}

SecondFundamentalForm second_fundamental_form(const MetricField& m, const Immersion& im,
                                              const Vec& u, const Tolerances& tol) {
  CovariantHessian ch = covariant_hessian(m, im, u, tol);
  const int n = m.dim();
  const int k = im.param_dim();
  if (ch.induced.degenerate)
    fail(ErrorKind::degenerate_metric,
         "induced metric of '" + im.name + "' is degenerate; use the lightlike geodesy test");

  // Tangential coefficients c^c_ab solve gbar c = X^T g D; the normal part
  // is II.
  Eigen::PartialPivLU<Mat> lu(ch.induced.g);
  SecondFundamentalForm out;
  out.at = u;
  out.ii.assign(n, Mat::Zero(k, k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      Vec dvec(n);
      for (int i = 0; i < n; ++i) dvec(i) = ch.d[i](a, b);
      Vec rhs = ch.jet.d.transpose() * ch.g * dvec;
      Vec c = lu.solve(rhs);
      Vec normal = dvec - ch.jet.d * c;
      for (int i = 0; i < n; ++i) out.ii[i](a, b) = normal(i);
    }

  double denom = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) denom += ch.induced.g(a, b) * ch.induced.g(a, b);
  out.mean_normal = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double num = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) num += ch.induced.g(a, b) * out.ii[i](a, b);
    out.mean_normal(i) = num / denom;
  }
  for (int i = 0; i < n; ++i) {
    out.max_abs = std::max(out.max_abs, out.ii[i].cwiseAbs().maxCoeff());
    Mat resid = out.ii[i] - ch.induced.g * out.mean_normal(i);
    out.umbilical_residual = std::max(out.umbilical_residual, resid.cwiseAbs().maxCoeff());
  }
  return out;
}

Mat weingarten(const MetricField& m, const Immersion& im, const Vec& u, const Vec& z,
               const Tolerances& tol) {
  const int n = m.dim();
  const int k = im.param_dim();
  if (z.size() != n) fail(ErrorKind::bad_argument, "normal vector dimension does not match the chart");
  CovariantHessian ch = covariant_hessian(m, im, u, tol);
  if (ch.induced.degenerate)
    fail(ErrorKind::degenerate_metric, "induced metric of '" + im.name + "' is degenerate");
  Vec tangency = ch.jet.d.transpose() * ch.g * z;
  double zscale = std::max(1.0, z.norm());
  if (tangency.cwiseAbs().maxCoeff() > tol.normal_check * zscale)
    fail(ErrorKind::not_normal, "vector is not normal to '" + im.name + "'");

  // Extend z along the surface with the normal projector P = I - X gbar^-1
  // X^T g, then differentiate the extension by central differences in the
  // parameters.
  // A_z X is the tangential part of the ambient derivative of the
  // extension, matching the pairing <II(X,Y),z> = <-A_z X, Y>.
  auto normal_extension = [&](const Vec& up) -> Vec {
    ImmersionJet jet = immersion_jet(im, up, tol);
    MetricValue mv = metric_at(m, jet.y, tol);
    Mat gbar = jet.d.transpose() * mv.g * jet.d;
    Eigen::PartialPivLU<Mat> lu(gbar);
    Vec coeff = lu.solve(jet.d.transpose() * mv.g * z);
    return z - jet.d * coeff;
  };

  Christoffel gamma;
  christoffel_at(m, ch.jet.y, gamma, tol);
  Eigen::PartialPivLU<Mat> lu(ch.induced.g);
  const double h = 1e-5;
  Mat a_z = Mat::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    Vec up = u, um = u;
    up(a) += h;
    um(a) -= h;
    Vec dz = (normal_extension(up) - normal_extension(um)) / (2.0 * h);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) s += gamma(i, j, l) * ch.jet.d(j, a) * z(l);
      dz(i) += s;
    }
    Vec coeff = lu.solve(ch.jet.d.transpose() * ch.g * dz);
    a_z.col(a) = coeff;
  }

  // Duality against II: <II(X_a, X_b), z> must equal <-A_z X_a, X_b>.
  SecondFundamentalForm sff = second_fundamental_form(m, im, u, tol);
  Mat pairing = Mat::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      Vec iivec(n);
      for (int i = 0; i < n; ++i) iivec(i) = sff.ii[i](a, b);
      pairing(a, b) = iivec.dot(ch.g * z);
    }
  Mat dual = ch.induced.g * a_z;  // entry (b, a) is <A_z X_a, X_b>
  double worst = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) worst = std::max(worst, std::abs(pairing(a, b) + dual(b, a)));
  double scale = std::max({1.0, pairing.cwiseAbs().maxCoeff(), dual.cwiseAbs().maxCoeff()});
  if (worst > tol.weingarten_duality * scale)
    fail(ErrorKind::numeric, "shape operator failed its pairing check against II");
  return a_z;
}

SubmanifoldClass classify(const MetricField& m, const Immersion& im, const Vec& u,
                          const Tolerances& tol) {
  SecondFundamentalForm sff = second_fundamental_form(m, im, u, tol);
  if (sff.max_abs <= tol.classify_geodesic) return SubmanifoldClass::geodesic;
  if (sff.umbilical_residual <= tol.classify_umbilical) return SubmanifoldClass::umbilical;
  return SubmanifoldClass::generic;
}

double lightlike_geodesy_test(const MetricField& m, const Immersion& im, const Vec& u, int probes,
                              const GeodesyOptions& opt, const Tolerances& tol) {
  const int k = im.param_dim();
  if (probes < 1) fail(ErrorKind::bad_argument, "need at least one probe direction");
  if (!(opt.s > 0.0) || opt.steps < 1 || opt.samples < 1)
    fail(ErrorKind::bad_argument, "bad geodesy options");
  ImmersionJet jet = immersion_jet(im, u, tol);
  MetricValue mv = metric_at(m, jet.y, tol);
  Mat gbar = jet.d.transpose() * mv.g * jet.d;

  // Eigenframe of the induced metric; the lowest |eigenvalue| direction is
  // the characteristic one.
  Eigen::SelfAdjointEigenSolver<Mat> es(gbar);
  if (es.info() != Eigen::Success) fail(ErrorKind::numeric, "induced metric eigensolve failed");
  int kernel = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&kernel);
  std::vector<Vec> dirs;
  dirs.push_back(es.eigenvectors().col(kernel));
  for (int j = 0; j < k && static_cast<int>(dirs.size()) < probes; ++j)
    if (j != kernel) dirs.push_back(es.eigenvectors().col(j));
  for (int j = 0; j < k && static_cast<int>(dirs.size()) < probes; ++j) {
    if (j == kernel) continue;
    dirs.push_back((dirs[0] + es.eigenvectors().col(j)).normalized());
    if (static_cast<int>(dirs.size()) < probes)
      dirs.push_back((dirs[0] - es.eigenvectors().col(j)).normalized());
  }
  probes = static_cast<int>(dirs.size());

  double worst = 0.0;
  for (int d = 0; d < probes; ++d) {
    Vec ambient = jet.d * dirs[d];
    double len = ambient.norm();
    if (len < 1e-12) fail(ErrorKind::rank_deficient, "immersion differential dropped rank");
    Vec w = ambient / len;
    Vec cparam = dirs[d] / len;
    for (int sidx = 0; sidx < opt.samples; ++sidx) {
      double s = opt.s / static_cast<double>(1 << sidx);
      int steps = std::max(2, static_cast<int>(std::lround(opt.steps * s / opt.s)));
      Vec q = exp_map(m, jet.y, s * w, steps, tol);

      // Nearest point on the surface, Gauss-Newton over the parameters.
      Vec up = u + s * cparam;
      double dist = 0.0, move = 1.0;
      for (int it = 0; it < 10; ++it) {
        ImmersionJet pj = immersion_jet(im, up, tol);
        Vec resid = pj.y - q;
        dist = resid.norm();
        if (move < 1e-13 || dist < 1e-15) break;
        Vec step = pj.d.colPivHouseholderQr().solve(resid);
        move = step.norm();
        up -= step;
      }
      worst = std::max(worst, dist / (s * s));
    }
  }
  return worst;
}

double geodesy_residual(const MetricField& m, const Immersion& im, const Vec& u, int probes,
                        const GeodesyOptions& opt, const Tolerances& tol) {
  InducedMetric ind = induced_metric(m, im, u, tol);
  if (ind.degenerate) return lightlike_geodesy_test(m, im, u, probes, opt, tol);
  SecondFundamentalForm sff = second_fundamental_form(m, im, u, tol);
  return sff.max_abs;
}

}  // namespace lorentz
