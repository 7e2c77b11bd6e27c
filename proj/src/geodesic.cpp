#include "lorentz/geodesic.hpp"

#include <cmath>

namespace lorentz {

namespace {

constexpr double kBoxSlack = 0.02;

struct Deriv {
  Vec dx;
  Vec dv;
};

Deriv rhs(const MetricField& m, const Vec& x, const Vec& v, Christoffel& gamma,
          const Tolerances& tol) {
  if (!m.inside_box(x, kBoxSlack))
    fail(ErrorKind::chart_bounds, "geodesic left the chart box of '" + m.name() + "'");
  christoffel_at(m, x, gamma, tol);
  const int n = m.dim();
  Vec acc = Vec::Zero(n);
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += gamma(l, i, j) * v(i) * v(j);
    acc(l) = -s;
  }
  return {v, acc};
}

void rk4_step(const MetricField& m, Vec& x, Vec& v, double h, Christoffel& gamma,
              const Tolerances& tol) {
  Deriv k1 = rhs(m, x, v, gamma, tol);
  Deriv k2 = rhs(m, x + 0.5 * h * k1.dx, v + 0.5 * h * k1.dv, gamma, tol);
  Deriv k3 = rhs(m, x + 0.5 * h * k2.dx, v + 0.5 * h * k2.dv, gamma, tol);
  Deriv k4 = rhs(m, x + h * k3.dx, v + h * k3.dv, gamma, tol);
  x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
}

// State of the geodesic plus one Jacobi field per tracked direction, packed
// as (x, v, J_0, dJ_0, J_1, dJ_1, ...).
struct VarState {
  Vec x;
  Vec v;
  std::vector<Vec> j;
  std::vector<Vec> dj;
};

VarState var_axpy(const VarState& a, double h, const VarState& d) {
  VarState out;
  out.x = a.x + h * d.x;
  out.v = a.v + h * d.v;
  out.j.resize(a.j.size());
  out.dj.resize(a.dj.size());
  for (size_t k = 0; k < a.j.size(); ++k) {
    out.j[k] = a.j[k] + h * d.j[k];
    out.dj[k] = a.dj[k] + h * d.dj[k];
  }
  return out;
}

// Variational system: linearizing the geodesic equation in the initial
// condition gives J'' = -dGamma(J)(v, v) - 2 Gamma(J', v).
VarState var_rhs(const MetricField& m, const VarState& s, const Tolerances& tol) {
  if (!m.inside_box(s.x, kBoxSlack))
    fail(ErrorKind::chart_bounds, "geodesic left the chart box of '" + m.name() + "'");
  ChristoffelJet cj = christoffel_derivatives(m, s.x, tol);
  const int n = m.dim();
  VarState d;
  d.x = s.v;
  d.v = Vec::Zero(n);
  for (int l = 0; l < n; ++l) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc += cj.gamma(l, i, j) * s.v(i) * s.v(j);
    d.v(l) = -acc;
  }
  d.j.resize(s.j.size());
  d.dj.resize(s.j.size());
  for (size_t k = 0; k < s.j.size(); ++k) {
    d.j[k] = s.dj[k];
    Vec acc = Vec::Zero(n);
    for (int l = 0; l < n; ++l) {
      double t = 0.0;
      for (int mth = 0; mth < n; ++mth)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            t += cj.dgamma(mth, l, i, j) * s.j[k](mth) * s.v(i) * s.v(j);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) t += 2.0 * cj.gamma(l, i, j) * s.dj[k](i) * s.v(j);
      acc(l) = -t;
    }
    d.dj[k] = acc;
  }
  return d;
}

}  // namespace

std::vector<GeodesicState> integrate_geodesic(const MetricField& m, const Vec& x0, const Vec& v0,
                                              double s_max, const IntegrateOptions& opt,
                                              const Tolerances& tol) {
  const int n = m.dim();
  if (x0.size() != n || v0.size() != n)
    fail(ErrorKind::bad_argument, "initial state dimension does not match the chart");
  if (!(s_max > 0.0)) fail(ErrorKind::bad_argument, "s_max must be positive");
  double h = opt.step > 0.0 ? opt.step : s_max / 1000.0;
  int steps = std::max(1, static_cast<int>(std::ceil(s_max / h - 1e-12)));
  h = s_max / steps;
  int every = std::max(1, opt.store_every);

  std::vector<GeodesicState> out;
  Vec x = x0, v = v0;
  out.push_back({0.0, x, v});
  Christoffel gamma;
  for (int k = 0; k < steps; ++k) {
    rk4_step(m, x, v, h, gamma, tol);
    if ((k + 1) % every == 0 || k + 1 == steps) out.push_back({(k + 1) * h, x, v});
  }
  return out;
}

double energy_drift(const MetricField& m, const std::vector<GeodesicState>& states,
                    const Tolerances& tol) {
  if (states.empty()) fail(ErrorKind::bad_argument, "no states to measure");
  double e0 = 0.0, worst = 0.0;
  double scale = 0.0;
  for (size_t k = 0; k < states.size(); ++k) {
    MetricValue mv = metric_at(m, states[k].x, tol);
    double e = inner(mv.g, states[k].v, states[k].v);
    if (k == 0) {
      e0 = e;
      scale = std::max(1.0, std::abs(e0));
    }
    worst = std::max(worst, std::abs(e - e0) / scale);
  }
  return worst;
}

Vec exp_map(const MetricField& m, const Vec& x, const Vec& w, int steps, const Tolerances& tol) {
  if (steps < 1) fail(ErrorKind::bad_argument, "need at least one step");
  Vec p = x, v = w;
  Christoffel gamma;
  double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) rk4_step(m, p, v, h, gamma, tol);
  return p;
}

ExpFrame exp_map_with_jacobian(const MetricField& m, const Vec& x, const Vec& w,
                               const std::vector<Vec>& dirs, int steps, const Tolerances& tol) {
  const int n = m.dim();
  if (steps < 1) fail(ErrorKind::bad_argument, "need at least one step");
  VarState s;
  s.x = x;
  s.v = w;
  for (const Vec& d : dirs) {
    if (d.size() != n) fail(ErrorKind::bad_argument, "direction dimension does not match the chart");
    // d exp_x(w + t d)/dt at t = 0 is the Jacobi field with J(0) = 0,
    // J'(0) = d.
    s.j.push_back(Vec::Zero(n));
    s.dj.push_back(d);
  }
  double h = 1.0 / steps;
  for (int k = 0; k < steps; ++k) {
    VarState k1 = var_rhs(m, s, tol);
    VarState k2 = var_rhs(m, var_axpy(s, 0.5 * h, k1), tol);
    VarState k3 = var_rhs(m, var_axpy(s, 0.5 * h, k2), tol);
    VarState k4 = var_rhs(m, var_axpy(s, h, k3), tol);
    VarState sum = var_axpy(k1, 2.0, k2);
    sum = var_axpy(sum, 2.0, k3);
    sum = var_axpy(sum, 1.0, k4);
    s = var_axpy(s, h / 6.0, sum);
  }
  ExpFrame out;
  out.y = s.x;
  out.v_end = s.v;
  out.jac = std::move(s.j);
  return out;
}

ExpPatch exp_patch(const MetricField& m, const Vec& x, const Eigen::MatrixXd& plane, double radius,
                   int grid, int steps, const Tolerances& tol) {
  const int n = m.dim();
  const int k = static_cast<int>(plane.rows());
  if (plane.cols() != n) fail(ErrorKind::bad_argument, "plane row length does not match the chart");
  if (k < 1 || k >= n) fail(ErrorKind::bad_argument, "plane rank must be between 1 and dim - 1");
  if (!(radius > 0.0)) fail(ErrorKind::bad_argument, "patch radius must be positive");
  if (grid < 2) fail(ErrorKind::bad_argument, "patch grid needs at least two points per axis");

  // Modified Gram-Schmidt keeps each direction positively aligned with the
  // input row, so the frame is deterministic.
  Eigen::MatrixXd thin(n, k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd col = plane.row(i).transpose();
    for (int j = 0; j < i; ++j) col -= thin.col(j).dot(col) * thin.col(j);
    double nrm = col.norm();
    if (nrm < 1e-12) fail(ErrorKind::rank_deficient, "plane rows are dependent");
    thin.col(i) = col / nrm;
  }

  ExpPatch patch;
  patch.metric = m;
  patch.center = x;
  patch.plane = thin.transpose();
  patch.radius = radius;
  patch.grid = grid;
  patch.steps = steps;

  patch.w_samples.push_back(Vec::Zero(k));
  patch.samples.push_back(x);
  long long total = 1;
  for (int a = 0; a < k; ++a) total *= grid;
  for (long long idx = 0; idx < total; ++idx) {
    Vec w(k);
    long long rest = idx;
    bool center = true;
    for (int a = 0; a < k; ++a) {
      int step = static_cast<int>(rest % grid);
      rest /= grid;
      w(a) = -radius + 2.0 * radius * step / (grid - 1.0);
      if (std::abs(w(a)) > 1e-15) center = false;
    }
    if (center) continue;
    Vec ambient = patch.plane.transpose() * w;
    patch.w_samples.push_back(w);
    patch.samples.push_back(exp_map(m, x, ambient, steps, tol));
  }
  return patch;
}

double surface_offset(const ExpPatch& patch, const Vec& q, const Vec* w_seed,
                      const Tolerances& tol) {
  const int k = static_cast<int>(patch.plane.rows());
  Vec w;
  if (w_seed != nullptr) {
    if (w_seed->size() != k) fail(ErrorKind::bad_argument, "seed dimension does not match the plane");
    w = *w_seed;
  } else {
    size_t best = 0;
    double best_d = (q - patch.samples[0]).norm();
    for (size_t i = 1; i < patch.samples.size(); ++i) {
      double d = (q - patch.samples[i]).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    w = patch.w_samples[best];
  }

  std::vector<Vec> dirs;
  for (int a = 0; a < k; ++a) dirs.push_back(patch.plane.row(a).transpose());

  double dist = 0.0;
  double move = 1.0;
  for (int it = 0; it < 12; ++it) {
    ExpFrame f = exp_map_with_jacobian(patch.metric, patch.center, patch.plane.transpose() * w,
                                       dirs, patch.steps, tol);
    Vec resid = f.y - q;
    dist = resid.norm();
    if (move < 1e-12 || dist < 1e-15) break;
    Eigen::MatrixXd jac(patch.metric.dim(), k);
    for (int a = 0; a < k; ++a) jac.col(a) = f.jac[a];
    Vec step = jac.colPivHouseholderQr().solve(resid);
    move = step.norm();
    w -= step;
    if (w.norm() > 1.6 * patch.radius)
      fail(ErrorKind::out_of_patch, "nearest-point search ran past the patch rim");
  }
  return dist;
}

}  // namespace lorentz
