#include "lorentz/killing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "lorentz/models.hpp"

namespace lorentz {

namespace {

void check_field(const MetricField& m, const VectorField& v) {
  if (static_cast<int>(v.comp.size()) != m.dim())
    fail(ErrorKind::bad_argument, "field '" + v.name + "' does not match the chart dimension");
  for (const auto& e : v.comp) {
    if (!e.valid()) fail(ErrorKind::bad_argument, "field '" + v.name + "' has a missing component");
    if (e.min_dim() > m.dim())
      fail(ErrorKind::bad_argument, "field '" + v.name + "' references unknown coordinates");
  }
}

// Downhill simplex with the standard reflection/expansion/contraction
// coefficients. Good enough for the few-dimensional coefficient spheres the
// search walks over.
Vec nelder_mead(const std::function<double(const Vec&)>& f, const Vec& x0, double scale,
                int max_iter) {
  const int d = static_cast<int>(x0.size());
  std::vector<Vec> xs(d + 1, x0);
  std::vector<double> fs(d + 1);
  for (int i = 0; i < d; ++i) xs[i + 1](i) += scale;
  for (int i = 0; i <= d; ++i) fs[i] = f(xs[i]);

  std::vector<int> order(d + 1);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    int best = order[0], worst = order[d], second = order[d - 1];
    if (fs[worst] - fs[best] < 1e-15 * std::max(1.0, std::abs(fs[best]))) break;

    Vec centroid = Vec::Zero(d);
    for (int i = 0; i <= d; ++i)
      if (i != worst) centroid += xs[i];
    centroid /= d;

    Vec xr = centroid + (centroid - xs[worst]);
    double fr = f(xr);
    if (fr < fs[best]) {
      Vec xe = centroid + 2.0 * (centroid - xs[worst]);
      double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
    } else if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
    } else {
      Vec xc = fr < fs[worst] ? Vec(centroid + 0.5 * (xr - centroid))
                              : Vec(centroid - 0.5 * (centroid - xs[worst]));
      double fc = f(xc);
      if (fc < std::min(fr, fs[worst])) {
        xs[worst] = xc;
        fs[worst] = fc;
      } else {
        for (int i = 0; i <= d; ++i) {
          if (i == best) continue;
          xs[i] = xs[best] + 0.5 * (xs[i] - xs[best]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= d; ++i)
    if (fs[i] < fs[best]) best = i;
  return xs[best];
}

}  // namespace

Vec field_at(const VectorField& v, const Vec& p) {
  Vec out(static_cast<int>(v.comp.size()));
  for (int i = 0; i < out.size(); ++i) out(i) = eval(v.comp[i], p);
  return out;
}

std::vector<Vec> box_grid(const MetricField& m, int per_axis) {
  if (per_axis < 1) fail(ErrorKind::bad_argument, "need at least one point per axis");
  const int n = m.dim();
  long long total = 1;
  for (int k = 0; k < n; ++k) total *= per_axis;
  std::vector<Vec> out;
  out.reserve(static_cast<size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    Vec p(n);
    long long rest = idx;
    for (int k = 0; k < n; ++k) {
      int step = static_cast<int>(rest % per_axis);
      rest /= per_axis;
      double t = (step + 1.0) / (per_axis + 1.0);
      p(k) = m.box_lo()(k) + t * (m.box_hi()(k) - m.box_lo()(k));
    }
    out.push_back(p);
  }
  return out;
}

double killing_residual(const MetricField& m, const VectorField& v, const Vec& p,
                        const Tolerances& tol) {
  check_field(m, v);
  const int n = m.dim();
  MetricValue mv = metric_at(m, p, tol);
  std::vector<Jet1> comp_jets(n);
  for (int i = 0; i < n; ++i) comp_jets[i] = eval_jet1(v.comp[i], p);
  Vec vval(n);
  for (int i = 0; i < n; ++i) vval(i) = comp_jets[i].v;

  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet1 gij = eval_jet1(m.component(i, j), p);
      double lie = 0.0;
      for (int k = 0; k < n; ++k) {
        lie += vval(k) * gij.g(k);
        lie += mv.g(k, j) * comp_jets[k].g(i);
        lie += mv.g(i, k) * comp_jets[k].g(j);
      }
      worst = std::max(worst, std::abs(lie));
    }
  return worst;
}

LightlikeCheck lightlike_check(const MetricField& m, const VectorField& v,
                               const std::vector<Vec>& grid, const Tolerances& tol) {
  check_field(m, v);
  if (grid.empty()) fail(ErrorKind::bad_argument, "grid is empty");
  LightlikeCheck out;
  for (const Vec& p : grid) {
    MetricValue mv = metric_at(m, p, tol);
    Vec val = field_at(v, p);
    double q = std::abs(inner(mv.g, val, val)) / (1.0 + val.squaredNorm());
    out.max_q = std::max(out.max_q, q);
  }
  out.lightlike_everywhere = out.max_q < tol.isotropy_rel;
  return out;
}

double geodesic_orbit_residual(const MetricField& m, const VectorField& v, const Vec& p,
                               const Tolerances& tol) {
  check_field(m, v);
  const int n = m.dim();
  std::vector<Jet1> comp_jets(n);
  for (int i = 0; i < n; ++i) comp_jets[i] = eval_jet1(v.comp[i], p);
  Vec vval(n);
  for (int i = 0; i < n; ++i) vval(i) = comp_jets[i].v;
  if (vval.norm() == 0.0) fail(ErrorKind::zero_field, "field vanishes at the point");
  Christoffel gamma;
  christoffel_at(m, p, gamma, tol);
  Vec acc(n);
  for (int l = 0; l < n; ++l) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += vval(i) * comp_jets[l].g(i);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += gamma(l, i, j) * vval(i) * vval(j);
    acc(l) = s;
  }
  return acc.norm();
}

VectorField combine(const std::vector<VectorField>& basis, const Vec& coeffs,
                    const std::string& name) {
  if (basis.empty() || coeffs.size() != static_cast<int>(basis.size()))
    fail(ErrorKind::bad_argument, "coefficients do not match the basis");
  const int n = static_cast<int>(basis[0].comp.size());
  VectorField out;
  out.name = name;
  for (int i = 0; i < n; ++i) {
    Expr e = Expr::constant(0.0);
    for (size_t b = 0; b < basis.size(); ++b)
      e = e + Expr::constant(coeffs(static_cast<int>(b))) * basis[b].comp[i];
    out.comp.push_back(e);
  }
  return out;
}

NullSearchReport lightlike_killing_search(const MetricField& m,
                                          const std::vector<VectorField>& basis,
                                          const std::vector<Vec>& grid, int trials,
                                          unsigned long long seed, const Tolerances& tol) {
  if (basis.empty()) fail(ErrorKind::bad_argument, "basis is empty");
  if (grid.empty()) fail(ErrorKind::bad_argument, "grid is empty");
  if (trials < 1) fail(ErrorKind::bad_argument, "need at least one trial");
  for (const auto& b : basis) {
    check_field(m, b);
    for (const Vec& p : grid)
      if (killing_residual(m, b, p, tol) > tol.killing_accept)
        fail(ErrorKind::bad_argument, "basis field '" + b.name + "' is not Killing on the grid");
  }
  const int d = static_cast<int>(basis.size());

  // Basis values over the grid; the combination value at a grid point is one
  // matrix-vector product.
  std::vector<Eigen::MatrixXd> vals;  // per grid point, n x d
  std::vector<Mat> gs;
  const int n = m.dim();
  for (const Vec& p : grid) {
    Eigen::MatrixXd vb(n, d);
    for (int b = 0; b < d; ++b) vb.col(b) = field_at(basis[b], p);
    vals.push_back(vb);
    gs.push_back(metric_at(m, p, tol).g);
  }

  auto objective = [&](const Vec& c) -> double {
    double nc = c.norm();
    if (nc < 1e-12) return 1e9;
    Vec u = c / nc;
    double worst = 0.0;
    for (size_t i = 0; i < vals.size(); ++i) {
      Vec v = vals[i] * u;
      worst = std::max(worst, std::abs(inner(gs[i], v, v)));
    }
    return worst;
  };

  NullSearchReport rep;
  rep.seed = seed;
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Vec c0(d);
    for (int i = 0; i < d; ++i) c0(i) = gauss(rng);
    if (c0.norm() < 1e-9) continue;
    c0.normalize();
    Vec c = nelder_mead(objective, c0, 0.35, 400);
    c.normalize();
    double q = objective(c);
    if (q >= tol.null_search_accept) continue;

    bool dup = false;
    for (const auto& f : rep.found) {
      double dist = std::min((f.coeffs - c).norm(), (f.coeffs + c).norm());
      if (dist < 1e-3) {
        dup = true;
        break;
      }
    }
    if (dup) continue;

    NullFieldCandidate cand;
    cand.coeffs = c;
    cand.max_q = q;
    cand.min_norm = 1e300;
    VectorField combo = combine(basis, c);
    for (const Vec& p : grid) {
      Vec v = field_at(combo, p);
      cand.min_norm = std::min(cand.min_norm, v.norm());
    }
    if (cand.min_norm <= tol.null_min_norm) continue;
    for (const Vec& p : grid)
      cand.max_orbit_residual =
          std::max(cand.max_orbit_residual, geodesic_orbit_residual(m, combo, p, tol));
    rep.found.push_back(std::move(cand));
  }

  std::stable_sort(rep.found.begin(), rep.found.end(),
                   [](const NullFieldCandidate& a, const NullFieldCandidate& b) {
                     return a.max_q < b.max_q;
                   });
  return rep;
}

double pullback_residual(const MetricField& m, const std::vector<Expr>& map_comp,
                         const std::vector<Vec>& grid, const Tolerances& tol) {
  const int n = m.dim();
  if (static_cast<int>(map_comp.size()) != n)
    fail(ErrorKind::bad_argument, "map components do not match the chart dimension");
  for (const auto& e : map_comp) {
    if (!e.valid()) fail(ErrorKind::bad_argument, "map component is missing");
    if (e.min_dim() > n) fail(ErrorKind::bad_argument, "map references unknown coordinates");
  }
  if (grid.empty()) fail(ErrorKind::bad_argument, "grid is empty");

  double worst = 0.0;
  for (const Vec& p : grid) {
    Vec fp(n);
    Eigen::MatrixXd jac(n, n);
    for (int i = 0; i < n; ++i) {
      Jet1 j = eval_jet1(map_comp[i], p);
      fp(i) = j.v;
      jac.row(i) = j.g.transpose();
    }
    MetricValue here = metric_at(m, p, tol);
    MetricValue there = metric_at(m, fp, tol);
    Mat pulled = jac.transpose() * there.g * jac;
    worst = std::max(worst, (pulled - here.g).cwiseAbs().maxCoeff());
  }
  return worst;
}

double extend_isometry_pullback_residual(const WarpedSpec& spec, const std::vector<Expr>& fiber_map,
                                         const std::vector<Vec>& grid, const Tolerances& tol) {
  const int bd = spec.base.dim();
  const int fd = spec.fiber.dim();
  if (static_cast<int>(fiber_map.size()) != fd)
    fail(ErrorKind::bad_argument, "fiber map does not match the fiber dimension");
  for (const auto& e : fiber_map) {
    if (!e.valid()) fail(ErrorKind::bad_argument, "fiber map component is missing");
    if (e.min_dim() > fd) fail(ErrorKind::bad_argument, "fiber map references unknown coordinates");
  }
  MetricField total = warped(spec, tol);
  std::vector<Expr> shift;
  for (int k = 0; k < fd; ++k) shift.push_back(Expr::coord(bd + k));
  std::vector<Expr> full;
  for (int i = 0; i < bd; ++i) full.push_back(Expr::coord(i));
  for (int j = 0; j < fd; ++j) full.push_back(fiber_map[j].substituted(shift));
  return pullback_residual(total, full, grid, tol);
}

std::vector<VectorField> minkowski_translations(int n) {
  std::vector<VectorField> out;
  MetricField m = minkowski(n);
  for (int i = 0; i < n; ++i) {
    VectorField v;
    v.name = "P_" + m.coords()[i];
    for (int j = 0; j < n; ++j) v.comp.push_back(Expr::constant(i == j ? 1.0 : 0.0));
    out.push_back(v);
  }
  return out;
}

std::vector<VectorField> minkowski_killing(int n) {
  MetricField m = minkowski(n);
  std::vector<VectorField> out = minkowski_translations(n);
  for (int i = 1; i < n; ++i) {
    VectorField v;
    v.name = "B_" + m.coords()[i];
    for (int j = 0; j < n; ++j) {
      if (j == 0)
        v.comp.push_back(Expr::coord(i));
      else if (j == i)
        v.comp.push_back(Expr::coord(0));
      else
        v.comp.push_back(Expr::constant(0.0));
    }
    out.push_back(v);
  }
  for (int i = 1; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      VectorField v;
      v.name = "J_" + m.coords()[i] + m.coords()[j];
      for (int k = 0; k < n; ++k) {
        if (k == i)
          v.comp.push_back(-Expr::coord(j));
        else if (k == j)
          v.comp.push_back(Expr::coord(i));
        else
          v.comp.push_back(Expr::constant(0.0));
      }
      out.push_back(v);
    }
  return out;
}

std::vector<VectorField> de_sitter3_killing() {
  // Conformal planar chart (eta, x, y). Isometries are the flat conformal
  // maps fixing the eta^-2 factor: spatial translations, the rotation, the
  // dilation, and the two special conformal generators.
  Expr eta = Expr::coord(0), x = Expr::coord(1), y = Expr::coord(2);
  Expr q = -pow(eta, 2) + pow(x, 2) + pow(y, 2);
  std::vector<VectorField> out;
  out.push_back({"P_x", {Expr::constant(0.0), Expr::constant(1.0), Expr::constant(0.0)}});
  out.push_back({"P_y", {Expr::constant(0.0), Expr::constant(0.0), Expr::constant(1.0)}});
  out.push_back({"J_xy", {Expr::constant(0.0), -y, x}});
  out.push_back({"D", {eta, x, y}});
  Expr two = Expr::constant(2.0);
  out.push_back({"K_x", {two * x * eta, two * x * x - q, two * x * y}});
  out.push_back({"K_y", {two * y * eta, two * y * x, two * y * y - q}});
  return out;
}

std::vector<VectorField> sl2_killing(bool deformed) {
  Expr h = Expr::coord(0), u = Expr::coord(1), v = Expr::coord(2);
  Expr zero = Expr::constant(0.0), one = Expr::constant(1.0), two = Expr::constant(2.0);
  VectorField er{"E_r", {zero, one, zero}};
  VectorField fr{"F_r", {-u, -pow(u, 2), exp(two * h)}};
  VectorField hr{"H_r", {one, two * u, zero}};
  VectorField hl{"H_l", {one, zero, two * v}};
  std::vector<VectorField> out{er, fr, hr, hl};
  if (!deformed) {
    out.push_back({"E_l", {-v, exp(two * h), -pow(v, 2)}});
    out.push_back({"F_l", {zero, zero, one}});
  }
  return out;
}

}  // namespace lorentz
