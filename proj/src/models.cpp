#include "lorentz/models.hpp"

#include <cmath>
#include <set>

namespace lorentz {

namespace {

std::vector<std::string> numbered(const std::string& stem, int count, int first = 1) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(stem + std::to_string(first + i));
  return out;
}

Vec filled(int n, double v) { return Vec::Constant(n, v); }

void check_dim(int n, int lo) {
  if (n < lo || n > kMaxDim)
    fail(ErrorKind::bad_argument,
         "model dimension must be between " + std::to_string(lo) + " and " + std::to_string(kMaxDim));
}

void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorKind::bad_argument, "radius must be positive");
}

}  // namespace

MetricField minkowski(int n) {
  check_dim(n, 2);
  std::vector<std::string> coords{"t"};
  for (const auto& c : numbered("x", n - 1)) coords.push_back(c);
  std::vector<int> sig(n, 1);
  sig[0] = -1;
  MetricField m("minkowski" + std::to_string(n), coords, sig, filled(n, -2.0), filled(n, 2.0));
  m.set_component(0, 0, Expr::constant(-1.0));
  for (int i = 1; i < n; ++i) m.set_component(i, i, Expr::constant(1.0));
  return m;
}

MetricField euclidean(int n) {
  check_dim(n, 1);
  MetricField m("euclidean" + std::to_string(n), numbered("x", n), std::vector<int>(n, 1),
                filled(n, -2.0), filled(n, 2.0));
  for (int i = 0; i < n; ++i) m.set_component(i, i, Expr::constant(1.0));
  return m;
}

MetricField hyperbolic(int n, double r) {
  check_dim(n, 2);
  check_radius(r);
  std::vector<std::string> coords = numbered("x", n - 1);
  coords.push_back("y");
  Vec lo = filled(n, -1.0), hi = filled(n, 1.0);
  lo(n - 1) = 0.5;
  hi(n - 1) = 2.0;
  MetricField m("hyperbolic" + std::to_string(n), coords, std::vector<int>(n, 1), lo, hi);
  Expr f = Expr::constant(r * r) / pow(Expr::coord(n - 1), 2);
  for (int i = 0; i < n; ++i) m.set_component(i, i, f);
  return m;
}

MetricField de_sitter(int n, double r) {
  check_dim(n, 2);
  check_radius(r);
  std::vector<std::string> coords{"eta"};
  for (const auto& c : numbered("x", n - 1)) coords.push_back(c);
  std::vector<int> sig(n, 1);
  sig[0] = -1;
  Vec lo = filled(n, -1.0), hi = filled(n, 1.0);
  lo(0) = 0.5;
  hi(0) = 2.0;
  MetricField m("de_sitter" + std::to_string(n), coords, sig, lo, hi);
  Expr f = Expr::constant(r * r) / pow(Expr::coord(0), 2);
  m.set_component(0, 0, -f);
  for (int i = 1; i < n; ++i) m.set_component(i, i, f);
  return m;
}

MetricField anti_de_sitter(int n, double r) {
  check_dim(n, 3);
  check_radius(r);
  if (n == 3) {
    MetricField unit = berger_sl2(1.0);
    return conformally_scaled(unit, Expr::constant(r * r), "anti_de_sitter3");
  }
  std::vector<std::string> coords{"t"};
  for (const auto& c : numbered("x", n - 2)) coords.push_back(c);
  coords.push_back("z");
  std::vector<int> sig(n, 1);
  sig[0] = -1;
  Vec lo = filled(n, -1.0), hi = filled(n, 1.0);
  lo(n - 1) = 0.5;
  hi(n - 1) = 2.0;
  MetricField m("anti_de_sitter" + std::to_string(n), coords, sig, lo, hi);
  Expr f = Expr::constant(r * r) / pow(Expr::coord(n - 1), 2);
  m.set_component(0, 0, -f);
  for (int i = 1; i < n; ++i) m.set_component(i, i, f);
  return m;
}

MetricField berger_sl2(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::bad_argument, "berger deformation parameter must be positive");
  // Left-invariant coframe in the N(u) D(h) M(v) chart, with a = exp(-2h):
  //   theta_H = dh + a v du,  theta_E = a du,  theta_F = dv - 2v dh - v^2 a du.
  // The metric is epsilon * theta_H^2 + theta_E theta_F (symmetrized), which
  // is the Killing pairing for epsilon = 1 and the Berger deformation
  // otherwise. Expanding gives the components below.
  std::string name = epsilon == 1.0 ? "sl2_killing_form" : "berger_sl2";
  MetricField m(name, {"h", "u", "v"}, {-1, 1, 1}, filled(3, -0.8), filled(3, 0.8));
  Expr h = Expr::coord(0), u = Expr::coord(1), v = Expr::coord(2);
  Expr a = exp(Expr::constant(-2.0) * h);
  Expr eps = Expr::constant(epsilon);
  Expr em1 = Expr::constant(epsilon - 1.0);
  m.set_component(0, 0, eps);
  m.set_component(0, 1, em1 * a * v);
  m.set_component(1, 1, em1 * pow(a, 2) * pow(v, 2));
  m.set_component(1, 2, a / Expr::constant(2.0));
  return m;
}

Eigen::Matrix2d sl2_from_chart(const Vec& p) {
  if (p.size() != 3) fail(ErrorKind::bad_argument, "sl2 chart points have three coordinates");
  double h = p(0), u = p(1), v = p(2);
  double eh = std::exp(h), emh = std::exp(-h);
  Eigen::Matrix2d a;
  a << eh + u * v * emh, u * emh, v * emh, emh;
  return a;
}

Vec sl2_to_chart(const Eigen::Matrix2d& a) {
  if (!(a(1, 1) > 0.0)) fail(ErrorKind::chart_bounds, "matrix lies outside the sl2 chart");
  if (std::abs(a.determinant() - 1.0) > 1e-9)
    fail(ErrorKind::bad_argument, "matrix is not in SL(2,R)");
  Vec p(3);
  p(0) = -std::log(a(1, 1));
  p(1) = a(0, 1) / a(1, 1);
  p(2) = a(1, 0) / a(1, 1);
  return p;
}

MetricField warped(const WarpedSpec& spec, const Tolerances& tol) {
  const int bd = spec.base.dim();
  const int fd = spec.fiber.dim();
  if (bd + fd > kMaxDim) fail(ErrorKind::bad_argument, "warped product dimension exceeds the limit");
  for (int s : spec.base.signature())
    if (s < 0) fail(ErrorKind::bad_argument, "warped base must be Riemannian");
  int neg = 0;
  for (int s : spec.fiber.signature()) neg += s < 0 ? 1 : 0;
  if (neg != 1) fail(ErrorKind::bad_argument, "warped fiber must be Lorentzian");
  if (!spec.warp.valid()) fail(ErrorKind::bad_argument, "warp function is missing");
  if (spec.warp.min_dim() > bd)
    fail(ErrorKind::bad_argument, "warp function must depend on base coordinates only");

  std::vector<std::string> coords = spec.base.coords();
  std::set<std::string> taken(coords.begin(), coords.end());
  for (const auto& c : spec.fiber.coords()) {
    std::string use = taken.count(c) ? c + "_f" : c;
    if (taken.count(use))
      fail(ErrorKind::bad_argument, "cannot disambiguate fiber coordinate '" + c + "'");
    taken.insert(use);
    coords.push_back(use);
  }
  std::vector<int> sig = spec.base.signature();
  sig.insert(sig.end(), spec.fiber.signature().begin(), spec.fiber.signature().end());
  Vec lo(bd + fd), hi(bd + fd);
  lo.head(bd) = spec.base.box_lo();
  hi.head(bd) = spec.base.box_hi();
  lo.tail(fd) = spec.fiber.box_lo();
  hi.tail(fd) = spec.fiber.box_hi();

  MetricField m(spec.name, coords, sig, lo, hi);
  for (int i = 0; i < bd; ++i)
    for (int j = i; j < bd; ++j) m.set_component(i, j, spec.base.component(i, j));
  std::vector<Expr> shift;
  for (int k = 0; k < fd; ++k) shift.push_back(Expr::coord(bd + k));
  for (int i = 0; i < fd; ++i)
    for (int j = i; j < fd; ++j) {
      const Expr& c = spec.fiber.component(i, j);
      if (!c.valid() || !c.node()) continue;
      m.set_component(bd + i, bd + j, spec.warp * c.substituted(shift));
    }

  // Positivity probe for the warp over the base box.
  const int per = 4;
  long long total = 1;
  for (int k = 0; k < bd; ++k) total *= per;
  for (long long idx = 0; idx < total; ++idx) {
    Vec p(bd);
    long long rest = idx;
    for (int k = 0; k < bd; ++k) {
      int step = static_cast<int>(rest % per);
      rest /= per;
      p(k) = spec.base.box_lo()(k) +
             (step + 0.5) / per * (spec.base.box_hi()(k) - spec.base.box_lo()(k));
    }
    if (!(eval(spec.warp, p) > tol.warp_positive))
      fail(ErrorKind::domain, "warp function is not positive on the base box");
  }
  return m;
}

}  // namespace lorentz
