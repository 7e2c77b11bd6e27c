#include "lorentz/detect.hpp"

#include <algorithm>
#include <cmath>

namespace lorentz {

namespace {

std::vector<Vec> lattice(const Vec& lo, const Vec& hi, int per_axis) {
  const int n = static_cast<int>(lo.size());
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
      p(k) = lo(k) + t * (hi(k) - lo(k));
    }
    out.push_back(p);
  }
  return out;
}

Mat fiber_block(const ProductChartSpec& spec, const Vec& p, const Tolerances& tol) {
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  MetricValue mv = metric_at(spec.metric, p, tol);
  return mv.g.block(bd, bd, fd, fd);
}

Vec join_point(const ProductChartSpec& spec, const Vec& x, const Vec& y) {
  Vec p(spec.metric.dim());
  p.head(spec.base_dim) = x;
  p.tail(spec.fiber_dim()) = y;
  return p;
}

CheckState grade(double value, double pass_below, double fail_above) {
  if (value < pass_below) return CheckState::pass;
  if (value > fail_above) return CheckState::fail;
  return CheckState::inconclusive;
}

// The characteristic (g-orthogonal) line of a tangent hyperplane, from the
// kernel of the pairing rows.
Vec hyperplane_conormal_direction(const Mat& g, const Eigen::MatrixXd& tangents) {
  Eigen::MatrixXd rows = tangents.transpose() * g;  // (n-1) x n
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  Eigen::VectorXd nu = svd.matrixV().col(rows.cols() - 1);
  int imax = 0;
  nu.cwiseAbs().maxCoeff(&imax);
  if (nu(imax) < 0) nu = -nu;
  return nu;
}

}  // namespace

const char* to_string(WarpedClass c) {
  switch (c) {
    case WarpedClass::warped:
      return "warped";
    case WarpedClass::not_warped:
      return "not_warped";
    case WarpedClass::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

const char* to_string(CheckState c) {
  switch (c) {
    case CheckState::pass:
      return "pass";
    case CheckState::fail:
      return "fail";
    case CheckState::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

void validate_product_chart(const ProductChartSpec& spec) {
  const int n = spec.metric.dim();
  if (spec.base_dim < 1 || spec.base_dim > n - 1)
    fail(ErrorKind::bad_argument, "base block must leave a nonempty fiber");
}

Vec base_part(const ProductChartSpec& spec, const Vec& p) {
  if (p.size() != spec.metric.dim()) fail(ErrorKind::bad_argument, "point dimension mismatch");
  return p.head(spec.base_dim);
}

Vec fiber_part(const ProductChartSpec& spec, const Vec& p) {
  if (p.size() != spec.metric.dim()) fail(ErrorKind::bad_argument, "point dimension mismatch");
  return p.tail(spec.fiber_dim());
}

MetricField fiber_restriction(const ProductChartSpec& spec, const Vec& x0) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  if (x0.size() != bd) fail(ErrorKind::bad_argument, "base point dimension mismatch");
  const MetricField& m = spec.metric;
  std::vector<std::string> coords(m.coords().begin() + bd, m.coords().end());
  std::vector<int> sig(m.signature().begin() + bd, m.signature().end());
  MetricField out(m.name() + "_fiber", coords, sig, m.box_lo().tail(fd), m.box_hi().tail(fd));
  std::vector<Expr> repl;
  for (int i = 0; i < bd; ++i) repl.push_back(Expr::constant(x0(i)));
  for (int j = 0; j < fd; ++j) repl.push_back(Expr::coord(j));
  for (int i = 0; i < fd; ++i)
    for (int j = i; j < fd; ++j)
      out.set_component(i, j, m.component(bd + i, bd + j).substituted(repl));
  return out;
}

Immersion base_leaf(const ProductChartSpec& spec, const Vec& y0) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  if (y0.size() != fd) fail(ErrorKind::bad_argument, "fiber point dimension mismatch");
  std::vector<std::string> params(spec.metric.coords().begin(),
                                  spec.metric.coords().begin() + bd);
  std::vector<Expr> map;
  for (int i = 0; i < bd; ++i) map.push_back(Expr::coord(i));
  for (int j = 0; j < fd; ++j) map.push_back(Expr::constant(y0(j)));
  return make_immersion("base_leaf", params, map, spec.metric.box_lo().head(bd),
                        spec.metric.box_hi().head(bd));
}

Immersion fiber_leaf(const ProductChartSpec& spec, const Vec& x0) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  if (x0.size() != bd) fail(ErrorKind::bad_argument, "base point dimension mismatch");
  std::vector<std::string> params(spec.metric.coords().begin() + bd, spec.metric.coords().end());
  std::vector<Expr> map;
  for (int i = 0; i < bd; ++i) map.push_back(Expr::constant(x0(i)));
  for (int j = 0; j < fd; ++j) map.push_back(Expr::coord(j));
  return make_immersion("fiber_leaf", params, map, spec.metric.box_lo().tail(fd),
                        spec.metric.box_hi().tail(fd));
}

Immersion lift_to_product(const ProductChartSpec& spec, const Immersion& fiber_im) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  if (fiber_im.ambient_dim() != fd)
    fail(ErrorKind::bad_argument, "fiber immersion does not target the fiber block");
  const int fk = fiber_im.param_dim();
  std::vector<std::string> params(spec.metric.coords().begin(),
                                  spec.metric.coords().begin() + bd);
  for (const auto& q : fiber_im.params) {
    std::string use = q;
    while (std::find(params.begin(), params.end(), use) != params.end()) use += "_p";
    params.push_back(use);
  }
  std::vector<Expr> shift;
  for (int a = 0; a < fk; ++a) shift.push_back(Expr::coord(bd + a));
  std::vector<Expr> map;
  for (int i = 0; i < bd; ++i) map.push_back(Expr::coord(i));
  for (int j = 0; j < fd; ++j) map.push_back(fiber_im.map[j].substituted(shift));
  Vec lo(bd + fk), hi(bd + fk);
  lo.head(bd) = spec.metric.box_lo().head(bd);
  hi.head(bd) = spec.metric.box_hi().head(bd);
  lo.tail(fk) = fiber_im.box_lo;
  hi.tail(fk) = fiber_im.box_hi;
  return make_immersion(fiber_im.name + "_lift", params, map, lo, hi);
}

BlockReport check_block_structure(const ProductChartSpec& spec, int grid_per_axis,
                                  const Tolerances& tol) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  const MetricField& m = spec.metric;
  std::vector<Vec> base_pts = lattice(m.box_lo().head(bd), m.box_hi().head(bd), grid_per_axis);
  std::vector<Vec> fiber_pts = lattice(m.box_lo().tail(fd), m.box_hi().tail(fd), grid_per_axis);
  Vec x0 = 0.5 * (m.box_lo().head(bd) + m.box_hi().head(bd));

  BlockReport rep;
  bool fit_ok = true;
  double lambda_lo = 0.0, lambda_hi = 0.0;
  bool lambda_span_set = false;
  for (const Vec& x : base_pts) {
    double lmin = 0.0, lmax = 0.0;
    bool first = true;
    for (const Vec& y : fiber_pts) {
      Vec p = join_point(spec, x, y);
      MetricValue mv = metric_at(m, p, tol);
      for (int i = 0; i < bd; ++i)
        for (int j = bd; j < bd + fd; ++j)
          rep.off_block_max = std::max(rep.off_block_max, std::abs(mv.g(i, j)));

      Mat b = mv.g.block(bd, bd, fd, fd);
      Mat ref = fiber_block(spec, join_point(spec, x0, y), tol);
      double rr = ref.cwiseAbs2().sum();
      if (rr < 1e-20) {
        fit_ok = false;
        continue;
      }
      double lambda = (b.array() * ref.array()).sum() / rr;
      double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
      double miss = (b - lambda * ref).cwiseAbs().maxCoeff();
      rep.conformal_fit_residual = std::max(rep.conformal_fit_residual, miss / scale);
      if (miss / scale > tol.conformal_entry) fit_ok = false;
      if (first) {
        lmin = lmax = lambda;
        first = false;
      } else {
        lmin = std::min(lmin, lambda);
        lmax = std::max(lmax, lambda);
      }
    }
    // One scalar per base point: the factor may not vary along the fiber.
    rep.scalar_y_variation = std::max(rep.scalar_y_variation, lmax - lmin);
    if (!lambda_span_set) {
      lambda_lo = lmin;
      lambda_hi = lmax;
      lambda_span_set = true;
    } else {
      lambda_lo = std::min(lambda_lo, lmin);
      lambda_hi = std::max(lambda_hi, lmax);
    }
  }
  double lscale = std::max(1.0, std::abs(lambda_hi));
  rep.fiber_conformal = fit_ok && rep.scalar_y_variation < tol.conformal_entry * lscale;
  return rep;
}

HolonomyReport holonomy_homothety_check(const ProductChartSpec& spec, const Vec& x1, const Vec& x2,
                                        int fiber_grid_per_axis, const Tolerances& tol) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  if (x1.size() != bd || x2.size() != bd)
    fail(ErrorKind::bad_argument, "base point dimension mismatch");
  const MetricField& m = spec.metric;
  std::vector<Vec> fiber_pts = lattice(m.box_lo().tail(fd), m.box_hi().tail(fd),
                                       fiber_grid_per_axis);

  HolonomyReport rep;
  bool have_ref = false;
  for (const Vec& y : fiber_pts) {
    Mat b1 = fiber_block(spec, join_point(spec, x1, y), tol);
    Mat b2 = fiber_block(spec, join_point(spec, x2, y), tol);
    double guard = 1e-7 * std::max(1.0, b1.cwiseAbs().maxCoeff());
    for (int i = 0; i < fd; ++i)
      for (int j = i; j < fd; ++j) {
        if (std::abs(b1(i, j)) <= guard) {
          ++rep.skipped_entries;
          continue;
        }
        double r = b2(i, j) / b1(i, j);
        if (!have_ref) {
          rep.ratio = r;
          have_ref = true;
        }
        rep.max_variation = std::max(rep.max_variation, std::abs(r - rep.ratio));
      }
  }
  if (!have_ref)
    fail(ErrorKind::numeric, "every fiber entry fell under the holonomy division guard");
  return rep;
}

WarpedVerdict warped_criterion(const ProductChartSpec& spec,
                               const std::vector<Immersion>& hypersurfaces, int grid_per_axis,
                               unsigned long long seed, const Tolerances& tol) {
  validate_product_chart(spec);
  const int bd = spec.base_dim;
  const int fd = spec.fiber_dim();
  const int n = spec.metric.dim();
  if (grid_per_axis < 2) fail(ErrorKind::bad_argument, "need at least two grid points per axis");

  // Base saturation, checked on the parametrization tree: every base
  // coordinate is a bare parameter and no fiber component touches those
  // parameters.
  for (const auto& im : hypersurfaces) {
    if (im.ambient_dim() != n)
      fail(ErrorKind::bad_argument, "hypersurface '" + im.name + "' does not target the chart");
    if (im.param_dim() != n - 1)
      fail(ErrorKind::bad_argument, "'" + im.name + "' is not a hypersurface");
    std::vector<int> base_params;
    for (int i = 0; i < bd; ++i) {
      const ExprNode* node = im.map[i].node();
      if (node == nullptr || node->op != ExprOp::coord)
        fail(ErrorKind::bad_argument, "hypersurface '" + im.name + "' is not base-saturated");
      for (int prev : base_params)
        if (prev == node->index)
          fail(ErrorKind::bad_argument, "hypersurface '" + im.name + "' reuses a base parameter");
      base_params.push_back(node->index);
    }
    for (int j = bd; j < n; ++j)
      for (int a : base_params)
        if (im.map[j].depends_on(a))
          fail(ErrorKind::bad_argument,
               "hypersurface '" + im.name + "' couples fiber components to the base");
  }

  WarpedVerdict v;

  BlockReport block = check_block_structure(spec, grid_per_axis, tol);
  v.off_block_max = block.off_block_max;
  v.fiber_conformal = block.fiber_conformal;
  v.block_structure = grade(block.off_block_max, tol.block_off_max, tol.block_off_max);
  if (v.block_structure == CheckState::inconclusive) v.block_structure = CheckState::fail;
  if (!block.fiber_conformal) v.block_structure = CheckState::fail;

  const MetricField& m = spec.metric;
  std::vector<Vec> base_pts = lattice(m.box_lo().head(bd), m.box_hi().head(bd), 2);
  std::vector<Vec> fiber_pts = lattice(m.box_lo().tail(fd), m.box_hi().tail(fd), 2);
  std::vector<Vec> base_samples{base_pts.front(), base_pts.back()};
  std::vector<Vec> fiber_samples{fiber_pts.front(), fiber_pts.back()};

  // (a) base leaves are geodesic. A leaf with degenerate induced metric
  // cannot be a factor leaf of a warped product, so degeneracy fails the
  // check outright instead of aborting the analysis.
  bool base_degenerate = false;
  for (const Vec& y : fiber_samples) {
    Immersion leaf = base_leaf(spec, y);
    Vec c = 0.5 * (leaf.box_lo + leaf.box_hi);
    Vec off = c + 0.22 * (leaf.box_hi - c);
    for (const Vec& u : {c, off}) {
      try {
        SecondFundamentalForm sff = second_fundamental_form(m, leaf, u, tol);
        v.base_residual = std::max(v.base_residual, sff.max_abs);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_metric) throw;
        base_degenerate = true;
      }
    }
  }
  v.base_geodesic = grade(v.base_residual, tol.classify_geodesic, tol.geodesy_reject);
  if (base_degenerate) v.base_geodesic = CheckState::fail;

  // (b) fiber leaves are umbilical.
  bool fiber_degenerate = false;
  for (const Vec& x : base_samples) {
    Immersion leaf = fiber_leaf(spec, x);
    Vec c = 0.5 * (leaf.box_lo + leaf.box_hi);
    Vec off = c + 0.22 * (leaf.box_hi - c);
    for (const Vec& u : {c, off}) {
      try {
        SecondFundamentalForm sff = second_fundamental_form(m, leaf, u, tol);
        v.fiber_residual = std::max(v.fiber_residual, sff.umbilical_residual);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_metric) throw;
        fiber_degenerate = true;
      }
    }
  }
  v.fiber_umbilical = grade(v.fiber_residual, tol.classify_umbilical, tol.geodesy_reject);
  if (fiber_degenerate) v.fiber_umbilical = CheckState::fail;

  // (c) the listed hypersurfaces are geodesic and their characteristic
  // directions generate the fiber tangent.
  Eigen::MatrixXd normals(static_cast<int>(hypersurfaces.size()), fd);
  for (size_t h = 0; h < hypersurfaces.size(); ++h) {
    const Immersion& im = hypersurfaces[h];
    Vec u = 0.5 * (im.box_lo + im.box_hi);
    double resid = geodesy_residual(m, im, u, 4, {}, tol);
    v.hypersurface_residual_max = std::max(v.hypersurface_residual_max, resid);
    ImmersionJet jet = immersion_jet(im, u, tol);
    MetricValue mv = metric_at(m, jet.y, tol);
    Vec nu = hyperplane_conormal_direction(mv.g, jet.d);
    normals.row(static_cast<int>(h)) = nu.tail(fd).transpose();
  }
  if (hypersurfaces.empty()) {
    v.normal_rank = 0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(normals);
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol.rank_singular_value) ++v.normal_rank;
  }
  if (v.normal_rank < fd)
    fail(ErrorKind::rank_deficient,
         "hypersurface characteristic directions do not generate the fiber tangent");
  v.hypersurfaces_geodesic =
      grade(v.hypersurface_residual_max, tol.geodesy_certificate, tol.geodesy_reject);

  // Holonomy between the extreme sampled base points. With no measurable
  // fiber entry there is no ratio to certify, which leaves the sub-check
  // undecided (the block check has already recorded the structural failure).
  try {
    HolonomyReport hol = holonomy_homothety_check(spec, base_samples.front(), base_samples.back(),
                                                  grid_per_axis, tol);
    v.holonomy_ratio = hol.ratio;
    v.holonomy_variation = hol.max_variation;
    v.holonomy_homothetic = grade(hol.max_variation, tol.homothety_variation, tol.homothety_reject);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numeric) throw;
    v.holonomy_homothetic = CheckState::inconclusive;
  }

  // (d) fiber leaves have constant curvature, one spread per leaf. A curve
  // fiber has no curvature to test; a leaf whose restricted metric cannot be
  // inverted fails the same way a degenerate leaf does above.
  std::vector<Vec> base_curv = base_samples;
  base_curv.push_back(0.5 * (m.box_lo().head(bd) + m.box_hi().head(bd)));
  if (fd < 2) base_curv.clear();
  bool first_leaf = true;
  bool leaf_degenerate = false;
  for (const Vec& x : base_curv) {
    MetricField leaf_metric = fiber_restriction(spec, x);
    Vec yc = 0.5 * (leaf_metric.box_lo() + leaf_metric.box_hi());
    Vec yo = yc + 0.2 * (leaf_metric.box_hi() - yc);
    double leaf_spread = 0.0;
    double leaf_mean = 0.0;
    int leaf_count = 0;
    try {
      for (const Vec& y : {yc, yo}) {
        CurvatureSpreadReport cr = constant_curvature_residual(leaf_metric, y, 40, seed, tol);
        leaf_spread = std::max(leaf_spread, cr.spread);
        leaf_mean += cr.k_mean;
        ++leaf_count;
      }
      leaf_mean /= leaf_count;
      // Pointwise spreads certify each point; the leaf also needs one value
      // across its points.
      for (const Vec& y : {yc, yo}) {
        CurvatureSpreadReport cr = constant_curvature_residual(leaf_metric, y, 40, seed, tol);
        leaf_spread = std::max(leaf_spread, std::abs(cr.k_mean - leaf_mean));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_metric) throw;
      leaf_degenerate = true;
      continue;
    }
    if (first_leaf) {
      v.fiber_k_mean = leaf_mean;
      first_leaf = false;
    }
    v.fiber_spread = std::max(v.fiber_spread, leaf_spread);
  }
  v.fiber_constant_curvature = grade(v.fiber_spread, tol.fiber_spread, tol.fiber_spread_reject);
  if (leaf_degenerate) v.fiber_constant_curvature = CheckState::fail;

  const CheckState checks[] = {v.block_structure, v.base_geodesic, v.fiber_umbilical,
                               v.holonomy_homothetic, v.fiber_constant_curvature,
                               v.hypersurfaces_geodesic};
  bool any_fail = false, all_pass = true;
  for (CheckState c : checks) {
    if (c == CheckState::fail) any_fail = true;
    if (c != CheckState::pass) all_pass = false;
  }
  v.verdict = any_fail ? WarpedClass::not_warped
                       : (all_pass ? WarpedClass::warped : WarpedClass::inconclusive);
  return v;
}

ConformalReport conformal_factor_map(const MetricField& m1, const MetricField& m2,
                                     const std::vector<Expr>& phi, int grid_per_axis,
                                     const Tolerances& tol) {
  const int n = m1.dim();
  if (m2.dim() != n) fail(ErrorKind::bad_argument, "charts have different dimensions");
  if (static_cast<int>(phi.size()) != n)
    fail(ErrorKind::bad_argument, "map components do not match the chart dimension");
  for (const auto& e : phi) {
    if (!e.valid()) fail(ErrorKind::bad_argument, "map component is missing");
    if (e.min_dim() > n) fail(ErrorKind::bad_argument, "map references unknown coordinates");
  }
  std::vector<Vec> pts = lattice(m1.box_lo(), m1.box_hi(), grid_per_axis);

  ConformalReport rep;
  rep.is_conformal = true;
  bool have_ref = false;
  for (const Vec& p : pts) {
    Vec fp(n);
    Eigen::MatrixXd jac(n, n);
    for (int i = 0; i < n; ++i) {
      Jet1 j = eval_jet1(phi[i], p);
      fp(i) = j.v;
      jac.row(i) = j.g.transpose();
    }
    MetricValue here = metric_at(m1, p, tol);
    MetricValue there = metric_at(m2, fp, tol);
    Mat pulled = jac.transpose() * there.g * jac;
    double gg = here.g.cwiseAbs2().sum();
    if (gg < 1e-20) fail(ErrorKind::degenerate_metric, "vanishing source metric block");
    double lambda = (pulled.array() * here.g.array()).sum() / gg;
    double scale = std::max(1.0, pulled.cwiseAbs().maxCoeff());
    double miss = (pulled - lambda * here.g).cwiseAbs().maxCoeff() / scale;
    rep.fit_residual = std::max(rep.fit_residual, miss);
    if (miss > tol.conformal_entry) rep.is_conformal = false;
    if (!have_ref) {
      rep.lambda0 = lambda;
      have_ref = true;
    }
    rep.factor_variation = std::max(rep.factor_variation, std::abs(lambda - rep.lambda0));
  }
  return rep;
}

}  // namespace lorentz
