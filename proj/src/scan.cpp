#include "lorentz/scan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lorentz/parallel.hpp"

namespace lorentz {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Isotropic chart direction for a point omega on the unit sphere of the
// spacelike frame span: e_0 + sum omega_i e_i, Euclidean-normalized.
Vec cone_direction(const Mat& frame, const Vec& omega) {
  Vec dir = frame.col(0);
  for (int i = 0; i < omega.size(); ++i) dir += omega(i) * frame.col(i + 1);
  return dir / dir.norm();
}

Vec sphere_point(const Vec& angles) {
  // Spherical product coordinates: the first m-1 angles are polar in [0, pi],
  // the last runs a full circle.
  const int m = static_cast<int>(angles.size());
  Vec w = Vec::Ones(m + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < i; ++j) w(i) *= std::sin(angles(j));
    w(i) *= std::cos(angles(i));
  }
  for (int j = 0; j < m; ++j) w(m) *= std::sin(angles(j));
  return w;
}

double circ_dist(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

struct Candidate {
  double theta = 0.0;  // first angle; the only one on the circle chart
  Vec angles;
  Vec dir;
  double residual = 0.0;
};

double golden_min(const std::function<double(double)>& f, double a, double b, int iters,
                  double* arg_out) {
  const double phi = 0.6180339887498948482;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 < f2) {
    if (arg_out) *arg_out = x1;
    return f1;
  }
  if (arg_out) *arg_out = x2;
  return f2;
}

}  // namespace

const char* to_string(CxClass c) {
  switch (c) {
    case CxClass::empty:
      return "empty";
    case CxClass::mono:
      return "mono";
    case CxClass::bi:
      return "bi";
    case CxClass::finite_k:
      return "finite_k";
    case CxClass::cone:
      return "cone";
  }
  return "unknown";
}

double direction_geodesy_residual(const MetricField& m, const Vec& x, const Vec& dir,
                                  const ScanOptions& opt, const Tolerances& tol) {
  const int n = m.dim();
  if (dir.size() != n) fail(ErrorKind::bad_argument, "direction dimension does not match the chart");
  MetricValue mv = metric_at(m, x, tol);
  if (std::abs(inner(mv.g, dir, dir)) > tol.isotropy_rel * dir.squaredNorm())
    fail(ErrorKind::not_lightlike, "direction is not isotropic at the base point");

  // The g-orthogonal hyperplane of dir contains dir itself; build its basis
  // starting there so probes always include the characteristic direction.
  Vec conormal = mv.g * dir;
  double cn2 = conormal.squaredNorm();
  if (cn2 < 1e-20) fail(ErrorKind::degenerate_plane, "conormal of the direction vanished");
  Eigen::MatrixXd plane(n - 1, n);
  plane.row(0) = dir.normalized().transpose();
  int rows = 1;
  for (int j = 0; j < n && rows < n - 1; ++j) {
    Vec v = Vec::Zero(n);
    v(j) = 1.0;
    v -= (conormal(j) / cn2) * conormal;
    for (int r = 0; r < rows; ++r) v -= plane.row(r).dot(v) * plane.row(r).transpose();
    if (v.norm() < 0.2) continue;
    plane.row(rows++) = v.normalized().transpose();
  }
  if (rows < n - 1) fail(ErrorKind::degenerate_plane, "could not complete a hyperplane basis");

  ExpPatch patch = exp_patch(m, x, plane, opt.radius, opt.patch_grid, opt.exp_steps, tol);
  const int k = n - 1;
  const double s = 0.4 * opt.radius;

  std::vector<Vec> frame_dirs;
  for (int a = 0; a < k; ++a) frame_dirs.push_back(patch.plane.row(a).transpose());

  double worst = 0.0;
  for (int pi = 0; pi < opt.probe_points; ++pi) {
    double alpha = kTwoPi * pi / opt.probe_points + 0.7;
    Vec wp = Vec::Zero(k);
    wp(0) = 0.5 * opt.radius * std::cos(alpha);
    wp(1) = 0.5 * opt.radius * std::sin(alpha);
    ExpFrame fr = exp_map_with_jacobian(m, x, patch.plane.transpose() * wp, frame_dirs,
                                        opt.exp_steps, tol);

    std::vector<Vec> cdirs;
    for (int a = 0; a < k && static_cast<int>(cdirs.size()) < opt.probe_dirs; ++a) {
      Vec c = Vec::Zero(k);
      c(a) = 1.0;
      cdirs.push_back(c);
    }
    for (int a = 1; a < k && static_cast<int>(cdirs.size()) < opt.probe_dirs; ++a) {
      Vec c = Vec::Zero(k);
      c(0) = c(a) = 1.0 / std::sqrt(2.0);
      cdirs.push_back(c);
      if (static_cast<int>(cdirs.size()) < opt.probe_dirs) {
        c(a) = -c(a);
        cdirs.push_back(c);
      }
    }

    for (const Vec& c : cdirs) {
      Vec t = Vec::Zero(n);
      for (int a = 0; a < k; ++a) t += c(a) * fr.jac[a];
      double len = t.norm();
      if (len < 1e-10) fail(ErrorKind::rank_deficient, "patch differential dropped rank");
      Vec that = t / len;
      Vec cparam = c / len;
      Vec q = exp_map(m, fr.y, s * that, opt.exp_steps, tol);
      Vec seed = wp + s * cparam;
      double off = surface_offset(patch, q, &seed, tol);
      worst = std::max(worst, off / (s * s));
    }
  }
  return worst;
}

ScanReport scan_cx(const MetricField& m, const Vec& x, int resolution, const Tolerances& tol) {
  ScanOptions opt;
  opt.resolution = resolution;
  return scan_cx(m, x, opt, tol);
}

ScanReport scan_cx(const MetricField& m, const Vec& x, const ScanOptions& opt,
                   const Tolerances& tol) {
  const int n = m.dim();
  if (n < 3) fail(ErrorKind::bad_argument, "the scan needs at least three dimensions");
  if (opt.resolution < 16) fail(ErrorKind::bad_argument, "scan resolution must be at least 16");
  MetricValue mv = metric_at(m, x, tol);
  Mat frame = orthonormal_frame(mv.g, m.signature());

  ScanReport rep;
  rep.manifold = m.name();
  rep.at = x;
  rep.resolution = opt.resolution;
  rep.radius = opt.radius;
  rep.certificate = tol.geodesy_certificate;
  rep.reject = tol.geodesy_reject;

  const int angle_count = n - 2;
  long long total = 1;
  for (int a = 0; a < angle_count; ++a) total *= opt.resolution;
  rep.grid.resize(static_cast<size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    Vec angles(angle_count);
    long long rest = idx;
    for (int a = angle_count - 1; a >= 0; --a) {
      int step = static_cast<int>(rest % opt.resolution);
      rest /= opt.resolution;
      if (a == angle_count - 1) {
        angles(a) = kTwoPi * step / opt.resolution;
      } else {
        angles(a) = (step + 0.5) * (kTwoPi / 2.0) / opt.resolution;
      }
    }
    rep.grid[idx].angles = angles;
    rep.grid[idx].dir = cone_direction(frame, sphere_point(angles));
  }

  parallel_for(static_cast<int>(total), [&](int i) {
    rep.grid[i].residual = direction_geodesy_residual(m, x, rep.grid[i].dir, opt, tol);
    rep.grid[i].accepted = rep.grid[i].residual < tol.geodesy_certificate;
  });

  int accepted = 0;
  for (const auto& e : rep.grid) accepted += e.accepted ? 1 : 0;
  rep.accepted_fraction = static_cast<double>(accepted) / static_cast<double>(total);

  if (rep.accepted_fraction > tol.cone_fraction) {
    rep.class_label = CxClass::cone;
  } else {
    std::vector<Candidate> cands;
    for (const auto& e : rep.grid)
      if (e.accepted) cands.push_back({e.angles(0), e.angles, e.dir, e.residual});

    // Grid wells are refined only on the circle chart; higher-dimensional
    // scans classify from accepted nodes alone.
    if (angle_count == 1) {
      const int res = opt.resolution;
      const double spacing = kTwoPi / res;
      std::vector<int> minima;
      for (int i = 0; i < res; ++i) {
        double here = rep.grid[i].residual;
        double left = rep.grid[(i + res - 1) % res].residual;
        double right = rep.grid[(i + 1) % res].residual;
        if (here <= left && here <= right) minima.push_back(i);
      }
      std::sort(minima.begin(), minima.end(), [&](int a, int b) {
        return rep.grid[a].residual < rep.grid[b].residual;
      });
      if (static_cast<int>(minima.size()) > opt.refine_limit) minima.resize(opt.refine_limit);

      auto eval_theta = [&](double theta) {
        Vec w(2);
        w << std::cos(theta), std::sin(theta);
        return direction_geodesy_residual(m, x, cone_direction(frame, w), opt, tol);
      };
      for (int i : minima) {
        if (rep.grid[i].accepted) continue;  // the node itself is already a candidate
        double center = rep.grid[i].angles(0);
        double theta = center;
        double value = golden_min(eval_theta, center - spacing, center + spacing,
                                  opt.refine_iters, &theta);
        if (value < tol.geodesy_certificate) {
          Vec w(2);
          w << std::cos(theta), std::sin(theta);
          double wrapped = std::fmod(theta + kTwoPi, kTwoPi);
          cands.push_back(
              {wrapped, Vec::Constant(1, wrapped), cone_direction(frame, w), value});
        }
      }

      std::sort(cands.begin(), cands.end(),
                [](const Candidate& a, const Candidate& b) { return a.theta < b.theta; });
      std::vector<std::vector<Candidate>> groups;
      for (const auto& c : cands) {
        if (!groups.empty() && circ_dist(groups.back().back().theta, c.theta) <
                                   tol.cluster_merge * spacing) {
          groups.back().push_back(c);
        } else {
          groups.push_back({c});
        }
      }
      if (groups.size() > 1 &&
          circ_dist(groups.back().back().theta, groups.front().front().theta) <
              tol.cluster_merge * spacing) {
        for (const auto& c : groups.back()) groups.front().push_back(c);
        groups.pop_back();
      }
      for (const auto& grp : groups) {
        const Candidate* best = &grp.front();
        for (const auto& c : grp)
          if (c.residual < best->residual) best = &c;
        ScanCluster cl;
        cl.angles = best->angles;
        cl.dir = best->dir;
        cl.residual = best->residual;
        cl.members = static_cast<int>(grp.size());
        rep.clusters.push_back(cl);
      }
    } else {
      for (const auto& c : cands) {
        ScanCluster cl;
        cl.angles = c.angles;
        cl.dir = c.dir;
        cl.residual = c.residual;
        cl.members = 1;
        rep.clusters.push_back(cl);
      }
    }

    switch (rep.clusters.size()) {
      case 0:
        rep.class_label = CxClass::empty;
        break;
      case 1:
        rep.class_label = CxClass::mono;
        break;
      case 2:
        rep.class_label = CxClass::bi;
        break;
      default:
        rep.class_label = CxClass::finite_k;
        break;
    }
  }

  SpanEstimate span = span_e(rep, tol);
  rep.span_dim = span.dim;
  rep.span_basis = span.basis;
  return rep;
}

SpanEstimate span_e(const ScanReport& report, const Tolerances& tol) {
  std::vector<Vec> rows;
  for (const auto& e : report.grid)
    if (e.accepted) rows.push_back(e.dir);
  for (const auto& c : report.clusters) rows.push_back(c.dir);
  SpanEstimate out;
  if (rows.empty()) {
    out.basis = Eigen::MatrixXd(0, report.at.size());
    return out;
  }
  Eigen::MatrixXd a(static_cast<int>(rows.size()), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) a.row(static_cast<int>(i)) = rows[i].transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol.span_singular_value) ++rank;
  out.dim = rank;
  out.basis = Eigen::MatrixXd(rank, rows[0].size());
  for (int i = 0; i < rank; ++i) {
    Eigen::VectorXd b = svd.matrixV().col(i);
    int imax = 0;
    b.cwiseAbs().maxCoeff(&imax);
    if (b(imax) < 0) b = -b;
    out.basis.row(i) = b.transpose();
  }
  return out;
}

TautologicalSample tautological_integrability_sample(const MetricField& m, const Vec& x,
                                                     const Vec& u, const ScanOptions& opt,
                                                     const Tolerances& tol) {
  TautologicalSample out;
  out.residual = direction_geodesy_residual(m, x, u, opt, tol);
  out.member = out.residual < tol.geodesy_certificate;
  return out;
}

}  // namespace lorentz
