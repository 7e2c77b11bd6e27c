// Acceptance gate for the shipped analyses. Each criterion prints one
// PASS/FAIL line with the measured numbers; the thresholds are pinned in the
// criterion bodies and are not configurable.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lorentz/detect.hpp"
#include "lorentz/geodesic.hpp"
#include "lorentz/killing.hpp"
#include "lorentz/metric.hpp"
#include "lorentz/models.hpp"
#include "lorentz/scan.hpp"
#include "lorentz/specfile.hpp"
#include "lorentz/submanifold.hpp"
#include "oracles.hpp"

using lorentz::Expr;
using lorentz::Immersion;
using lorentz::LoadedSpec;
using lorentz::MetricField;
using lorentz::Vec;

namespace {

int failures = 0;

void report(int idx, const char* title, bool ok, const std::string& detail) {
  std::printf("%s criterion-%d %s: %s\n", ok ? "PASS" : "FAIL", idx, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename Body>
void run(int idx, const char* title, Body body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("unexpected exception: ") + e.what();
  }
  report(idx, title, ok, detail);
}

std::string specs_dir() {
  const char* dir = std::getenv("LORENTZLAB_SPECS");
  if (dir == nullptr || *dir == '\0')
    lorentz::fail(lorentz::ErrorKind::io, "LORENTZLAB_SPECS is not set");
  return dir;
}

LoadedSpec load_named(const std::string& name) {
  return lorentz::load_spec_file(specs_dir() + "/" + name + ".json");
}

std::vector<Vec> middle_points(const MetricField& m, int count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frac(0.25, 0.75);
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) {
    Vec p(m.dim());
    for (int i = 0; i < m.dim(); ++i)
      p(i) = m.box_lo()(i) + frac(rng) * (m.box_hi()(i) - m.box_lo()(i));
    out.push_back(p);
  }
  return out;
}

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Model charts with constant sectional curvature, checked against the sphere
// normalization: k = +1/r^2 on de Sitter, -1/r^2 on anti-de Sitter.
bool tensor_core(std::string& detail) {
  constexpr double kFlatMax = 1e-9;
  constexpr double kSpreadMax = 1e-6;
  constexpr double kOracleMax = 1e-4;

  MetricField mink = lorentz::minkowski(3);
  double flat = 0.0;
  for (const Vec& p : middle_points(mink, 4, 11))
    flat = std::max(flat, lorentz::curvature_at(mink, p).riem.max_abs());

  struct Model {
    MetricField m;
    double k;
  };
  std::vector<Model> models;
  for (double r : {1.0, 2.0}) {
    models.push_back({lorentz::de_sitter(3, r), 1.0 / (r * r)});
    models.push_back({lorentz::anti_de_sitter(3, r), -1.0 / (r * r)});
  }

  double mean_err = 0.0, spread = 0.0, oracle_gap = 0.0;
  for (const Model& md : models) {
    std::vector<Vec> pts = middle_points(md.m, 10, 23);
    for (const Vec& p : pts) {
      lorentz::CurvatureSpreadReport sr =
          lorentz::constant_curvature_residual(md.m, p, 200, 20240823ull);
      mean_err = std::max(mean_err, std::abs(sr.k_mean - md.k));
      spread = std::max(spread, sr.spread);
    }
    // Cross-check the jet curvature against plain finite differences.
    for (int t = 0; t < 2; ++t) {
      lorentz::CurvatureBundle cb = lorentz::curvature_at(md.m, pts[t]);
      lorentz::Tensor4 fd;
      oracles::fd_riemann(md.m, pts[t], fd);
      const int n = md.m.dim();
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              oracle_gap = std::max(oracle_gap, std::abs(cb.riem(l, i, j, k) - fd(l, i, j, k)));
    }
  }

  std::ostringstream os;
  os << "flat " << flat << ", k err " << mean_err << ", spread " << spread << ", fd gap "
     << oracle_gap;
  detail = os.str();
  return flat < kFlatMax && mean_err < kSpreadMax && spread < kSpreadMax &&
         oracle_gap < kOracleMax;
}

bool scan_classes(std::string& detail) {
  struct Row {
    const char* name;
    MetricField m;
  };
  std::vector<Row> cones;
  cones.push_back({"minkowski3", lorentz::minkowski(3)});
  cones.push_back({"de_sitter3", lorentz::de_sitter(3, 1.0)});
  cones.push_back({"anti_de_sitter3", lorentz::anti_de_sitter(3, 1.0)});

  int cone_hits = 0;
  std::ostringstream os;
  for (const Row& row : cones)
    for (const Vec& p : middle_points(row.m, 5, 37)) {
      lorentz::ScanReport sc = lorentz::scan_cx(row.m, p, 24);
      if (sc.class_label == lorentz::CxClass::cone && sc.span_dim == 3)
        ++cone_hits;
      else
        os << row.name << " gave " << lorentz::to_string(sc.class_label) << "/span "
           << sc.span_dim << "; ";
    }

  MetricField berger = lorentz::berger_sl2(2.0);
  int bi_hits = 0;
  for (const Vec& p : middle_points(berger, 5, 41)) {
    lorentz::ScanReport sc = lorentz::scan_cx(berger, p, 24);
    if (sc.class_label == lorentz::CxClass::bi && sc.clusters.size() == 2)
      ++bi_hits;
    else
      os << "berger gave " << lorentz::to_string(sc.class_label) << "/" << sc.clusters.size()
         << " clusters; ";
  }

  os << "cone " << cone_hits << "/15, berger bi " << bi_hits << "/5";
  detail = os.str();
  return cone_hits == 15 && bi_hits == 5;
}

Immersion null_surface(int fd) {
  if (fd == 2)
    return lorentz::make_immersion("null_line", {"s"}, {Expr::coord(0), Expr::coord(0)},
                                   Vec::Constant(1, -1.2), Vec::Constant(1, 1.2));
  const double th = 0.3;
  std::vector<Expr> map = {
      Expr::coord(0),
      Expr::constant(std::cos(th)) * Expr::coord(0) - Expr::constant(std::sin(th)) * Expr::coord(1),
      Expr::constant(std::sin(th)) * Expr::coord(0) + Expr::constant(std::cos(th)) * Expr::coord(1)};
  return lorentz::make_immersion("null_plane", {"s", "tau"}, map, Vec::Constant(2, -1.2),
                                 Vec::Constant(2, 1.2));
}

Immersion slice_surface(int fd) {
  std::vector<std::string> params;
  std::vector<Expr> map = {Expr::constant(0.3)};
  for (int i = 1; i < fd; ++i) {
    params.push_back("p" + std::to_string(i));
    map.push_back(Expr::coord(i - 1));
  }
  return lorentz::make_immersion("slice", params, map, Vec::Constant(fd - 1, -1.2),
                                 Vec::Constant(fd - 1, 1.2));
}

Immersion wavy_surface(int fd) {
  std::vector<std::string> params;
  std::vector<Expr> map = {Expr::constant(0.1) *
                           lorentz::sin(Expr::coord(0) + Expr::constant(0.7))};
  for (int i = 1; i < fd; ++i) {
    params.push_back("s" + std::to_string(i));
    map.push_back(Expr::coord(i - 1));
  }
  return lorentz::make_immersion("wavy", params, map, Vec::Constant(fd - 1, -1.2),
                                 Vec::Constant(fd - 1, 1.2));
}

// -1 means neither geodesic nor visibly curved, which fails the criterion.
int geodesy_class(double residual) {
  if (residual < 1e-7) return 0;
  if (residual > 1e-4) return 1;
  return -1;
}

// A fiber surface is geodesic in the fiber exactly when its base-saturated
// lift is geodesic in the product; both sides must land in the same class.
bool geodesic_transfer(std::string& detail) {
  const char* names[] = {"warped_exp", "warped_poly", "warped_hyp"};
  int definite = 0, agree = 0;
  std::ostringstream os;
  for (const char* nm : names) {
    LoadedSpec spec = load_named(nm);
    const lorentz::WarpedSpec& w = *spec.warped;
    lorentz::ProductChartSpec ps{spec.metric, *spec.base_dim};
    const int fd = w.fiber.dim();
    const int bd = *spec.base_dim;

    struct Surf {
      Immersion im;
      Vec u;
    };
    std::vector<Surf> surfs;
    surfs.push_back({null_surface(fd), fd == 2 ? vec1(0.25) : vec2(0.15, -0.2)});
    surfs.push_back({slice_surface(fd), fd == 2 ? vec1(0.2) : vec2(0.2, -0.3)});
    surfs.push_back({wavy_surface(fd), fd == 2 ? vec1(0.6) : vec2(0.6, 0.4)});

    Vec base_at(bd);
    for (int i = 0; i < bd; ++i)
      base_at(i) = spec.metric.box_center()(i) +
                   0.05 * (spec.metric.box_hi()(i) - spec.metric.box_lo()(i));

    for (const Surf& s : surfs) {
      double in_fiber = lorentz::geodesy_residual(w.fiber, s.im, s.u);
      Immersion lifted = lorentz::lift_to_product(ps, s.im);
      Vec full(bd + s.u.size());
      full.head(bd) = base_at;
      full.tail(s.u.size()) = s.u;
      double in_product = lorentz::geodesy_residual(spec.metric, lifted, full);

      int cf = geodesy_class(in_fiber), cp = geodesy_class(in_product);
      if (cf >= 0) ++definite;
      if (cp >= 0) ++definite;
      if (cf >= 0 && cf == cp)
        ++agree;
      else
        os << nm << "/" << s.im.name << " (" << in_fiber << " vs " << in_product << "); ";
    }
  }
  os << "definite " << definite << "/18, agreeing pairs " << agree << "/9";
  detail = os.str();
  return definite == 18 && agree == 9;
}

bool warped_gate(std::string& detail) {
  constexpr double kVarWarped = 1e-8;
  constexpr double kVarCounter = 1e-3;
  struct Row {
    const char* name;
    bool warped;
  };
  const Row rows[] = {{"warped_exp", true},   {"warped_poly", true},  {"warped_hyp", true},
                      {"notwarped_a", false}, {"notwarped_b", false}, {"notwarped_c", false}};

  int good = 0;
  double var_warped = 0.0, var_counter = 1e300;
  std::ostringstream os;
  for (const Row& r : rows) {
    LoadedSpec spec = load_named(r.name);
    lorentz::ProductChartSpec ps{spec.metric, *spec.base_dim};
    std::vector<Immersion> hs;
    for (const Immersion& s : spec.submanifolds)
      if (s.param_dim() == spec.metric.dim() - 1) hs.push_back(s);
    lorentz::WarpedVerdict v = lorentz::warped_criterion(ps, hs, 3, 20240823ull, spec.tol);

    bool hit;
    if (r.warped) {
      var_warped = std::max(var_warped, v.holonomy_variation);
      hit = v.verdict == lorentz::WarpedClass::warped && v.holonomy_variation < kVarWarped;
    } else {
      var_counter = std::min(var_counter, v.holonomy_variation);
      hit = v.verdict == lorentz::WarpedClass::not_warped && v.holonomy_variation > kVarCounter;
    }
    if (hit)
      ++good;
    else
      os << r.name << " verdict " << lorentz::to_string(v.verdict) << " var "
         << v.holonomy_variation << "; ";
  }
  os << "verdicts " << good << "/6, warped var " << var_warped << ", counter var "
     << var_counter;
  detail = os.str();
  return good == 6;
}

bool killing_search(std::string& detail) {
  constexpr double kOrbitMax = 1e-8;
  constexpr double kNormMin = 1e-6;
  constexpr double kConeGap = 1e-5;
  const unsigned long long seed = 20240823ull;

  MetricField mink = lorentz::minkowski(3);
  lorentz::NullSearchReport mr = lorentz::lightlike_killing_search(
      mink, lorentz::minkowski_translations(3), lorentz::box_grid(mink, 3), 48, seed);
  double orbit = 0.0, norm = 1e300, cone = 0.0;
  for (const lorentz::NullFieldCandidate& c : mr.found) {
    orbit = std::max(orbit, c.max_orbit_residual);
    norm = std::min(norm, c.min_norm);
    // Constant-coefficient null combinations sit on the coefficient cone.
    cone = std::max(cone,
                    std::abs(c.coeffs(0) * c.coeffs(0) - c.coeffs.segment(1, 2).squaredNorm()));
  }
  bool mink_ok = !mr.found.empty() && orbit < kOrbitMax && norm > kNormMin && cone < kConeGap;

  MetricField ds = lorentz::de_sitter(3, 1.0);
  lorentz::NullSearchReport dr = lorentz::lightlike_killing_search(
      ds, lorentz::de_sitter3_killing(), lorentz::box_grid(ds, 3), 48, seed);

  MetricField ads = lorentz::anti_de_sitter(3, 1.0);
  lorentz::NullSearchReport ar = lorentz::lightlike_killing_search(
      ads, lorentz::sl2_killing(false), lorentz::box_grid(ads, 3), 48, seed);

  std::ostringstream os;
  os << "minkowski " << mr.found.size() << " found (orbit " << orbit << ", cone gap " << cone
     << "), de_sitter " << dr.found.size() << ", anti_de_sitter " << ar.found.size();
  detail = os.str();
  return mink_ok && dr.found.empty() && !ar.found.empty();
}

bool isometry_extension(std::string& detail) {
  constexpr double kIsoMax = 1e-9;
  constexpr double kNonIsoMin = 0.1;
  bool ok = true;
  std::ostringstream os;
  for (const char* nm : {"warped_exp", "warped_poly", "warped_hyp"}) {
    LoadedSpec spec = load_named(nm);
    const lorentz::WarpedSpec& w = *spec.warped;
    const int fd = w.fiber.dim();
    std::vector<Vec> grid = lorentz::box_grid(spec.metric, 2);

    const double a = 0.4, ch = std::cosh(a), sh = std::sinh(a);
    std::vector<Expr> boost = {
        Expr::constant(ch) * Expr::coord(0) + Expr::constant(sh) * Expr::coord(1),
        Expr::constant(sh) * Expr::coord(0) + Expr::constant(ch) * Expr::coord(1)};
    for (int i = 2; i < fd; ++i) boost.push_back(Expr::coord(i));
    double iso = lorentz::extend_isometry_pullback_residual(w, boost, grid);

    std::vector<Expr> dilation;
    for (int i = 0; i < fd; ++i) dilation.push_back(Expr::constant(1.3) * Expr::coord(i));
    double non = lorentz::extend_isometry_pullback_residual(w, dilation, grid);

    if (!(iso < kIsoMax && non > kNonIsoMin)) ok = false;
    os << nm << " (" << iso << ", " << non << ") ";
  }
  detail = os.str();
  return ok;
}

bool numerics(std::string& detail) {
  constexpr double kJetRel = 1e-6;
  constexpr double kDriftMax = 1e-8;

  oracles::RandomExpr gen(2024, 3);
  double jet_gap = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Expr e = gen.draw();
    Vec p = gen.draw_point();
    lorentz::Jet2 j = lorentz::eval_jet2(e, p);
    Vec fg = oracles::fd_gradient(e, p);
    double gscale = std::max(1.0, fg.cwiseAbs().maxCoeff());
    jet_gap = std::max(jet_gap, (j.g - fg).cwiseAbs().maxCoeff() / gscale);
    lorentz::Mat fh = oracles::fd_hessian(e, p);
    double hscale = std::max(1.0, fh.cwiseAbs().maxCoeff());
    jet_gap = std::max(jet_gap, (j.h - fh).cwiseAbs().maxCoeff() / hscale);
  }

  MetricField sph = oracles::sphere_chart();
  Vec x0 = vec2(1.1, 0.2), v0 = vec2(0.35, 0.3);
  Vec exact = oracles::sphere_geodesic_endpoint(x0, v0, 1.0);
  auto endpoint_err = [&](int steps) {
    lorentz::IntegrateOptions opt;
    opt.step = 1.0 / steps;
    std::vector<lorentz::GeodesicState> states =
        lorentz::integrate_geodesic(sph, x0, v0, 1.0, opt);
    return (states.back().x - exact).norm();
  };
  double ratio = endpoint_err(40) / endpoint_err(80);

  MetricField ds = lorentz::de_sitter(3, 1.0);
  Vec v(3);
  v << 0.3, 0.2, 0.1;
  std::vector<lorentz::GeodesicState> states =
      lorentz::integrate_geodesic(ds, ds.box_center(), v, 1.0);
  double drift = lorentz::energy_drift(ds, states);

  std::ostringstream os;
  os << "jet gap " << jet_gap << ", rk4 halving ratio " << ratio << ", drift " << drift;
  detail = os.str();
  return jet_gap < kJetRel && ratio > 12.0 && ratio < 20.0 && drift < kDriftMax;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool determinism(std::string& detail) {
  const char* bin = std::getenv("LORENTZLAB_BIN");
  if (bin == nullptr || *bin == '\0') {
    detail = "LORENTZLAB_BIN is not set";
    return false;
  }
  std::string specs = specs_dir();

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lorentzlab-acceptance";
  fs::create_directories(dir);

  struct Cmd {
    const char* label;
    const char* sub;
    const char* spec;
    const char* extra;
  };
  const Cmd cmds[] = {
      {"curvature", "curvature", "minkowski3", "--samples 120"},
      {"scan", "scan-cx", "berger2", "--resolution 16"},
      {"killing", "killing", "minkowski3", "--grid 3 --trials 24"},
      {"warped", "warped", "warped_exp", "--grid 3"},
      {"geodesic", "geodesic", "de_sitter3", "--velocity 0.3 0.2 0.0 --smax 1.0"},
  };

  int identical = 0;
  std::ostringstream os;
  for (const Cmd& c : cmds) {
    std::string bytes[2];
    bool ran = true;
    for (int r = 0; r < 2 && ran; ++r) {
      fs::path out = dir / (std::string(c.label) + "_" + std::to_string(r) + ".json");
      std::ostringstream cmd;
      cmd << '"' << bin << "\" " << c.sub << " --spec \"" << specs << "/" << c.spec
          << ".json\" --out \"" << out.string() << "\" --seed 97531 " << c.extra
          << " 2>/dev/null";
      int rc = std::system(cmd.str().c_str());
      if (rc != 0) {
        ran = false;
        os << c.label << " exited " << rc << "; ";
      } else {
        bytes[r] = slurp(out);
      }
    }
    if (ran && !bytes[0].empty() && bytes[0] == bytes[1])
      ++identical;
    else if (ran)
      os << c.label << " reruns differ; ";
  }
  fs::remove_all(dir);

  os << identical << "/5 commands byte-identical on rerun";
  detail = os.str();
  return identical == 5;
}

}  // namespace

int main() {
  run(1, "tensor core", tensor_core);
  run(2, "isotropic scan classes", scan_classes);
  run(3, "geodesic transfer", geodesic_transfer);
  run(4, "warped criterion", warped_gate);
  run(5, "lightlike Killing search", killing_search);
  run(6, "isometry extension", isometry_extension);
  run(7, "numerics hygiene", numerics);
  run(8, "CLI determinism", determinism);
  return failures == 0 ? 0 : 1;
}
