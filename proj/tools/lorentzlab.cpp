#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorentz/detect.hpp"
#include "lorentz/geodesic.hpp"
#include "lorentz/killing.hpp"
#include "lorentz/metric.hpp"
#include "lorentz/models.hpp"
#include "lorentz/scan.hpp"
#include "lorentz/specfile.hpp"
#include "lorentz/version.hpp"

namespace {

using lorentz::ordered_json;
using lorentz::Vec;

int exit_code_for(lorentz::ErrorKind kind) {
  switch (kind) {
    case lorentz::ErrorKind::parse:
    case lorentz::ErrorKind::undeclared_symbol:
    case lorentz::ErrorKind::schema:
    case lorentz::ErrorKind::bad_argument:
    case lorentz::ErrorKind::io:
      return 2;
    default:
      return 3;
  }
}

ordered_json vec_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec point_or_center(const lorentz::MetricField& m, const std::vector<double>& point) {
  if (point.empty()) return 0.5 * (m.box_lo() + m.box_hi());
  if (static_cast<int>(point.size()) != m.dim())
    lorentz::fail(lorentz::ErrorKind::bad_argument,
                  "--point needs " + std::to_string(m.dim()) + " coordinates");
  Vec p(m.dim());
  for (int i = 0; i < m.dim(); ++i) p(i) = point[i];
  return p;
}

struct Invocation {
  std::string spec_path;
  std::string out_path;
  std::vector<double> point;
  std::vector<double> velocity;
  int resolution = 24;
  int samples = 200;
  int grid = 3;
  int trials = 64;
  double s_max = 1.0;
  double step = 0.0;
  unsigned long long seed = 20240823ull;
};

ordered_json run_curvature(const lorentz::LoadedSpec& spec, const Invocation& inv) {
  Vec p = point_or_center(spec.metric, inv.point);
  lorentz::CurvatureBundle cb = lorentz::curvature_at(spec.metric, p, spec.tol);
  lorentz::CurvatureSpreadReport sr =
      lorentz::constant_curvature_residual(spec.metric, p, inv.samples, inv.seed, spec.tol);

  const int n = spec.metric.dim();
  ordered_json riemann = ordered_json::array();
  for (int l = 0; l < n; ++l) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < n; ++i) {
      ordered_json b = ordered_json::array();
      for (int j = 0; j < n; ++j) {
        ordered_json c = ordered_json::array();
        for (int k = 0; k < n; ++k) c.push_back(cb.riem(l, i, j, k));
        b.push_back(c);
      }
      a.push_back(b);
    }
    riemann.push_back(a);
  }
  ordered_json ricci = ordered_json::array();
  for (int j = 0; j < n; ++j) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += cb.riem(i, i, j, k);
      row.push_back(s);
    }
    ricci.push_back(row);
  }

  ordered_json rep = lorentz::report_header(spec, "curvature", inv.seed);
  rep["parameters"] = {{"point", vec_json(p)}, {"samples", inv.samples}};
  rep["results"] = {{"riemann_up", riemann},
                    {"ricci", ricci},
                    {"riemann_max_abs", cb.riem.max_abs()},
                    {"k_mean", sr.k_mean},
                    {"k_spread", sr.spread},
                    {"planes_sampled", sr.samples}};
  return rep;
}

ordered_json run_scan(const lorentz::LoadedSpec& spec, const Invocation& inv) {
  Vec p = point_or_center(spec.metric, inv.point);
  lorentz::ScanReport sc = lorentz::scan_cx(spec.metric, p, inv.resolution, spec.tol);

  ordered_json clusters = ordered_json::array();
  for (const auto& c : sc.clusters)
    clusters.push_back({{"angles", vec_json(c.angles)},
                        {"direction", vec_json(c.dir)},
                        {"residual", c.residual},
                        {"members", c.members}});
  double best = -1.0;
  for (const auto& e : sc.grid) best = best < 0 ? e.residual : std::min(best, e.residual);
  ordered_json basis = ordered_json::array();
  for (int r = 0; r < sc.span_basis.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < sc.span_basis.cols(); ++c) row.push_back(sc.span_basis(r, c));
    basis.push_back(row);
  }

  ordered_json rep = lorentz::report_header(spec, "scan-cx", inv.seed);
  rep["parameters"] = {{"point", vec_json(p)}, {"resolution", sc.resolution}};
  rep["results"] = {{"class", lorentz::to_string(sc.class_label)},
                    {"accepted_fraction", sc.accepted_fraction},
                    {"best_residual", best},
                    {"certificate", sc.certificate},
                    {"clusters", clusters},
                    {"span_dim", sc.span_dim},
                    {"span_basis", basis}};
  return rep;
}

ordered_json run_killing(const lorentz::LoadedSpec& spec, const Invocation& inv) {
  if (spec.killing_basis.empty())
    lorentz::fail(lorentz::ErrorKind::bad_argument,
                  "spec declares no killing_basis for the search");
  std::vector<Vec> grid = lorentz::box_grid(spec.metric, inv.grid);
  lorentz::NullSearchReport nr = lorentz::lightlike_killing_search(
      spec.metric, spec.killing_basis, grid, inv.trials, inv.seed, spec.tol);

  ordered_json names = ordered_json::array();
  for (const auto& f : spec.killing_basis) names.push_back(f.name);
  ordered_json found = ordered_json::array();
  for (const auto& c : nr.found)
    found.push_back({{"coeffs", vec_json(c.coeffs)},
                     {"max_q", c.max_q},
                     {"min_norm", c.min_norm},
                     {"max_orbit_residual", c.max_orbit_residual}});

  ordered_json rep = lorentz::report_header(spec, "killing", inv.seed);
  rep["parameters"] = {{"grid", inv.grid}, {"trials", nr.trials}, {"basis", names}};
  rep["results"] = {{"grid_points", static_cast<int>(grid.size())},
                    {"found_count", static_cast<int>(nr.found.size())},
                    {"found", found}};
  return rep;
}

ordered_json run_warped(const lorentz::LoadedSpec& spec, const Invocation& inv, int* exit_code) {
  if (!spec.base_dim)
    lorentz::fail(lorentz::ErrorKind::bad_argument,
                  "spec declares no product split (base_dim or warped block)");
  lorentz::ProductChartSpec ps{spec.metric, *spec.base_dim};
  std::vector<lorentz::Immersion> hs;
  for (const auto& s : spec.submanifolds)
    if (s.param_dim() == spec.metric.dim() - 1) hs.push_back(s);
  lorentz::WarpedVerdict v = lorentz::warped_criterion(ps, hs, inv.grid, inv.seed, spec.tol);

  ordered_json rep = lorentz::report_header(spec, "warped", inv.seed);
  rep["parameters"] = {{"base_dim", *spec.base_dim},
                       {"grid", inv.grid},
                       {"hypersurfaces", static_cast<int>(hs.size())}};
  rep["results"] = {
      {"verdict", lorentz::to_string(v.verdict)},
      {"block_structure",
       {{"state", lorentz::to_string(v.block_structure)},
        {"off_block_max", v.off_block_max},
        {"fiber_conformal", v.fiber_conformal}}},
      {"base_geodesic",
       {{"state", lorentz::to_string(v.base_geodesic)}, {"residual", v.base_residual}}},
      {"fiber_umbilical",
       {{"state", lorentz::to_string(v.fiber_umbilical)}, {"residual", v.fiber_residual}}},
      {"holonomy_homothetic",
       {{"state", lorentz::to_string(v.holonomy_homothetic)},
        {"ratio", v.holonomy_ratio},
        {"variation", v.holonomy_variation}}},
      {"fiber_constant_curvature",
       {{"state", lorentz::to_string(v.fiber_constant_curvature)},
        {"k_mean", v.fiber_k_mean},
        {"spread", v.fiber_spread}}},
      {"hypersurfaces_geodesic",
       {{"state", lorentz::to_string(v.hypersurfaces_geodesic)},
        {"residual_max", v.hypersurface_residual_max},
        {"normal_rank", v.normal_rank}}}};
  if (v.verdict != lorentz::WarpedClass::warped) *exit_code = 1;
  return rep;
}

ordered_json run_geodesic(const lorentz::LoadedSpec& spec, const Invocation& inv) {
  Vec x0 = point_or_center(spec.metric, inv.point);
  if (static_cast<int>(inv.velocity.size()) != spec.metric.dim())
    lorentz::fail(lorentz::ErrorKind::bad_argument,
                  "--velocity needs " + std::to_string(spec.metric.dim()) + " components");
  Vec v0(spec.metric.dim());
  for (int i = 0; i < spec.metric.dim(); ++i) v0(i) = inv.velocity[i];

  lorentz::IntegrateOptions opt;
  opt.step = inv.step;
  std::vector<lorentz::GeodesicState> states =
      lorentz::integrate_geodesic(spec.metric, x0, v0, inv.s_max, opt, spec.tol);
  double drift = lorentz::energy_drift(spec.metric, states, spec.tol);

  size_t stride = states.size() > 65 ? (states.size() - 1 + 63) / 64 : 1;
  ordered_json track = ordered_json::array();
  for (size_t i = 0; i < states.size(); i += stride) {
    const auto& st = states[i];
    track.push_back({{"s", st.s}, {"x", vec_json(st.x)}, {"v", vec_json(st.v)}});
  }
  if ((states.size() - 1) % stride != 0) {
    const auto& st = states.back();
    track.push_back({{"s", st.s}, {"x", vec_json(st.x)}, {"v", vec_json(st.v)}});
  }

  ordered_json rep = lorentz::report_header(spec, "geodesic", inv.seed);
  rep["parameters"] = {
      {"x0", vec_json(x0)}, {"v0", vec_json(v0)}, {"s_max", inv.s_max}, {"step", inv.step}};
  rep["results"] = {{"steps", static_cast<int>(states.size()) - 1},
                    {"endpoint_x", vec_json(states.back().x)},
                    {"endpoint_v", vec_json(states.back().v)},
                    {"energy_drift", drift},
                    {"track", track}};
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chart-based Lorentzian geometry analyses"};
  app.set_version_flag("--version", lorentz::kVersion);
  app.require_subcommand(1);

  Invocation inv;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", inv.spec_path, "manifold spec file (JSON)")->required();
    cmd->add_option("--out", inv.out_path, "report output path (JSON)")->required();
    cmd->add_option("--seed", inv.seed, "random seed recorded in the report");
  };

  CLI::App* curvature = app.add_subcommand("curvature", "curvature tensors and sectional spread");
  add_common(curvature);
  curvature->add_option("--point", inv.point, "chart point (default: box center)");
  curvature->add_option("--samples", inv.samples, "random planes for the spread");

  CLI::App* scan = app.add_subcommand("scan-cx", "scan isotropic directions for geodesic hypersurfaces");
  add_common(scan);
  scan->add_option("--point", inv.point, "chart point (default: box center)");
  scan->add_option("--resolution", inv.resolution, "grid nodes on the direction sphere");

  CLI::App* killing = app.add_subcommand("killing", "search the Killing basis for lightlike fields");
  add_common(killing);
  killing->add_option("--grid", inv.grid, "evaluation lattice points per axis");
  killing->add_option("--trials", inv.trials, "multistart attempts");

  CLI::App* warped = app.add_subcommand("warped", "warped-product criterion on a product chart");
  add_common(warped);
  warped->add_option("--grid", inv.grid, "evaluation lattice points per axis");

  CLI::App* geodesic = app.add_subcommand("geodesic", "integrate one geodesic");
  add_common(geodesic);
  geodesic->add_option("--point", inv.point, "initial chart point (default: box center)");
  geodesic->add_option("--velocity", inv.velocity, "initial velocity")->required();
  geodesic->add_option("--smax", inv.s_max, "arc-length to integrate");
  geodesic->add_option("--step", inv.step, "RK4 step (default: smax/1000)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  auto started = std::chrono::steady_clock::now();
  int exit_code = 0;
  try {
    lorentz::LoadedSpec spec = lorentz::load_spec_file(inv.spec_path);
    ordered_json rep;
    if (curvature->parsed()) rep = run_curvature(spec, inv);
    else if (scan->parsed()) rep = run_scan(spec, inv);
    else if (killing->parsed()) rep = run_killing(spec, inv);
    else if (warped->parsed()) rep = run_warped(spec, inv, &exit_code);
    else rep = run_geodesic(spec, inv);
    lorentz::write_report(inv.out_path, rep);
  } catch (const lorentz::Error& e) {
    std::fprintf(stderr, "lorentzlab: error: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lorentzlab: error: %s\n", e.what());
    return 3;
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::fprintf(stderr, "lorentzlab: %s in %.3f s\n",
               app.get_subcommands().front()->get_name().c_str(), wall);
  return exit_code;
}
