#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lorentz/metric.hpp"
#include "lorentz/models.hpp"

using lorentz::Expr;
using lorentz::MetricField;
using lorentz::Vec;

namespace {

Vec pt3(double a, double b, double c) {
  Vec p(3);
  p << a, b, c;
  return p;
}

}  // namespace

TEST_CASE("constructors declare the advertised charts") {
  MetricField mink = lorentz::minkowski(4);
  CHECK(mink.coords() == std::vector<std::string>{"t", "x1", "x2", "x3"});
  CHECK(mink.signature() == std::vector<int>{-1, 1, 1, 1});

  MetricField ds = lorentz::de_sitter(3, 1.0);
  CHECK(ds.coords() == std::vector<std::string>{"eta", "x1", "x2"});
  CHECK(ds.box_lo()(0) == doctest::Approx(0.5));

  MetricField hyp = lorentz::hyperbolic(2, 1.0);
  CHECK(hyp.coords() == std::vector<std::string>{"x1", "y"});
  CHECK(hyp.signature() == std::vector<int>{1, 1});

  MetricField berger = lorentz::berger_sl2(2.0);
  CHECK(berger.coords() == std::vector<std::string>{"h", "u", "v"});
  CHECK(berger.name() == "berger_sl2");
  CHECK(lorentz::berger_sl2(1.0).name() == "sl2_killing_form");

  for (int n : {2, 3, 4}) lorentz::validate_metric(lorentz::minkowski(n));
  lorentz::validate_metric(ds);
  lorentz::validate_metric(hyp);
  lorentz::validate_metric(berger);
  lorentz::validate_metric(lorentz::anti_de_sitter(3, 1.0));
  lorentz::validate_metric(lorentz::anti_de_sitter(4, 1.0));
  lorentz::validate_metric(lorentz::euclidean(1));
}

TEST_CASE("berger components follow the left-invariant coframe") {
  double eps = 2.0;
  MetricField m = lorentz::berger_sl2(eps);
  Vec p = pt3(0.3, -0.2, 0.4);
  double a = std::exp(-2.0 * p(0));
  lorentz::MetricValue mv = lorentz::metric_at(m, p);
  CHECK(mv.g(0, 0) == doctest::Approx(eps).epsilon(1e-14));
  CHECK(mv.g(0, 1) == doctest::Approx((eps - 1.0) * a * p(2)).epsilon(1e-14));
  CHECK(mv.g(0, 2) == doctest::Approx(0.0).scale(1.0));
  CHECK(mv.g(1, 1) == doctest::Approx((eps - 1.0) * a * a * p(2) * p(2)).epsilon(1e-14));
  CHECK(mv.g(1, 2) == doctest::Approx(0.5 * a).epsilon(1e-14));
  CHECK(mv.g(2, 2) == doctest::Approx(0.0).scale(1.0));
  CHECK(mv.g.determinant() == doctest::Approx(-eps * a * a / 4.0).epsilon(1e-12));
}

TEST_CASE("model curvatures scale with the radius") {
  lorentz::CurvatureSpreadReport ads =
      lorentz::constant_curvature_residual(lorentz::anti_de_sitter(3, 2.0), pt3(0.1, 0.2, -0.1), 80);
  CHECK(ads.k_mean == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(ads.spread < 1e-9);

  Vec p4(4);
  p4 << 0.2, -0.3, 0.1, 1.0;
  lorentz::CurvatureSpreadReport adsp =
      lorentz::constant_curvature_residual(lorentz::anti_de_sitter(4, 1.0), p4, 80);
  CHECK(adsp.k_mean == doctest::Approx(-1.0).epsilon(1e-9));

  lorentz::CurvatureSpreadReport hyp =
      lorentz::constant_curvature_residual(lorentz::hyperbolic(3, 2.0), pt3(0.3, 0.1, 1.2), 80);
  CHECK(hyp.k_mean == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("ads3 is the conformally scaled group chart") {
  MetricField unit = lorentz::anti_de_sitter(3, 1.0);
  MetricField scaled = lorentz::anti_de_sitter(3, 2.0);
  Vec p = pt3(0.2, 0.3, -0.4);
  lorentz::MetricValue a = lorentz::metric_at(unit, p);
  lorentz::MetricValue b = lorentz::metric_at(scaled, p);
  CHECK((b.g - 4.0 * a.g).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sl2 chart embeds into unimodular matrices") {
  Vec p = pt3(0.4, -0.7, 0.3);
  Eigen::Matrix2d g = lorentz::sl2_from_chart(p);
  CHECK(g.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  Vec back = lorentz::sl2_to_chart(g);
  CHECK((back - p).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::Matrix2d bad;
  bad << 1.0, 0.0, 0.0, 2.0;  // det 2
  CHECK_THROWS_AS((void)lorentz::sl2_to_chart(bad), lorentz::Error);
}

TEST_CASE("warped products assemble h + w * g") {
  MetricField base("line", {"t"}, {1}, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  base.set_component(0, 0, Expr::constant(1.0));
  lorentz::WarpedSpec spec{"wexp", base, lorentz::minkowski(2),
                           lorentz::exp(Expr::constant(2.0) * Expr::coord(0))};
  MetricField m = lorentz::warped(spec);
  CHECK(m.coords() == std::vector<std::string>{"t", "t_f", "x1"});
  CHECK(m.signature() == std::vector<int>{1, -1, 1});

  Vec p = pt3(0.25, 0.4, -0.3);
  lorentz::MetricValue mv = lorentz::metric_at(m, p);
  double w = std::exp(0.5);
  CHECK(mv.g(0, 0) == doctest::Approx(1.0));
  CHECK(mv.g(1, 1) == doctest::Approx(-w).epsilon(1e-14));
  CHECK(mv.g(2, 2) == doctest::Approx(w).epsilon(1e-14));
  CHECK(std::abs(mv.g(0, 1)) + std::abs(mv.g(0, 2)) + std::abs(mv.g(1, 2)) == 0.0);
}

TEST_CASE("warped validation rejects bad factor data") {
  MetricField rbase("line", {"t"}, {1}, Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  rbase.set_component(0, 0, Expr::constant(1.0));

  // warp that dips negative on the box
  lorentz::WarpedSpec neg{"bad", rbase, lorentz::minkowski(2), Expr::coord(0)};
  CHECK_THROWS_AS((void)lorentz::warped(neg), lorentz::Error);

  // Lorentzian base is not allowed
  lorentz::WarpedSpec lbase{"bad2", lorentz::minkowski(2), lorentz::minkowski(2),
                            Expr::constant(1.0)};
  CHECK_THROWS_AS((void)lorentz::warped(lbase), lorentz::Error);

  // Riemannian fiber is not allowed
  lorentz::WarpedSpec rfiber{"bad3", rbase, lorentz::euclidean(2), Expr::constant(1.0)};
  CHECK_THROWS_AS((void)lorentz::warped(rfiber), lorentz::Error);
}

TEST_CASE("dimension guards") {
  CHECK_THROWS_AS((void)lorentz::minkowski(1), lorentz::Error);
  CHECK_THROWS_AS((void)lorentz::minkowski(9), lorentz::Error);
  CHECK_THROWS_AS((void)lorentz::de_sitter(3, 0.0), lorentz::Error);
  CHECK_THROWS_AS((void)lorentz::berger_sl2(0.0), lorentz::Error);
}
