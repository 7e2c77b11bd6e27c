#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lorentz/killing.hpp"
#include "lorentz/models.hpp"

using lorentz::Expr;
using lorentz::MetricField;
using lorentz::Vec;
using lorentz::VectorField;

namespace {

Vec pt3(double a, double b, double c) {
  Vec p(3);
  p << a, b, c;
  return p;
}

}  // namespace

TEST_CASE("killing residuals of symmetry fields vanish") {
  MetricField m = lorentz::minkowski(3);
  Vec p = pt3(0.4, -0.2, 0.7);
  for (const auto& f : lorentz::minkowski_killing(3))
    CHECK(lorentz::killing_residual(m, f, p) == 0.0);

  // t d_t is not Killing and its residual is the derivative it fails to kill
  VectorField stretch{"tdt", {Expr::coord(0), Expr::constant(0.0), Expr::constant(0.0)}};
  CHECK(lorentz::killing_residual(m, stretch, p) == doctest::Approx(2.0));
}

TEST_CASE("curved model bases are killing on the grid") {
  MetricField ds = lorentz::de_sitter(3, 1.0);
  for (const auto& f : lorentz::de_sitter3_killing())
    for (const auto& p : lorentz::box_grid(ds, 3))
      CHECK(lorentz::killing_residual(ds, f, p) < 1e-11);

  MetricField ads = lorentz::anti_de_sitter(3, 1.0);
  for (const auto& f : lorentz::sl2_killing(false))
    for (const auto& p : lorentz::box_grid(ads, 3))
      CHECK(lorentz::killing_residual(ads, f, p) < 1e-11);

  // the deformation breaks the left translations but keeps the rest
  MetricField berger = lorentz::berger_sl2(2.0);
  for (const auto& f : lorentz::sl2_killing(true))
    for (const auto& p : lorentz::box_grid(berger, 3))
      CHECK(lorentz::killing_residual(berger, f, p) < 1e-11);
  VectorField e_left{"E_l",
                     {-Expr::coord(2), lorentz::exp(Expr::constant(2.0) * Expr::coord(0)),
                      -lorentz::pow(Expr::coord(2), 2)}};
  CHECK(lorentz::killing_residual(berger, e_left, pt3(0.2, 0.1, -0.3)) > 0.1);
}

TEST_CASE("lightlike check measures the normalized quadratic") {
  MetricField m = lorentz::minkowski(3);
  VectorField null_comb{"n", {Expr::constant(1.0), Expr::constant(1.0), Expr::constant(0.0)}};
  lorentz::LightlikeCheck lc = lorentz::lightlike_check(m, null_comb, lorentz::box_grid(m, 3));
  CHECK(lc.lightlike_everywhere);
  CHECK(lc.max_q == 0.0);

  VectorField timelike{"t", {Expr::constant(1.0), Expr::constant(0.0), Expr::constant(0.0)}};
  lorentz::LightlikeCheck tc = lorentz::lightlike_check(m, timelike, lorentz::box_grid(m, 3));
  CHECK_FALSE(tc.lightlike_everywhere);
  CHECK(tc.max_q == doctest::Approx(0.5));  // |g(V,V)| / (1 + |V|^2)
}

TEST_CASE("orbit residuals detect non-geodesic flows") {
  MetricField m = lorentz::minkowski(3);
  VectorField trans{"p", {Expr::constant(1.0), Expr::constant(1.0), Expr::constant(0.0)}};
  CHECK(lorentz::geodesic_orbit_residual(m, trans, pt3(0.3, 0.1, 0.0)) == 0.0);

  VectorField rot{"rot", {Expr::constant(0.0), -Expr::coord(2), Expr::coord(1)}};
  CHECK(lorentz::geodesic_orbit_residual(m, rot, pt3(0.0, 1.0, 0.0)) == doctest::Approx(1.0));

  VectorField zero{"z", {Expr::constant(0.0), Expr::constant(0.0), Expr::constant(0.0)}};
  CHECK_THROWS_AS((void)lorentz::geodesic_orbit_residual(m, zero, pt3(0, 0, 0)), lorentz::Error);
}

TEST_CASE("combine forms constant coefficient combinations") {
  auto basis = lorentz::minkowski_translations(3);
  Vec c(3);
  c << 1.0, -2.0, 0.5;
  VectorField v = lorentz::combine(basis, c);
  Vec val = lorentz::field_at(v, pt3(0.3, 0.4, 0.5));
  CHECK(val(0) == doctest::Approx(1.0));
  CHECK(val(1) == doctest::Approx(-2.0));
  CHECK(val(2) == doctest::Approx(0.5));
}

TEST_CASE("null search over minkowski translations finds the light cone") {
  MetricField m = lorentz::minkowski(3);
  auto grid = lorentz::box_grid(m, 3);
  lorentz::NullSearchReport rep =
      lorentz::lightlike_killing_search(m, lorentz::minkowski_translations(3), grid, 48);
  REQUIRE_FALSE(rep.found.empty());
  for (const auto& c : rep.found) {
    CHECK(c.max_q < 1e-6);
    CHECK(c.min_norm > 1e-6);
    CHECK(c.max_orbit_residual < 1e-8);
    // coefficients sit on the coefficient-space light cone
    double lhs = c.coeffs(0) * c.coeffs(0);
    double rhs = c.coeffs(1) * c.coeffs(1) + c.coeffs(2) * c.coeffs(2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5).scale(1.0));
  }
  // sorted by certificate quality
  for (size_t i = 1; i < rep.found.size(); ++i)
    CHECK(rep.found[i - 1].max_q <= rep.found[i].max_q);
}

TEST_CASE("de sitter has no lightlike killing combination") {
  MetricField m = lorentz::de_sitter(3, 1.0);
  lorentz::NullSearchReport rep = lorentz::lightlike_killing_search(
      m, lorentz::de_sitter3_killing(), lorentz::box_grid(m, 3), 48);
  CHECK(rep.found.empty());
}

TEST_CASE("anti de sitter has lightlike killing fields") {
  MetricField m = lorentz::anti_de_sitter(3, 1.0);
  lorentz::NullSearchReport rep = lorentz::lightlike_killing_search(
      m, lorentz::sl2_killing(false), lorentz::box_grid(m, 3), 48);
  REQUIRE_FALSE(rep.found.empty());
  for (const auto& c : rep.found) {
    CHECK(c.max_q < 1e-6);
    CHECK(c.min_norm > 1e-6);
  }
}

TEST_CASE("search demands a killing basis") {
  MetricField m = lorentz::minkowski(3);
  std::vector<VectorField> bad{{"tdt", {Expr::coord(0), Expr::constant(0.0), Expr::constant(0.0)}}};
  CHECK_THROWS_AS(
      (void)lorentz::lightlike_killing_search(m, bad, lorentz::box_grid(m, 3), 8), lorentz::Error);
}

TEST_CASE("search is seed deterministic") {
  MetricField m = lorentz::minkowski(3);
  auto grid = lorentz::box_grid(m, 3);
  auto a = lorentz::lightlike_killing_search(m, lorentz::minkowski_translations(3), grid, 24, 5);
  auto b = lorentz::lightlike_killing_search(m, lorentz::minkowski_translations(3), grid, 24, 5);
  REQUIRE(a.found.size() == b.found.size());
  for (size_t i = 0; i < a.found.size(); ++i)
    CHECK((a.found[i].coeffs - b.found[i].coeffs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pullbacks measure isometry defect") {
  MetricField m = lorentz::minkowski(2);
  auto grid = lorentz::box_grid(m, 3);
  std::vector<Expr> ident{Expr::coord(0), Expr::coord(1)};
  CHECK(lorentz::pullback_residual(m, ident, grid) == 0.0);

  double b = 0.4;
  std::vector<Expr> boost{Expr::constant(std::cosh(b)) * Expr::coord(0) +
                              Expr::constant(std::sinh(b)) * Expr::coord(1),
                          Expr::constant(std::sinh(b)) * Expr::coord(0) +
                              Expr::constant(std::cosh(b)) * Expr::coord(1)};
  CHECK(lorentz::pullback_residual(m, boost, grid) < 1e-9);

  std::vector<Expr> dilation{Expr::constant(2.0) * Expr::coord(0),
                             Expr::constant(2.0) * Expr::coord(1)};
  CHECK(lorentz::pullback_residual(m, dilation, grid) == doctest::Approx(3.0));
}
