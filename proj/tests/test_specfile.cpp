#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "lorentz/specfile.hpp"

using lorentz::Error;
using lorentz::ErrorKind;
using lorentz::LoadedSpec;
using lorentz::ordered_json;

namespace {

template <typename F>
std::optional<ErrorKind> kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

const char* kFlatland = R"json({
  "schema": "lorentzlab/1",
  "name": "flatland",
  "builtin": {"name": "minkowski", "params": [2]},
  "vector_fields": [
    {"name": "P_t", "components": ["1", "0"]},
    {"name": "boost", "components": ["x1", "t"]}
  ],
  "killing_basis": ["P_t", "boost"],
  "submanifolds": [
    {"name": "diag", "params": ["s"], "map": ["s", "s"], "box": {"lo": [-1.0], "hi": [1.0]}}
  ],
  "tolerances": {"cone_fraction": 0.5}
})json";

const char* kWarpedLine = R"json({
  "schema": "lorentzlab/1",
  "name": "ribbon",
  "warped": {
    "base": {
      "name": "line",
      "metric": {
        "coords": ["t"],
        "signature": [1],
        "box": {"lo": [-1.0], "hi": [1.0]},
        "components": [["1"]]
      }
    },
    "fiber": {"builtin": {"name": "minkowski", "params": [2]}},
    "warp": "exp(2*t)"
  }
})json";

}  // namespace

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(lorentz::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(lorentz::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(lorentz::fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(lorentz::digest_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
  CHECK(lorentz::digest_hex(0) == "0000000000000000");
  CHECK(lorentz::digest_hex(0xfull) == "000000000000000f");
}

TEST_CASE("builtin spec parses fields, basis and overrides") {
  LoadedSpec spec = lorentz::parse_spec_text(kFlatland);
  CHECK(spec.name == "flatland");
  CHECK(spec.metric.dim() == 2);
  CHECK(spec.metric.coords()[0] == "t");
  CHECK_FALSE(spec.base_dim.has_value());
  CHECK_FALSE(spec.warped.has_value());
  CHECK(spec.digest == lorentz::fnv1a64(kFlatland));
  CHECK(spec.tol.cone_fraction == 0.5);
  CHECK(spec.tol.killing_accept == lorentz::default_tolerances().killing_accept);

  REQUIRE(spec.vector_fields.size() == 2);
  REQUIRE(spec.killing_basis.size() == 2);
  CHECK(spec.killing_basis[1].name == "boost");

  const lorentz::Immersion& diag = lorentz::find_submanifold(spec, "diag");
  CHECK(diag.param_dim() == 1);
  CHECK(diag.ambient_dim() == 2);
  CHECK(kind_of([&] { lorentz::find_submanifold(spec, "nope"); }) == ErrorKind::bad_argument);
  CHECK(kind_of([&] { lorentz::find_vector_field(spec, "nope"); }) == ErrorKind::bad_argument);
}

TEST_CASE("inline metric blocks parse expressions") {
  const char* text = R"json({
    "schema": "lorentzlab/1",
    "name": "tilted",
    "metric": {
      "coords": ["t", "x"],
      "signature": [-1, 1],
      "box": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
      "components": [["-1", "0.2*x"], ["0.2*x", "1 + x^2"]]
    }
  })json";
  LoadedSpec spec = lorentz::parse_spec_text(text);
  lorentz::Vec p(2);
  p << 0.3, 0.5;
  lorentz::MetricValue mv = lorentz::metric_at(spec.metric, p);
  CHECK(mv.g(0, 0) == doctest::Approx(-1.0));
  CHECK(mv.g(0, 1) == doctest::Approx(0.1));
  CHECK(mv.g(1, 1) == doctest::Approx(1.25));
}

TEST_CASE("warped spec files materialize the product") {
  LoadedSpec spec = lorentz::parse_spec_text(kWarpedLine);
  REQUIRE(spec.warped.has_value());
  REQUIRE(spec.base_dim.has_value());
  CHECK(*spec.base_dim == 1);
  CHECK(spec.metric.dim() == 3);
  CHECK(spec.metric.coords()[0] == "t");
  CHECK(spec.metric.coords()[1] == "t_f");
  CHECK(spec.metric.coords()[2] == "x1");
  CHECK(spec.warped->base.dim() == 1);
  CHECK(spec.warped->fiber.dim() == 2);

  // an explicit matching split is allowed, a contradicting one is not
  std::string text(kWarpedLine);
  std::string with_ok = text;
  with_ok.replace(with_ok.find("\"name\": \"ribbon\","),
                  std::string("\"name\": \"ribbon\",").size(),
                  "\"name\": \"ribbon\",\n  \"base_dim\": 1,");
  CHECK(lorentz::parse_spec_text(with_ok).base_dim == 1);
  std::string with_bad = text;
  with_bad.replace(with_bad.find("\"name\": \"ribbon\","),
                   std::string("\"name\": \"ribbon\",").size(),
                   "\"name\": \"ribbon\",\n  \"base_dim\": 2,");
  CHECK(kind_of([&] { lorentz::parse_spec_text(with_bad); }) == ErrorKind::schema);
}

TEST_CASE("schema violations are rejected with the schema kind") {
  struct Case {
    const char* label;
    const char* text;
    ErrorKind want;
  };
  const Case cases[] = {
      {"unknown top-level key",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "extra": 1})",
       ErrorKind::schema},
      {"wrong schema tag",
       R"({"schema": "lorentzlab/2", "name": "x", "builtin": {"name": "minkowski", "params": [2]}})",
       ErrorKind::schema},
      {"two chart sources",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1"]]}})",
       ErrorKind::schema},
      {"no chart source", R"({"schema": "lorentzlab/1", "name": "x"})", ErrorKind::schema},
      {"unknown builtin",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "zzz", "params": []}})",
       ErrorKind::schema},
      {"builtin arity",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": []}})",
       ErrorKind::schema},
      {"asymmetric components",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "x"], ["0", "1"]]}})",
       ErrorKind::schema},
      {"component shape",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"]]}})",
       ErrorKind::schema},
      {"signature length",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1"]]}})",
       ErrorKind::schema},
      {"box length",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1"]]}})",
       ErrorKind::schema},
      {"submanifold map arity",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "submanifolds": [{"name": "s", "params": ["u"], "map": ["u"], "box": {"lo": [-1], "hi": [1]}}]})",
       ErrorKind::schema},
      {"duplicate submanifold",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "submanifolds": [{"name": "s", "params": ["u"], "map": ["u", "u"], "box": {"lo": [-1], "hi": [1]}}, {"name": "s", "params": ["u"], "map": ["u", "-u"], "box": {"lo": [-1], "hi": [1]}}]})",
       ErrorKind::schema},
      {"vector field arity",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "vector_fields": [{"name": "v", "components": ["1"]}]})",
       ErrorKind::schema},
      {"killing basis reference",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "killing_basis": ["ghost"]})",
       ErrorKind::schema},
      {"unknown tolerance",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "tolerances": {"wibble": 1e-6}})",
       ErrorKind::schema},
      {"named builtin subchart",
       R"({"schema": "lorentzlab/1", "name": "x", "warped": {"base": {"name": "line", "builtin": {"name": "euclidean", "params": [1]}}, "fiber": {"builtin": {"name": "minkowski", "params": [2]}}, "warp": "1"}})",
       ErrorKind::schema},
      {"warped without warp",
       R"({"schema": "lorentzlab/1", "name": "x", "warped": {"base": {"builtin": {"name": "euclidean", "params": [1]}}, "fiber": {"builtin": {"name": "minkowski", "params": [2]}}}})",
       ErrorKind::schema},
      {"base_dim out of range",
       R"({"schema": "lorentzlab/1", "name": "x", "builtin": {"name": "minkowski", "params": [2]}, "base_dim": 2})",
       ErrorKind::schema},
      {"component parse error",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1 +"]]}})",
       ErrorKind::parse},
      {"undeclared symbol in component",
       R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1 + q"]]}})",
       ErrorKind::undeclared_symbol},
      {"not json at all", "{ not json", ErrorKind::parse},
  };
  for (const Case& c : cases) {
    CAPTURE(c.label);
    auto got = kind_of([&] { lorentz::parse_spec_text(c.text); });
    REQUIRE(got.has_value());
    CHECK(*got == c.want);
  }
}

TEST_CASE("component errors carry their location") {
  const char* text =
      R"({"schema": "lorentzlab/1", "name": "x", "metric": {"coords": ["t", "x"], "signature": [-1, 1], "box": {"lo": [-1, -1], "hi": [1, 1]}, "components": [["-1", "0"], ["0", "1 + q"]]}})";
  try {
    lorentz::parse_spec_text(text);
    FAIL("expected an undeclared-symbol error");
  } catch (const Error& e) {
    std::string what = e.what();
    CHECK(what.find("components[1][1]") != std::string::npos);
    CHECK(what.find("q") != std::string::npos);
  }
}

TEST_CASE("missing files fail with the io kind") {
  CHECK(kind_of([] { lorentz::load_spec_file("/nonexistent/nowhere.json"); }) == ErrorKind::io);
}

TEST_CASE("tolerance maps round trip") {
  lorentz::Tolerances t = lorentz::default_tolerances();
  t.cone_fraction = 0.123;
  t.energy_drift = 4.5e-7;
  ordered_json j = lorentz::tolerances_to_json(t);
  CHECK(j.size() == 28);
  lorentz::Tolerances back = lorentz::tolerances_from_json(j, lorentz::default_tolerances());
  CHECK(back.cone_fraction == 0.123);
  CHECK(back.energy_drift == 4.5e-7);
  CHECK(back.killing_accept == t.killing_accept);
}

TEST_CASE("atomic writes leave complete files only") {
  namespace fs = std::filesystem;
  LoadedSpec spec = lorentz::parse_spec_text(kFlatland);
  ordered_json j = lorentz::report_header(spec, "curvature", 7ull);
  j["results"]["answer"] = 42;

  fs::path dir = fs::temp_directory_path() / "lorentzlab_spec_test";
  fs::create_directories(dir);
  fs::path p = dir / "report.json";
  lorentz::write_report(p.string(), j);
  CHECK(fs::exists(p));
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));

  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  REQUIRE_FALSE(text.empty());
  CHECK(text.back() == '\n');
  CHECK(ordered_json::parse(text) == j);
  fs::remove_all(dir);
}

TEST_CASE("report headers have the fixed layout") {
  LoadedSpec spec = lorentz::parse_spec_text(kFlatland);
  ordered_json j = lorentz::report_header(spec, "scan-cx", 20240823ull);
  CHECK(j["tool"] == "lorentzlab");
  CHECK(j["version"].is_string());
  CHECK_FALSE(j["version"].get<std::string>().empty());
  CHECK(j["analysis"] == "scan-cx");
  CHECK(j["input"]["name"] == "flatland");
  CHECK(j["input"]["dim"] == 2);
  CHECK(j["input"]["digest"] == "fnv1a64:" + lorentz::digest_hex(spec.digest));
  CHECK(j["seed"] == 20240823ull);
  CHECK(j["parameters"].is_object());
  CHECK(j["results"].is_object());
  CHECK(j["timing"].is_null());

  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  const std::vector<std::string> want{"tool",  "version",    "analysis", "input",
                                      "seed",  "parameters", "results",  "timing"};
  CHECK(keys == want);
}

TEST_CASE("shipped specs load and validate") {
  const char* dir = std::getenv("LORENTZLAB_SPECS");
  REQUIRE(dir != nullptr);
  const char* names[] = {"minkowski3",   "de_sitter3",  "anti_de_sitter3",
                         "berger2",      "warped_exp",  "warped_poly",
                         "warped_hyp",   "notwarped_a", "notwarped_b",
                         "notwarped_c",  "perturbed_minkowski3"};
  for (const char* nm : names) {
    CAPTURE(nm);
    LoadedSpec spec = lorentz::load_spec_file(std::string(dir) + "/" + nm + ".json");
    CHECK(spec.name == nm);
    lorentz::validate_metric(spec.metric, 3, spec.tol);
  }

  LoadedSpec berger = lorentz::load_spec_file(std::string(dir) + "/berger2.json");
  CHECK(berger.killing_basis.size() == 4);
  LoadedSpec we = lorentz::load_spec_file(std::string(dir) + "/warped_exp.json");
  REQUIRE(we.warped.has_value());
  CHECK(we.base_dim == 1);
  CHECK(we.submanifolds.size() == 4);
  LoadedSpec nc = lorentz::load_spec_file(std::string(dir) + "/notwarped_c.json");
  CHECK(nc.base_dim == 2);
}
