#include "lorentz/specfile.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lorentz/version.hpp"

namespace lorentz {

namespace {

[[noreturn]] void bad_schema(const std::string& what) { fail(ErrorKind::schema, what); }

void require_keys(const ordered_json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad_schema(where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        ok = true;
        break;
      }
    if (!ok) bad_schema("unknown key '" + item.key() + "' in " + where);
  }
}

std::string get_string(const ordered_json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) bad_schema(where + " is missing '" + key + "'");
  if (!j[key].is_string()) bad_schema(where + "." + key + " must be a string");
  return j[key].get<std::string>();
}

std::vector<std::string> get_string_list(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) bad_schema(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) bad_schema(where + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Vec get_point(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad_schema(where + " must be a nonempty array of numbers");
  Vec out(static_cast<int>(j.size()));
  int i = 0;
  for (const auto& e : j) {
    if (!e.is_number()) bad_schema(where + " must contain only numbers");
    out(i++) = e.get<double>();
  }
  return out;
}

Expr parse_in(const std::string& src, const std::vector<std::string>& coords,
              const std::string& where) {
  try {
    return parse_expr(src, coords);
  } catch (const Error& e) {
    fail(e.kind(), where + ": " + e.what());
  }
}

double builtin_param(const ordered_json& params, size_t i, const std::string& where) {
  if (!params.is_array()) bad_schema(where + ".params must be an array");
  if (i >= params.size()) bad_schema(where + " has too few params");
  if (!params[i].is_number()) bad_schema(where + ".params must contain numbers");
  return params[i].get<double>();
}

int builtin_int_param(const ordered_json& params, size_t i, const std::string& where) {
  double v = builtin_param(params, i, where);
  int n = static_cast<int>(v);
  if (static_cast<double>(n) != v) bad_schema(where + " expects an integer dimension");
  return n;
}

MetricField parse_builtin(const ordered_json& j, const std::string& where) {
  require_keys(j, where, {"name", "params"});
  std::string name = get_string(j, "name", where);
  ordered_json params = j.contains("params") ? j["params"] : ordered_json::array();
  auto arity = [&](size_t want) {
    if (!params.is_array() || params.size() != want)
      bad_schema(where + ": builtin '" + name + "' takes " + std::to_string(want) + " param(s)");
  };
  if (name == "minkowski") {
    arity(1);
    return minkowski(builtin_int_param(params, 0, where));
  }
  if (name == "euclidean") {
    arity(1);
    return euclidean(builtin_int_param(params, 0, where));
  }
  if (name == "hyperbolic") {
    arity(2);
    return hyperbolic(builtin_int_param(params, 0, where), builtin_param(params, 1, where));
  }
  if (name == "de_sitter") {
    arity(2);
    return de_sitter(builtin_int_param(params, 0, where), builtin_param(params, 1, where));
  }
  if (name == "anti_de_sitter") {
    arity(2);
    return anti_de_sitter(builtin_int_param(params, 0, where), builtin_param(params, 1, where));
  }
  if (name == "berger_sl2") {
    arity(1);
    return berger_sl2(builtin_param(params, 0, where));
  }
  bad_schema(where + ": unknown builtin '" + name + "'");
}

MetricField parse_metric_block(const ordered_json& j, const std::string& chart_name,
                               const std::string& where) {
  require_keys(j, where, {"coords", "signature", "box", "components"});
  if (!j.contains("coords")) bad_schema(where + " is missing 'coords'");
  std::vector<std::string> coords = get_string_list(j["coords"], where + ".coords");
  const int n = static_cast<int>(coords.size());

  if (!j.contains("signature")) bad_schema(where + " is missing 'signature'");
  if (!j["signature"].is_array() || static_cast<int>(j["signature"].size()) != n)
    bad_schema(where + ".signature must list one entry per coordinate");
  std::vector<int> sig;
  for (const auto& e : j["signature"]) {
    if (!e.is_number_integer()) bad_schema(where + ".signature must contain integers");
    sig.push_back(e.get<int>());
  }

  if (!j.contains("box")) bad_schema(where + " is missing 'box'");
  require_keys(j["box"], where + ".box", {"lo", "hi"});
  if (!j["box"].contains("lo") || !j["box"].contains("hi"))
    bad_schema(where + ".box needs 'lo' and 'hi'");
  Vec lo = get_point(j["box"]["lo"], where + ".box.lo");
  Vec hi = get_point(j["box"]["hi"], where + ".box.hi");
  if (lo.size() != n || hi.size() != n)
    bad_schema(where + ".box bounds must list one entry per coordinate");

  MetricField m(chart_name, coords, sig, lo, hi);

  if (!j.contains("components")) bad_schema(where + " is missing 'components'");
  const ordered_json& comp = j["components"];
  if (!comp.is_array() || static_cast<int>(comp.size()) != n)
    bad_schema(where + ".components must be an n-by-n array of expression strings");
  for (int i = 0; i < n; ++i) {
    if (!comp[i].is_array() || static_cast<int>(comp[i].size()) != n)
      bad_schema(where + ".components must be an n-by-n array of expression strings");
    for (int k = 0; k < n; ++k)
      if (!comp[i][k].is_string())
        bad_schema(where + ".components must contain expression strings");
  }
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      std::string upper = comp[i][k].get<std::string>();
      std::string lower = comp[k][i].get<std::string>();
      if (upper != lower)
        bad_schema(where + ".components must be symmetric (entries " + std::to_string(i) + "," +
                   std::to_string(k) + " differ)");
      std::string slot = where + ".components[" + std::to_string(i) + "][" + std::to_string(k) + "]";
      m.set_component(i, k, parse_in(upper, coords, slot));
    }
  return m;
}

MetricField parse_subchart(const ordered_json& j, const std::string& slot) {
  require_keys(j, slot, {"name", "metric", "builtin"});
  const bool has_metric = j.contains("metric");
  const bool has_builtin = j.contains("builtin");
  if (has_metric == has_builtin)
    bad_schema(slot + " needs exactly one of 'metric' or 'builtin'");
  if (has_builtin) {
    if (j.contains("name")) bad_schema(slot + ": builtins carry their own name");
    return parse_builtin(j["builtin"], slot + ".builtin");
  }
  std::string name = j.contains("name") ? get_string(j, "name", slot) : slot;
  return parse_metric_block(j["metric"], name, slot + ".metric");
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(std::uint64_t d) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

LoadedSpec parse_spec_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("spec file is not valid JSON: ") + e.what());
  }
  require_keys(j, "spec", {"schema", "name", "metric", "builtin", "warped", "base_dim",
                           "submanifolds", "vector_fields", "killing_basis", "tolerances"});
  if (get_string(j, "schema", "spec") != "lorentzlab/1")
    bad_schema("unsupported schema tag (want \"lorentzlab/1\")");

  LoadedSpec spec;
  spec.name = get_string(j, "name", "spec");
  spec.digest = fnv1a64(text);
  if (j.contains("tolerances")) spec.tol = tolerances_from_json(j["tolerances"], spec.tol);

  int chart_sources = 0;
  for (const char* k : {"metric", "builtin", "warped"})
    if (j.contains(k)) ++chart_sources;
  if (chart_sources != 1) bad_schema("spec needs exactly one of 'metric', 'builtin', 'warped'");

  if (j.contains("builtin")) {
    spec.metric = parse_builtin(j["builtin"], "spec.builtin");
  } else if (j.contains("metric")) {
    spec.metric = parse_metric_block(j["metric"], spec.name, "spec.metric");
  } else {
    const ordered_json& w = j["warped"];
    require_keys(w, "spec.warped", {"base", "fiber", "warp"});
    if (!w.contains("base") || !w.contains("fiber") || !w.contains("warp"))
      bad_schema("spec.warped needs 'base', 'fiber' and 'warp'");
    WarpedSpec ws;
    ws.name = spec.name;
    ws.base = parse_subchart(w["base"], "base");
    ws.fiber = parse_subchart(w["fiber"], "fiber");
    if (!w["warp"].is_string()) bad_schema("spec.warped.warp must be an expression string");
    ws.warp = parse_in(w["warp"].get<std::string>(), ws.base.coords(), "spec.warped.warp");
    spec.metric = warped(ws, spec.tol);
    spec.warped = ws;
    spec.base_dim = ws.base.dim();
  }

  if (j.contains("base_dim")) {
    if (!j["base_dim"].is_number_integer()) bad_schema("spec.base_dim must be an integer");
    int bd = j["base_dim"].get<int>();
    if (bd < 1 || bd >= spec.metric.dim())
      bad_schema("spec.base_dim must split the chart into two nonempty blocks");
    if (spec.warped && bd != spec.warped->base.dim())
      bad_schema("spec.base_dim contradicts the warped base dimension");
    spec.base_dim = bd;
  }

  if (j.contains("submanifolds")) {
    if (!j["submanifolds"].is_array()) bad_schema("spec.submanifolds must be an array");
    for (const auto& s : j["submanifolds"]) {
      std::string where = "spec.submanifolds[" + std::to_string(spec.submanifolds.size()) + "]";
      require_keys(s, where, {"name", "params", "map", "box"});
      std::string name = get_string(s, "name", where);
      if (!s.contains("params")) bad_schema(where + " is missing 'params'");
      std::vector<std::string> params = get_string_list(s["params"], where + ".params");
      if (!s.contains("map")) bad_schema(where + " is missing 'map'");
      std::vector<std::string> map_src = get_string_list(s["map"], where + ".map");
      if (static_cast<int>(map_src.size()) != spec.metric.dim())
        bad_schema(where + ".map must give one component per chart coordinate");
      if (!s.contains("box")) bad_schema(where + " is missing 'box'");
      require_keys(s["box"], where + ".box", {"lo", "hi"});
      if (!s["box"].contains("lo") || !s["box"].contains("hi"))
        bad_schema(where + ".box needs 'lo' and 'hi'");
      Vec lo = get_point(s["box"]["lo"], where + ".box.lo");
      Vec hi = get_point(s["box"]["hi"], where + ".box.hi");
      std::vector<Expr> map;
      for (size_t i = 0; i < map_src.size(); ++i)
        map.push_back(parse_in(map_src[i], params, where + ".map[" + std::to_string(i) + "]"));
      for (const auto& prev : spec.submanifolds)
        if (prev.name == name) bad_schema(where + ": duplicate submanifold name '" + name + "'");
      spec.submanifolds.push_back(make_immersion(name, params, map, lo, hi));
    }
  }

  if (j.contains("vector_fields")) {
    if (!j["vector_fields"].is_array()) bad_schema("spec.vector_fields must be an array");
    for (const auto& f : j["vector_fields"]) {
      std::string where = "spec.vector_fields[" + std::to_string(spec.vector_fields.size()) + "]";
      require_keys(f, where, {"name", "components"});
      VectorField v;
      v.name = get_string(f, "name", where);
      if (!f.contains("components")) bad_schema(where + " is missing 'components'");
      std::vector<std::string> comp_src = get_string_list(f["components"], where + ".components");
      if (static_cast<int>(comp_src.size()) != spec.metric.dim())
        bad_schema(where + ".components must give one entry per chart coordinate");
      for (size_t i = 0; i < comp_src.size(); ++i)
        v.comp.push_back(parse_in(comp_src[i], spec.metric.coords(),
                                  where + ".components[" + std::to_string(i) + "]"));
      for (const auto& prev : spec.vector_fields)
        if (prev.name == v.name) bad_schema(where + ": duplicate field name '" + v.name + "'");
      spec.vector_fields.push_back(std::move(v));
    }
  }

  if (j.contains("killing_basis")) {
    std::vector<std::string> names = get_string_list(j["killing_basis"], "spec.killing_basis");
    for (const auto& nm : names) {
      auto it = std::find_if(spec.vector_fields.begin(), spec.vector_fields.end(),
                             [&](const VectorField& v) { return v.name == nm; });
      if (it == spec.vector_fields.end())
        bad_schema("spec.killing_basis references undefined field '" + nm + "'");
      spec.killing_basis.push_back(*it);
    }
  }

  return spec;
}

LoadedSpec load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "cannot read spec file '" + path + "'");
  return parse_spec_text(buf.str());
}

const Immersion& find_submanifold(const LoadedSpec& spec, const std::string& name) {
  for (const auto& s : spec.submanifolds)
    if (s.name == name) return s;
  fail(ErrorKind::bad_argument, "spec '" + spec.name + "' has no submanifold '" + name + "'");
}

const VectorField& find_vector_field(const LoadedSpec& spec, const std::string& name) {
  for (const auto& v : spec.vector_fields)
    if (v.name == name) return v;
  fail(ErrorKind::bad_argument, "spec '" + spec.name + "' has no vector field '" + name + "'");
}

namespace {

struct TolEntry {
  const char* name;
  double Tolerances::*member;
};

constexpr TolEntry kTolTable[] = {
    {"metric_degenerate_det", &Tolerances::metric_degenerate_det},
    {"metric_inverse_check", &Tolerances::metric_inverse_check},
    {"isotropy_rel", &Tolerances::isotropy_rel},
    {"curvature_symmetry", &Tolerances::curvature_symmetry},
    {"plane_degenerate", &Tolerances::plane_degenerate},
    {"plane_sample_floor", &Tolerances::plane_sample_floor},
    {"geodesy_certificate", &Tolerances::geodesy_certificate},
    {"geodesy_reject", &Tolerances::geodesy_reject},
    {"classify_geodesic", &Tolerances::classify_geodesic},
    {"classify_umbilical", &Tolerances::classify_umbilical},
    {"normal_check", &Tolerances::normal_check},
    {"weingarten_duality", &Tolerances::weingarten_duality},
    {"lightlike_det", &Tolerances::lightlike_det},
    {"killing_accept", &Tolerances::killing_accept},
    {"null_search_accept", &Tolerances::null_search_accept},
    {"null_min_norm", &Tolerances::null_min_norm},
    {"homothety_variation", &Tolerances::homothety_variation},
    {"homothety_reject", &Tolerances::homothety_reject},
    {"conformal_entry", &Tolerances::conformal_entry},
    {"block_off_max", &Tolerances::block_off_max},
    {"cone_fraction", &Tolerances::cone_fraction},
    {"cluster_merge", &Tolerances::cluster_merge},
    {"span_singular_value", &Tolerances::span_singular_value},
    {"rank_singular_value", &Tolerances::rank_singular_value},
    {"energy_drift", &Tolerances::energy_drift},
    {"fiber_spread", &Tolerances::fiber_spread},
    {"fiber_spread_reject", &Tolerances::fiber_spread_reject},
    {"warp_positive", &Tolerances::warp_positive},
};

}  // namespace

Tolerances tolerances_from_json(const ordered_json& j, Tolerances base) {
  if (!j.is_object()) bad_schema("spec.tolerances must be an object");
  for (const auto& item : j.items()) {
    const TolEntry* hit = nullptr;
    for (const auto& e : kTolTable)
      if (item.key() == e.name) {
        hit = &e;
        break;
      }
    if (hit == nullptr) bad_schema("unknown tolerance '" + item.key() + "'");
    if (!item.value().is_number())
      bad_schema("tolerance '" + item.key() + "' must be a number");
    base.*(hit->member) = item.value().get<double>();
  }
  return base;
}

ordered_json tolerances_to_json(const Tolerances& t) {
  ordered_json j = ordered_json::object();
  for (const auto& e : kTolTable) j[e.name] = t.*(e.member);
  return j;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) fail(ErrorKind::io, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::io, "cannot move report into place: " + ec.message());
}

void write_report(const std::string& path, const ordered_json& report) {
  write_text_atomic(path, report.dump(2) + "\n");
}

ordered_json report_header(const LoadedSpec& spec, const std::string& analysis,
                           unsigned long long seed) {
  ordered_json j = ordered_json::object();
  j["tool"] = "lorentzlab";
  j["version"] = kVersion;
  j["analysis"] = analysis;
  j["input"] = {{"name", spec.name},
                {"digest", "fnv1a64:" + digest_hex(spec.digest)},
                {"dim", spec.metric.dim()},
                {"chart", spec.metric.name()}};
  j["seed"] = seed;
  j["parameters"] = ordered_json::object();
  j["results"] = ordered_json::object();
  j["timing"] = nullptr;
  return j;
}

}  // namespace lorentz
