#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorentz/killing.hpp"
#include "lorentz/models.hpp"
#include "lorentz/submanifold.hpp"

namespace lorentz {

using ordered_json = nlohmann::ordered_json;

// A parsed and validated manifold spec file. The metric is always
// materialized; warped files additionally keep the factor decomposition so
// product analyses can reuse it.
struct LoadedSpec {
  std::string name;
  MetricField metric;
  std::optional<int> base_dim;
  std::optional<WarpedSpec> warped;
  std::vector<Immersion> submanifolds;
  std::vector<VectorField> vector_fields;
  std::vector<VectorField> killing_basis;
  Tolerances tol;
  std::uint64_t digest = 0;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(std::uint64_t d);

// Strict parse: schema tag "lorentzlab/1" required, unknown keys rejected at
// every level. Exactly one of "metric", "builtin", "warped" defines the chart.
LoadedSpec parse_spec_text(const std::string& text);
LoadedSpec load_spec_file(const std::string& path);

const Immersion& find_submanifold(const LoadedSpec& spec, const std::string& name);
const VectorField& find_vector_field(const LoadedSpec& spec, const std::string& name);

Tolerances tolerances_from_json(const ordered_json& j, Tolerances base);
ordered_json tolerances_to_json(const Tolerances& t);

// Write-to-temp-then-rename so readers never observe a partial report.
void write_text_atomic(const std::string& path, const std::string& text);
void write_report(const std::string& path, const ordered_json& report);

ordered_json report_header(const LoadedSpec& spec, const std::string& analysis,
                           unsigned long long seed);

}  // namespace lorentz
