#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "misc/adaptation.hpp"
#include "misc/index_set.hpp"
#include "misc/theory.hpp"

namespace misc {

using json = nlohmann::json;

/// {"spatial_dims": D, "members": [{"alpha": [..], "beta": {"j": level}}],
///  "coefficients": [..]} with coefficients aligned to members.
json index_set_to_json(const IndexSet& set);
IndexSet index_set_from_json(const json& doc);

/// {"r_fem", "C_E", "g_tilde": [..], "residual"}
json model_to_json(const ErrorModel& model);
ErrorModel model_from_json(const json& doc);

json prediction_to_json(const RatePrediction& p);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace misc
