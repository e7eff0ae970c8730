#include "misc/serialization.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "misc/errors.hpp"

namespace misc {

json index_set_to_json(const IndexSet& set) {
  json members = json::array();
  json coeffs = json::array();
  const auto c = set.is_downward_closed() ? combination_coefficients(set) : std::map<MixedIndex, int>{};
  for (const auto& m : set) {
    json beta = json::object();
    for (const auto& [j, level] : m.beta.entries()) beta[std::to_string(j)] = level;
    members.push_back({{"alpha", m.alpha}, {"beta", beta}});
    if (!c.empty()) coeffs.push_back(c.at(m));
  }
  json doc = {{"spatial_dims", set.spatial_dims()}, {"members", members}};
  if (!c.empty()) doc["coefficients"] = coeffs;
  return doc;
}

IndexSet index_set_from_json(const json& doc) {
  try {
    IndexSet set(doc.at("spatial_dims").get<int>());
    for (const auto& m : doc.at("members")) {
      MixedIndex idx;
      idx.alpha = m.at("alpha").get<std::vector<int>>();
      for (const auto& [key, level] : m.at("beta").items()) {
        idx.beta.set(std::stoi(key), level.get<int>());
      }
      set.insert(idx);
    }
    return set;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed index set document: ") + e.what());
  }
}

json model_to_json(const ErrorModel& model) {
  return {{"r_fem", model.r_fem},
          {"C_E", model.C_E},
          {"g_tilde", model.g_tilde},
          {"residual", model.residual}};
}

ErrorModel model_from_json(const json& doc) {
  try {
    ErrorModel m;
    m.r_fem = doc.at("r_fem").get<double>();
    m.C_E = doc.value("C_E", 1.0);
    m.g_tilde = doc.at("g_tilde").get<std::vector<double>>();
    m.residual = doc.value("residual", 0.0);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  }
}

json prediction_to_json(const RatePrediction& p) {
  return {{"variant", p.variant},
          {"r_misc", p.r_misc},
          {"s_star", p.s_star},
          {"violations", p.violations}};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace misc
