#pragma once

// Model file format (JSON):
//
//   {
//     "n": 8,
//     "variant": "appendix",                       optional, names the base adjacency
//     "adjacency": [[...], ...],                   n rows of n reals
//     "features":  [[...], ...],                   n rows of F reals
//     "labels":    [...],                          optional, n reals
//     "clusters":  [...],                          optional, n identifiers (string or int)
//     "variants":  {"printed": [[3, 1, -1.3083]]}  optional, per-variant entry overrides
//   }
//
// A variant listed under "variants" is produced by overwriting the listed (row, col, value)
// entries of the base adjacency. Files without a "variants" table load identically for every
// variant.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sigstab/error.hpp"
#include "sigstab/graph.hpp"

namespace sigstab {

enum class Variant { Appendix, Printed };

inline std::string_view to_string(Variant v) {
  return v == Variant::Appendix ? "appendix" : "printed";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "appendix") return Variant::Appendix;
  if (s == "printed") return Variant::Printed;
  throw BadParameter("unknown variant '" + std::string(s) + "' (expected appendix|printed)");
}

namespace detail {

inline Matrix parse_real_rows(const nlohmann::json& j, std::string_view field) {
  const std::string name(field);
  if (!j.is_array() || j.empty()) throw MalformedModel("'" + name + "' must be a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw MalformedModel("'" + name + "' row 0 must be a nonempty array");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != cols)
      throw MalformedModel("'" + name + "' row " + std::to_string(i) + " has " +
                           std::to_string(row.is_array() ? row.size() : 0) + " entries, expected " +
                           std::to_string(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw MalformedModel("'" + name + "' entry (" + std::to_string(i) + "," + std::to_string(c) +
                             ") is not a number");
      m(i, c) = row[c].get<double>();
    }
  }
  if (!m.all_finite()) throw MalformedModel("'" + name + "' contains a non-finite entry");
  return m;
}

}  // namespace detail

inline Model model_from_json(const nlohmann::json& doc, Variant variant = Variant::Appendix) {
  if (!doc.is_object()) throw MalformedModel("model document must be a JSON object");
  if (!doc.contains("adjacency")) throw MalformedModel("missing field 'adjacency'");
  if (!doc.contains("features")) throw MalformedModel("missing field 'features'");

  Matrix adjacency = detail::parse_real_rows(doc.at("adjacency"), "adjacency");
  if (!adjacency.square())
    throw MalformedModel("'adjacency' is " + std::to_string(adjacency.rows()) + "x" +
                         std::to_string(adjacency.cols()) + ", expected square");
  const std::size_t n = adjacency.rows();
  if (doc.contains("n")) {
    const auto& jn = doc.at("n");
    if (!jn.is_number_integer() || jn.get<long long>() != static_cast<long long>(n))
      throw MalformedModel("'n' does not match adjacency size " + std::to_string(n));
  }

  if (doc.contains("variants")) {
    const auto& table = doc.at("variants");
    if (!table.is_object()) throw MalformedModel("'variants' must be an object");
    const std::string key(to_string(variant));
    if (table.contains(key)) {
      for (const auto& o : table.at(key)) {
        if (!o.is_array() || o.size() != 3 || !o[0].is_number_unsigned() ||
            !o[1].is_number_unsigned() || !o[2].is_number())
          throw MalformedModel("'variants." + key + "' entries must be [row, col, value]");
        const auto r = o[0].get<std::size_t>(), c = o[1].get<std::size_t>();
        if (r >= n || c >= n) throw MalformedModel("'variants." + key + "' index out of range");
        adjacency(r, c) = o[2].get<double>();
      }
      if (!adjacency.all_finite()) throw MalformedModel("'variants." + key + "' has a non-finite value");
    }
  }

  Matrix features = detail::parse_real_rows(doc.at("features"), "features");
  if (features.rows() != n)
    throw MalformedModel("'features' has " + std::to_string(features.rows()) + " rows, expected " +
                         std::to_string(n));

  SignedDigraph g(std::move(adjacency));
  if (doc.contains("labels")) {
    const auto& jl = doc.at("labels");
    if (!jl.is_array()) throw MalformedModel("'labels' must be an array");
    std::vector<double> labels;
    for (const auto& v : jl) {
      if (!v.is_number()) throw MalformedModel("'labels' entries must be numbers");
      labels.push_back(v.get<double>());
    }
    g.set_labels(std::move(labels));
  }
  if (doc.contains("clusters")) {
    const auto& jc = doc.at("clusters");
    if (!jc.is_array()) throw MalformedModel("'clusters' must be an array");
    std::vector<std::string> clusters;
    for (const auto& v : jc) clusters.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    g.set_clusters(std::move(clusters));
  }
  return Model{std::move(g), std::move(features)};
}

inline Model parse_model(std::string_view text, Variant variant = Variant::Appendix) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedModel(std::string("model is not valid JSON: ") + e.what());
  }
  return model_from_json(doc, variant);
}

inline Model load_model(const std::string& path, Variant variant = Variant::Appendix) {
  std::ifstream in(path);
  if (!in) throw MalformedModel("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str(), variant);
}

/// Serializes the resolved model (variant overrides already applied).
inline nlohmann::json model_to_json(const Model& m) {
  auto rows = [](const Matrix& x) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      auto r = x.row(i);
      out.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return out;
  };
  nlohmann::json doc;
  doc["n"] = m.graph.size();
  doc["adjacency"] = rows(m.graph.weights());
  doc["features"] = rows(m.features);
  if (m.graph.labels()) doc["labels"] = *m.graph.labels();
  if (m.graph.clusters()) doc["clusters"] = *m.graph.clusters();
  return doc;
}

inline std::string serialize_model(const Model& m) { return model_to_json(m).dump(2); }

}  // namespace sigstab
