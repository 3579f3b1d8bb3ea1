#ifndef DIFFGRAPH_JSON_IO_HPP_
#define DIFFGRAPH_JSON_IO_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/order_iso.hpp"

namespace diffgraph::io {

using nlohmann::json;

struct GraphDocument {
  Graph graph;
  std::optional<Measure> measure;
};

namespace detail {

[[noreturn]] inline void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedInput, what);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) malformed(where + " must be a number");
  return j.get<double>();
}

inline std::string vertex_id(const json& j, const std::string& where) {
  if (!j.is_string()) malformed(where + " must be a string vertex id");
  return j.get<std::string>();
}

}  // namespace detail

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    detail::malformed(std::string("invalid JSON: ") + e.what());
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) detail::malformed("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

/// Reads the graph schema:
/// { "vertices": [...], "edges": [{"u","v","w"}], "killing": {...}, "measure": {...} }
inline GraphDocument graph_from_json(const json& doc) {
  if (!doc.is_object()) detail::malformed("graph document must be an object");
  static const std::set<std::string> allowed{"vertices", "edges", "killing", "measure"};
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) detail::malformed("unknown key \"" + key + "\"");
  }
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    detail::malformed("\"vertices\" must be an array");
  }
  std::vector<std::string> vertices;
  for (const auto& v : doc["vertices"]) vertices.push_back(detail::vertex_id(v, "vertex"));

  std::vector<EdgeInput> edges;
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) detail::malformed("\"edges\" must be an array");
    for (const auto& e : doc["edges"]) {
      if (!e.is_object() || !e.contains("u") || !e.contains("v") || !e.contains("w")) {
        detail::malformed("edge entries need \"u\", \"v\" and \"w\"");
      }
      edges.push_back({detail::vertex_id(e["u"], "edge u"), detail::vertex_id(e["v"], "edge v"),
                       detail::number(e["w"], "edge weight")});
    }
  }
  std::map<std::string, double> killing;
  if (doc.contains("killing")) {
    if (!doc["killing"].is_object()) detail::malformed("\"killing\" must be an object");
    for (const auto& [id, value] : doc["killing"].items()) {
      killing[id] = detail::number(value, "killing of " + id);
    }
  }
  GraphDocument out{validate_graph(vertices, edges, killing), std::nullopt};
  if (doc.contains("measure")) {
    const auto& mj = doc["measure"];
    if (!mj.is_object()) detail::malformed("\"measure\" must be an object");
    Eigen::VectorXd m = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(out.graph.size()),
                                                  std::numeric_limits<double>::quiet_NaN());
    for (const auto& [id, value] : mj.items()) {
      m[static_cast<Eigen::Index>(out.graph.index_of(id))] = detail::number(value, "measure of " + id);
    }
    for (std::size_t i = 0; i < out.graph.size(); ++i) {
      if (std::isnan(m[static_cast<Eigen::Index>(i)])) {
        throw Error(ErrorCode::NonPositiveMeasure, "measure missing for " + out.graph.vertex(i));
      }
    }
    out.measure = Measure(std::move(m));
  }
  return out;
}

/// Canonical form: sorted vertices, each edge once with u < v, every killing
/// value, and the measure when given.
inline json graph_to_json(const Graph& g, const Measure* m = nullptr) {
  json doc;
  doc["vertices"] = g.vertices();
  doc["edges"] = json::array();
  for (const auto& e : g.edges()) {
    doc["edges"].push_back({{"u", g.vertex(e.u)}, {"v", g.vertex(e.v)}, {"w", e.weight}});
  }
  doc["killing"] = json::object();
  for (std::size_t i = 0; i < g.size(); ++i) doc["killing"][g.vertex(i)] = g.killing(i);
  if (m != nullptr) {
    doc["measure"] = json::object();
    for (std::size_t i = 0; i < g.size(); ++i) doc["measure"][g.vertex(i)] = (*m)[i];
  }
  return doc;
}

/// A vertex function as an object {id: value}. Missing vertices take
/// `fill`, or are rejected when `fill` is empty.
inline VertexFunction function_from_json(const Graph& g, const json& doc,
                                         std::optional<double> fill = 0.0) {
  if (!doc.is_object()) detail::malformed("vertex function must be an object");
  VertexFunction f = VertexFunction::Constant(static_cast<Eigen::Index>(g.size()),
                                              std::numeric_limits<double>::quiet_NaN());
  for (const auto& [id, value] : doc.items()) {
    f[static_cast<Eigen::Index>(g.index_of(id))] = detail::number(value, "value at " + id);
  }
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (std::isnan(f[i])) {
      if (!fill) detail::malformed("no value for " + g.vertex(static_cast<std::size_t>(i)));
      f[i] = *fill;
    }
  }
  return f;
}

inline json function_to_json(const Graph& g, const VertexFunction& f) {
  json out = json::object();
  for (std::size_t i = 0; i < g.size(); ++i) out[g.vertex(i)] = f[static_cast<Eigen::Index>(i)];
  return out;
}

/// Vertex map {x: τ(x)} over one vertex set; unlisted vertices are fixed.
inline std::vector<std::size_t> permutation_from_json(const Graph& g, const json& doc) {
  if (!doc.is_object()) detail::malformed("vertex map must be an object");
  std::vector<std::size_t> tau(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) tau[i] = i;
  for (const auto& [id, value] : doc.items()) {
    tau[g.index_of(id)] = g.index_of(detail::vertex_id(value, "image of " + id));
  }
  return tau;
}

inline json certificate_to_json(const Graph& g1, const Graph& g2, const IntertwinerCertificate& c) {
  json tau = json::object();
  json h = json::object();
  for (std::size_t y = 0; y < c.iso.size(); ++y) {
    tau[g2.vertex(y)] = g1.vertex(c.iso.tau[y]);
    h[g2.vertex(y)] = c.iso.h[static_cast<Eigen::Index>(y)];
  }
  const auto& r = c.residuals;
  return {{"tau", tau},
          {"h", h},
          {"beta", c.beta},
          {"accepted", c.accepted},
          {"residuals",
           {{"generator", r.generator},
            {"semigroup", r.semigroup},
            {"measure", r.measure},
            {"edge", r.edge},
            {"killing", r.killing},
            {"unitarity", r.unitarity}}}};
}

/// JSON text with every number printed at 17 significant digits.
/// Non-finite numbers become null.
inline void dump(const json& j, std::string& out, int indent = 2, int level = 0) {
  auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += json(key).dump();
        out += indent < 0 ? ":" : ": ";
        dump(value, out, indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        dump(value, out, indent, level + 1);
      }
      newline(level);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

inline std::string dump(const json& j, int indent = 2) {
  std::string out;
  dump(j, out, indent, 0);
  return out;
}

}  // namespace diffgraph::io

#endif  // DIFFGRAPH_JSON_IO_HPP_
