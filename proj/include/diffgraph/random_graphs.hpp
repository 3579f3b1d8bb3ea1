#ifndef DIFFGRAPH_RANDOM_GRAPHS_HPP_
#define DIFFGRAPH_RANDOM_GRAPHS_HPP_

// Seeded generators and small named graphs shared by the test suites, the
// acceptance run and the CLI self-test.

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "diffgraph/graph.hpp"

namespace diffgraph::gen {

using Rng = std::mt19937_64;

inline std::string vertex_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03zu", i);
  return buf;
}

inline std::vector<std::string> vertex_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(vertex_name(i));
  return out;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct RandomGraphOptions {
  double weight_lo = 0.1;
  double weight_hi = 10.0;
  double extra_edge_probability = 0.2;
  /// Probability that a vertex receives a positive killing term.
  double killing_probability = 0.0;
  double killing_lo = 0.1;
  double killing_hi = 10.0;
  /// Integer weights in {0,1} (standard weights) when set.
  bool standard_weights = false;
};

/// A random spanning tree plus independent extra edges; always connected.
inline Graph random_connected_graph(Rng& rng, std::size_t n, const RandomGraphOptions& opts = {}) {
  std::vector<IndexedEdge> edges;
  std::vector<std::vector<bool>> present(n, std::vector<bool>(n, false));
  auto weight = [&] { return opts.standard_weights ? 1.0 : uniform(rng, opts.weight_lo, opts.weight_hi); };
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = uniform_index(rng, 0, v - 1);
    edges.push_back({u, v, weight()});
    present[u][v] = present[v][u] = true;
  }
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (present[u][v]) continue;
      if (uniform(rng, 0.0, 1.0) < opts.extra_edge_probability) edges.push_back({u, v, weight()});
    }
  }
  std::vector<double> killing(n, 0.0);
  if (opts.killing_probability > 0.0) {
    for (auto& c : killing) {
      if (uniform(rng, 0.0, 1.0) < opts.killing_probability) c = uniform(rng, opts.killing_lo, opts.killing_hi);
    }
    if (std::all_of(killing.begin(), killing.end(), [](double c) { return c == 0.0; }) && n > 0) {
      killing[uniform_index(rng, 0, n - 1)] = uniform(rng, opts.killing_lo, opts.killing_hi);
    }
  }
  return Graph::from_indexed(vertex_names(n), edges, std::move(killing));
}

inline Measure random_measure(Rng& rng, std::size_t n, double lo = 0.1, double hi = 10.0) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = uniform(rng, lo, hi);
  return Measure(std::move(m));
}

inline VertexFunction random_function(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  VertexFunction f(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = uniform(rng, lo, hi);
  return f;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Graph and measure carried along `perm` with all weights divided by
/// `scale`: b'(perm x, perm y) = b(x,y)/scale, c'(perm x) = c(x)/scale,
/// m'(perm x) = m(x)/scale.
inline std::pair<Graph, Measure> relabel_scaled(const Graph& g, const Measure& m,
                                                const std::vector<std::size_t>& perm, double scale) {
  std::vector<IndexedEdge> edges;
  for (const auto& e : g.edges()) edges.push_back({perm[e.u], perm[e.v], e.weight / scale});
  std::vector<double> killing(g.size());
  Eigen::VectorXd mm(static_cast<Eigen::Index>(g.size()));
  for (std::size_t x = 0; x < g.size(); ++x) {
    killing[perm[x]] = g.killing(x) / scale;
    mm[static_cast<Eigen::Index>(perm[x])] = m[x] / scale;
  }
  return {Graph::from_indexed(g.vertices(), edges, std::move(killing)), Measure(std::move(mm))};
}

inline Graph make_graph(std::vector<std::string> vertices, const std::vector<EdgeInput>& edges,
                        const std::map<std::string, double>& killing = {}) {
  return validate_graph(std::move(vertices), edges, killing);
}

inline Graph triangle(double w = 1.0) {
  return make_graph({"a", "b", "c"}, {{"a", "b", w}, {"b", "c", w}, {"c", "a", w}});
}

/// Path a - b - c.
inline Graph three_path() { return make_graph({"a", "b", "c"}, {{"a", "b", 1.0}, {"b", "c", 1.0}}); }

/// Vertices "1","2" with b(1,2) = w and killing (c1, c2).
inline Graph two_vertex(double w = 1.0, double c1 = 0.0, double c2 = 0.0) {
  return make_graph({"1", "2"}, {{"1", "2", w}}, {{"1", c1}, {"2", c2}});
}

/// Integers lo..hi joined consecutively with unit weights.
inline Graph integer_path(int lo, int hi) {
  std::vector<std::string> v;
  std::vector<EdgeInput> e;
  for (int k = lo; k <= hi; ++k) {
    v.push_back(std::to_string(k));
    if (k > lo) e.push_back({std::to_string(k - 1), std::to_string(k), 1.0});
  }
  return make_graph(v, e);
}

/// Complete binary tree with unit weights; vertex ids are heap positions
/// "t0001", "t0002", … with root "t0001". Returns the graph and the depth
/// of every vertex in canonical order.
inline std::pair<Graph, std::vector<int>> binary_tree(int depth) {
  const std::size_t count = (std::size_t{1} << (depth + 1)) - 1;
  std::vector<std::string> names;
  std::vector<EdgeInput> edges;
  auto name = [](std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%05zu", k);
    return std::string(buf);
  };
  for (std::size_t k = 1; k <= count; ++k) {
    names.push_back(name(k));
    if (k > 1) edges.push_back({name(k / 2), name(k), 1.0});
  }
  Graph g = make_graph(names, edges);
  std::vector<int> level(g.size());
  for (std::size_t k = 1; k <= count; ++k) {
    int d = 0;
    for (std::size_t j = k; j > 1; j /= 2) ++d;
    level[g.index_of(name(k))] = d;
  }
  return {std::move(g), std::move(level)};
}

/// Star with `leaves` unit edges around "center".
inline Graph star(std::size_t leaves, double center_killing = 0.0) {
  std::vector<std::string> v{"center"};
  std::vector<EdgeInput> e;
  for (std::size_t i = 0; i < leaves; ++i) {
    v.push_back("leaf" + std::to_string(i));
    e.push_back({"center", v.back(), 1.0});
  }
  return make_graph(v, e, {{"center", center_killing}});
}

}  // namespace diffgraph::gen

#endif  // DIFFGRAPH_RANDOM_GRAPHS_HPP_
