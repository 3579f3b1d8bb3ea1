#ifndef DIFFGRAPH_GRAPH_HPP_
#define DIFFGRAPH_GRAPH_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"

namespace diffgraph {

/// Absolute slack used by every sign or inequality test on exact formulas.
inline constexpr double kSignTolerance = 1e-12;

/// Real-valued function on the vertices, indexed in canonical vertex order.
using VertexFunction = Eigen::VectorXd;

struct EdgeInput {
  std::string u;
  std::string v;
  double weight = 0.0;
};

struct IndexedEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

struct Neighbor {
  std::size_t index = 0;
  double weight = 0.0;
};

/// A finite graph (b, c): symmetric nonnegative edge weights b with zero
/// diagonal and a nonnegative killing term c. Vertices are kept in
/// lexicographic order and every per-vertex quantity in the library is
/// indexed by that order.
class Graph {
 public:
  Graph() = default;

  /// Builds from vertices already in canonical order. Each unordered pair may
  /// appear at most once in `edges`; zero weights are dropped.
  static Graph from_indexed(std::vector<std::string> vertices,
                            std::span<const IndexedEdge> edges,
                            std::vector<double> killing) {
    const std::size_t n = vertices.size();
    if (!std::is_sorted(vertices.begin(), vertices.end())) {
      throw Error(ErrorCode::InvalidArgument, "vertices must be in canonical order");
    }
    if (std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end()) {
      throw Error(ErrorCode::DuplicateVertex, "duplicate vertex id");
    }
    if (killing.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "killing vector size differs from vertex count");
    }
    Graph g;
    g.vertices_ = std::move(vertices);
    g.adjacency_.assign(n, {});
    g.killing_ = std::move(killing);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = g.killing_[i];
      if (!std::isfinite(c)) {
        throw Error(ErrorCode::NonFiniteValue, "killing of " + g.vertices_[i]);
      }
      if (c < 0.0) {
        throw Error(ErrorCode::NegativeKilling, "killing of " + g.vertices_[i]);
      }
    }
    for (const auto& e : edges) {
      if (e.u >= n || e.v >= n) {
        throw Error(ErrorCode::UnknownVertex, "edge endpoint index out of range");
      }
      if (!std::isfinite(e.weight)) {
        throw Error(ErrorCode::NonFiniteValue, "edge weight");
      }
      if (e.weight < 0.0) {
        throw Error(ErrorCode::NegativeWeight,
                    g.vertices_[e.u] + "-" + g.vertices_[e.v]);
      }
      if (e.u == e.v) {
        if (e.weight > 0.0) {
          throw Error(ErrorCode::SelfLoop, g.vertices_[e.u]);
        }
        continue;
      }
      if (e.weight == 0.0) continue;
      g.adjacency_[e.u].push_back({e.v, e.weight});
      g.adjacency_[e.v].push_back({e.u, e.weight});
    }
    for (auto& row : g.adjacency_) {
      std::sort(row.begin(), row.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
      for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k].index == row[k - 1].index) {
          throw Error(ErrorCode::DuplicateEdge, "pair listed twice");
        }
      }
    }
    return g;
  }

  std::size_t size() const noexcept { return vertices_.size(); }
  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::string& vertex(std::size_t i) const { return vertices_.at(i); }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id);
    if (it == vertices_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - vertices_.begin());
  }

  std::size_t index_of(const std::string& id) const {
    auto idx = find(id);
    if (!idx) throw Error(ErrorCode::UnknownVertex, id);
    return *idx;
  }

  std::span<const Neighbor> neighbors(std::size_t i) const { return adjacency_.at(i); }

  double weight(std::size_t i, std::size_t j) const {
    const auto& row = adjacency_.at(i);
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Neighbor& a, std::size_t k) { return a.index < k; });
    return (it != row.end() && it->index == j) ? it->weight : 0.0;
  }

  double killing(std::size_t i) const { return killing_.at(i); }
  const std::vector<double>& killing() const noexcept { return killing_; }

  bool has_killing() const {
    return std::any_of(killing_.begin(), killing_.end(), [](double c) { return c != 0.0; });
  }

  /// Σ_y b(x,y).
  double weighted_degree(std::size_t i) const {
    double s = 0.0;
    for (const auto& nb : adjacency_.at(i)) s += nb.weight;
    return s;
  }

  /// Each unordered edge once, with u < v.
  std::vector<IndexedEdge> edges() const {
    std::vector<IndexedEdge> out;
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& nb : adjacency_[i]) {
        if (i < nb.index) out.push_back({i, nb.index, nb.weight});
      }
    }
    return out;
  }

  Eigen::MatrixXd dense_weights() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size(), size());
    for (std::size_t i = 0; i < size(); ++i) {
      for (const auto& nb : adjacency_[i]) b(i, nb.index) = nb.weight;
    }
    return b;
  }

 private:
  std::vector<std::string> vertices_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> killing_;
};

/// Strictly positive vertex weights.
class Measure {
 public:
  Measure() = default;

  explicit Measure(Eigen::VectorXd values) : values_(std::move(values)) {
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw Error(ErrorCode::NonFiniteValue, "measure entry");
      if (values_[i] <= 0.0) {
        throw Error(ErrorCode::NonPositiveMeasure, "measure entry " + std::to_string(i));
      }
    }
  }

  static Measure uniform(std::size_t n, double value = 1.0) {
    return Measure(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), value));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& values() const noexcept { return values_; }

 private:
  Eigen::VectorXd values_;
};

/// A nonnegative distance or +infinity between different components.
class ExtendedDistance {
 public:
  constexpr ExtendedDistance() = default;
  constexpr explicit ExtendedDistance(double value) : value_(value) {}

  static constexpr ExtendedDistance infinite() {
    return ExtendedDistance(std::numeric_limits<double>::infinity());
  }

  constexpr bool is_infinite() const { return value_ == std::numeric_limits<double>::infinity(); }
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(ExtendedDistance, ExtendedDistance) = default;

 private:
  double value_ = 0.0;
};

inline void check_measure(const Graph& g, const Measure& m) {
  if (m.size() != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "measure size differs from vertex count");
  }
}

inline void check_function(const Graph& g, const VertexFunction& f) {
  if (static_cast<std::size_t>(f.size()) != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "function size differs from vertex count");
  }
}

/// Validates an edge list against the graph axioms and returns the graph in
/// canonical storage. A pair given in both orientations with equal weights
/// is accepted as one symmetric edge.
inline Graph validate_graph(std::vector<std::string> vertices, std::span<const EdgeInput> edges,
                            const std::map<std::string, double>& killing = {}) {
  std::sort(vertices.begin(), vertices.end());
  if (std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end()) {
    throw Error(ErrorCode::DuplicateVertex, *std::adjacent_find(vertices.begin(), vertices.end()));
  }
  auto lookup = [&](const std::string& id) {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), id);
    if (it == vertices.end() || *it != id) throw Error(ErrorCode::UnknownVertex, id);
    return static_cast<std::size_t>(it - vertices.begin());
  };

  struct Seen {
    double weight;
    bool forward;
  };
  std::map<std::pair<std::size_t, std::size_t>, Seen> seen;
  std::vector<IndexedEdge> indexed;
  for (const auto& e : edges) {
    const std::size_t u = lookup(e.u);
    const std::size_t v = lookup(e.v);
    if (!std::isfinite(e.weight)) throw Error(ErrorCode::NonFiniteValue, e.u + "-" + e.v);
    if (e.weight < 0.0) throw Error(ErrorCode::NegativeWeight, e.u + "-" + e.v);
    if (u == v) {
      if (e.weight > 0.0) throw Error(ErrorCode::SelfLoop, e.u);
      continue;
    }
    const auto key = std::minmax(u, v);
    const bool forward = u < v;
    auto [it, inserted] = seen.try_emplace({key.first, key.second}, Seen{e.weight, forward});
    if (!inserted) {
      if (it->second.forward == forward) {
        throw Error(ErrorCode::DuplicateEdge, e.u + "-" + e.v);
      }
      if (it->second.weight != e.weight) {
        throw Error(ErrorCode::AsymmetricInput, e.u + "-" + e.v);
      }
      continue;
    }
    indexed.push_back({key.first, key.second, e.weight});
  }

  std::vector<double> c(vertices.size(), 0.0);
  for (const auto& [id, value] : killing) c[lookup(id)] = value;
  return Graph::from_indexed(std::move(vertices), indexed, std::move(c));
}

/// Component label per vertex; labels are numbered in order of the smallest
/// vertex of each component.
inline std::vector<std::size_t> component_labels(const Graph& g) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> label(g.size(), unset);
  std::size_t next = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (label[s] != unset) continue;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(x)) {
        if (label[nb.index] == unset) {
          label[nb.index] = next;
          stack.push_back(nb.index);
        }
      }
    }
    ++next;
  }
  return label;
}

inline std::vector<std::vector<std::size_t>> connected_components(const Graph& g) {
  const auto label = component_labels(g);
  std::size_t count = 0;
  for (auto l : label) count = std::max(count, l + 1);
  std::vector<std::vector<std::size_t>> blocks(count);
  for (std::size_t i = 0; i < g.size(); ++i) blocks[label[i]].push_back(i);
  return blocks;
}

inline bool is_connected(const Graph& g) { return connected_components(g).size() <= 1; }

/// Breadth-first edge counts from `source`; +inf for unreachable vertices.
inline std::vector<double> combinatorial_distances_from(const Graph& g, std::size_t source) {
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  std::queue<std::size_t> queue;
  dist.at(source) = 0.0;
  queue.push(source);
  while (!queue.empty()) {
    const std::size_t x = queue.front();
    queue.pop();
    for (const auto& nb : g.neighbors(x)) {
      if (std::isinf(dist[nb.index])) {
        dist[nb.index] = dist[x] + 1.0;
        queue.push(nb.index);
      }
    }
  }
  return dist;
}

inline ExtendedDistance combinatorial_distance(const Graph& g, const std::string& x,
                                               const std::string& y) {
  const std::size_t i = g.index_of(x);
  const std::size_t j = g.index_of(y);
  return ExtendedDistance(combinatorial_distances_from(g, i)[j]);
}

/// Deg(x) = (Σ_y b(x,y) + c(x)) / m(x).
inline double generalized_degree(const Graph& g, const Measure& m, std::size_t x) {
  check_measure(g, m);
  return (g.weighted_degree(x) + g.killing(x)) / m[x];
}

inline double generalized_degree(const Graph& g, const Measure& m, const std::string& x) {
  return generalized_degree(g, m, g.index_of(x));
}

inline Eigen::VectorXd degree_vector(const Graph& g, const Measure& m) {
  check_measure(g, m);
  Eigen::VectorXd deg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) deg[i] = generalized_degree(g, m, i);
  return deg;
}

/// n(x) = Σ_y b(x,y) + c(x), the measure for which Deg ≡ 1.
inline Measure normalizing_measure(const Graph& g) {
  Eigen::VectorXd n(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    n[i] = g.weighted_degree(i) + g.killing(i);
    if (n[i] <= 0.0) throw Error(ErrorCode::IsolatedUnkilledVertex, g.vertex(i));
  }
  return Measure(std::move(n));
}

/// Σ_{x,y} b(x,y) + Σ_x c(x), summing over ordered pairs.
inline double total_edge_weight(const Graph& g) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) total += g.weighted_degree(i) + g.killing(i);
  return total;
}

/// Edge length min{Deg(u)^{-1/2}, Deg(v)^{-1/2}} of the degree path pseudo metric.
/// Both endpoints of an edge have Deg > 0, so the length is always finite.
inline double degree_path_edge_length(double deg_u, double deg_v) {
  return std::min(1.0 / std::sqrt(deg_u), 1.0 / std::sqrt(deg_v));
}

/// Dijkstra from `source` with degree path edge lengths; +inf off the component.
/// Ties are settled by the lexicographically smaller vertex.
inline std::vector<double> degree_path_distances_from(const Graph& g, const Measure& m,
                                                std::size_t source) {
  const Eigen::VectorXd deg = degree_vector(g, m);
  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> done(g.size(), false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist.at(source) = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, x] = heap.top();
    heap.pop();
    if (done[x]) continue;
    done[x] = true;
    for (const auto& nb : g.neighbors(x)) {
      const double candidate = d + degree_path_edge_length(deg[x], deg[nb.index]);
      if (candidate < dist[nb.index]) {
        dist[nb.index] = candidate;
        heap.emplace(candidate, nb.index);
      }
    }
  }
  return dist;
}

inline ExtendedDistance degree_path_metric(const Graph& g, const Measure& m, const std::string& x,
                                     const std::string& y) {
  const std::size_t i = g.index_of(x);
  const std::size_t j = g.index_of(y);
  return ExtendedDistance(degree_path_distances_from(g, m, i)[j]);
}

enum class MetricKind { Combinatorial, DegreePath };

/// All-pairs distance matrix (+inf across components).
inline Eigen::MatrixXd distance_matrix(const Graph& g, const Measure& m, MetricKind kind) {
  Eigen::MatrixXd d(g.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto row = kind == MetricKind::Combinatorial ? combinatorial_distances_from(g, i)
                                                       : degree_path_distances_from(g, m, i);
    for (std::size_t j = 0; j < g.size(); ++j) d(i, j) = row[j];
  }
  return d;
}

struct IntrinsicReport {
  bool intrinsic = true;
  std::size_t worst_vertex = 0;
  double worst_slack = 0.0;
  /// m(x) - Σ_y b(x,y) δ(x,y)² per vertex.
  Eigen::VectorXd slack;
};

/// Checks Σ_y b(x,y) δ(x,y)² ≤ m(x) at every vertex. Only pairs with
/// b(x,y) > 0 are read from `delta`, so infinite entries across components
/// are harmless.
inline IntrinsicReport is_intrinsic(const Graph& g, const Measure& m, const Eigen::MatrixXd& delta) {
  check_measure(g, m);
  if (static_cast<std::size_t>(delta.rows()) != g.size() ||
      static_cast<std::size_t>(delta.cols()) != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "pseudo metric matrix shape");
  }
  IntrinsicReport report;
  report.slack.resize(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    double sum = 0.0;
    for (const auto& nb : g.neighbors(x)) {
      const double dxy = delta(x, nb.index);
      sum += nb.weight * dxy * dxy;
    }
    report.slack[x] = m[x] - sum;
    if (x == 0 || report.slack[x] < report.worst_slack) {
      report.worst_slack = report.slack[x];
      report.worst_vertex = x;
    }
  }
  report.intrinsic = g.size() == 0 || report.worst_slack >= -kSignTolerance;
  return report;
}

/// ‖∇f(x)‖² = (1/m(x)) Σ_y b(x,y) |f(x) - f(y)|².
inline double gradient_norm_squared(const Graph& g, const Measure& m, const VertexFunction& f,
                                    std::size_t x) {
  check_measure(g, m);
  check_function(g, f);
  double sum = 0.0;
  for (const auto& nb : g.neighbors(x)) {
    const double diff = f[x] - f[nb.index];
    sum += nb.weight * diff * diff;
  }
  return sum / m[x];
}

inline double gradient_norm(const Graph& g, const Measure& m, const VertexFunction& f,
                            std::size_t x) {
  return std::sqrt(gradient_norm_squared(g, m, f, x));
}

/// Membership in the set of functions with ‖∇f‖ ≤ 1 at every vertex.
inline bool in_gradient_unit_ball(const Graph& g, const Measure& m, const VertexFunction& f) {
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (gradient_norm_squared(g, m, f, x) > 1.0 + kSignTolerance) return false;
  }
  return true;
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_GRAPH_HPP_
