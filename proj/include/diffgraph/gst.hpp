#ifndef DIFFGRAPH_GST_HPP_
#define DIFFGRAPH_GST_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/lp.hpp"
#include "diffgraph/operators.hpp"
#include "diffgraph/order_iso.hpp"

namespace diffgraph {

/// Data of a generalized ground state transform: a positive superharmonic
/// h, a bijection τ of the vertex set (`tau[x]` is the index of τ(x)) and a
/// scale β > 0.
struct GstSpec {
  VertexFunction h;
  std::vector<std::size_t> tau;
  double beta = 1.0;

  static GstSpec identity(std::size_t n) {
    GstSpec s;
    s.h = VertexFunction::Ones(static_cast<Eigen::Index>(n));
    s.tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.tau[i] = i;
    return s;
  }
};

struct TransformedGraph {
  Graph graph;
  Measure measure;
};

inline void validate_spec(const Graph& g, const GstSpec& spec) {
  if (static_cast<std::size_t>(spec.h.size()) != g.size() || spec.tau.size() != g.size()) {
    throw Error(ErrorCode::DimensionMismatch, "spec size differs from vertex count");
  }
  if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) {
    throw Error(ErrorCode::NotPositive, "beta must be positive");
  }
  for (Eigen::Index i = 0; i < spec.h.size(); ++i) {
    if (!(spec.h[i] > 0.0) || !std::isfinite(spec.h[i])) {
      throw Error(ErrorCode::NotPositive, "h must be strictly positive at " + g.vertex(static_cast<std::size_t>(i)));
    }
  }
  std::vector<bool> hit(g.size(), false);
  for (auto t : spec.tau) {
    if (t >= g.size() || hit[t]) throw Error(ErrorCode::NotBijective, "tau is not a bijection");
    hit[t] = true;
  }
  if (!is_superharmonic(g, spec.h)) {
    throw Error(ErrorCode::NotSuperharmonic, "h violates Lh >= 0");
  }
}

/// (b_h, c_h, m_h) with m_h(τw) = β h(w)² m(w), b_h(τx,τy) = β h(x) h(y) b(x,y)
/// and c_h(τz) = β h(z) ℒh(z). Killing values inside the sign tolerance are
/// clamped to zero.
inline TransformedGraph ground_state_transform(const Graph& g, const Measure& m,
                                               const GstSpec& spec) {
  check_measure(g, m);
  validate_spec(g, spec);
  const std::size_t n = g.size();
  const VertexFunction lh = formal_laplacian(g, spec.h);
  Eigen::VectorXd mh(static_cast<Eigen::Index>(n));
  std::vector<double> ch(n, 0.0);
  for (std::size_t z = 0; z < n; ++z) {
    const auto zi = static_cast<Eigen::Index>(z);
    const auto tz = static_cast<Eigen::Index>(spec.tau[z]);
    mh[tz] = spec.beta * spec.h[zi] * spec.h[zi] * m[z];
    ch[spec.tau[z]] = std::max(0.0, spec.beta * spec.h[zi] * lh[zi]);
  }
  std::vector<IndexedEdge> edges;
  for (const auto& e : g.edges()) {
    const double w = spec.beta * spec.h[static_cast<Eigen::Index>(e.u)] *
                     spec.h[static_cast<Eigen::Index>(e.v)] * e.weight;
    edges.push_back({spec.tau[e.u], spec.tau[e.v], w});
  }
  return {Graph::from_indexed(g.vertices(), edges, std::move(ch)), Measure(std::move(mh))};
}

struct GstIntertwiner {
  TransformedGraph transformed;
  OrderIso iso;
  IntertwinerCertificate certificate;
};

/// The canonical map U: ℓ²(X, m_h) → ℓ²(X, m), f ↦ h·(f∘τ), certified
/// against the transformed graph.
inline GstIntertwiner gst_intertwiner(const Graph& g, const Measure& m, const GstSpec& spec,
                                      double tolerance = kCertificateTolerance) {
  GstIntertwiner out{ground_state_transform(g, m, spec), OrderIso{spec.tau, spec.h}, {}};
  out.certificate = verify_structure_equations(out.transformed.graph, out.transformed.measure, g,
                                               m, out.iso, spec.beta, tolerance);
  return out;
}

inline constexpr double kSuperharmonicFloor = 1e-6;
inline constexpr double kSuperharmonicCap = 1e6;
inline constexpr double kNonconstantThreshold = 1.0 + 1e-6;
inline constexpr double kStrictMargin = 1e-8;

namespace detail {

/// maximize h(top) subject to ℒh(x) ≥ margin·(deg(x) + c(x)), h(pinned) = 1,
/// floor ≤ h ≤ cap. Variables are shifted to s = h - floor ≥ 0.
inline std::optional<VertexFunction> superharmonic_lp(const Graph& g, const Eigen::MatrixXd& lap,
                                                      std::size_t pinned, std::size_t top,
                                                      double margin = 0.0) {
  const auto n = static_cast<Eigen::Index>(g.size());
  lp::Problem p;
  p.rows = Eigen::MatrixXd::Zero(2 * n + 1, n);
  p.rhs = Eigen::VectorXd::Zero(2 * n + 1);
  p.sense.assign(static_cast<std::size_t>(2 * n + 1), lp::Sense::GreaterEqual);
  const Eigen::VectorXd floor_image = lap * Eigen::VectorXd::Constant(n, kSuperharmonicFloor);
  p.rows.topRows(n) = lap;
  p.rhs.head(n) = -floor_image;
  for (Eigen::Index i = 0; i < n; ++i) p.rhs[i] += margin * lap(i, i);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.rows(n + i, i) = 1.0;
    p.rhs[n + i] = kSuperharmonicCap - kSuperharmonicFloor;
    p.sense[static_cast<std::size_t>(n + i)] = lp::Sense::LessEqual;
  }
  p.rows(2 * n, static_cast<Eigen::Index>(pinned)) = 1.0;
  p.rhs[2 * n] = 1.0 - kSuperharmonicFloor;
  p.sense[static_cast<std::size_t>(2 * n)] = lp::Sense::Equal;
  p.objective = Eigen::VectorXd::Zero(n);
  p.objective[static_cast<Eigen::Index>(top)] = 1.0;
  const auto sol = lp::solve(p);
  if (sol.status != lp::Status::Optimal) return std::nullopt;
  return VertexFunction(sol.x.array() + kSuperharmonicFloor);
}

}  // namespace detail

/// Searches for a strictly positive superharmonic function. With
/// `require_nonconstant`, runs the LP family over ordered vertex pairs and
/// returns the first h with h(v₁) above the nonconstancy threshold; the LP
/// optimum is pulled toward the constant 1 (a convex combination inside the
/// superharmonic cone) so that max h - min h ≤ 1. Returns nullopt when only
/// constants qualify.
///
/// When simplex roundoff leaves ℒh slightly negative, the pair is retried
/// asking for a small strictly positive ℒh (possible only with killing).
inline std::optional<VertexFunction> find_positive_superharmonic(const Graph& g,
                                                                 bool require_nonconstant) {
  const std::size_t n = g.size();
  const VertexFunction ones = VertexFunction::Ones(static_cast<Eigen::Index>(n));
  if (!require_nonconstant && !g.has_killing()) return ones;
  if (n < 2) return require_nonconstant ? std::nullopt : std::optional<VertexFunction>(ones);

  const Eigen::MatrixXd lap = formal_laplacian_matrix(g);
  bool any_feasible = false;
  auto attempt = [&](std::size_t v0, std::size_t v1, double margin) -> std::optional<VertexFunction> {
    const auto opt = detail::superharmonic_lp(g, lap, v0, v1, margin);
    if (!opt) return std::nullopt;
    any_feasible = true;
    const VertexFunction& h = *opt;
    if (!(h[static_cast<Eigen::Index>(v1)] > kNonconstantThreshold)) return std::nullopt;
    const double spread = h.maxCoeff() - h.minCoeff();
    const double lambda = spread > 1.0 ? 1.0 / spread : 1.0;
    VertexFunction mixed = ones + lambda * (h - ones);
    if (mixed[static_cast<Eigen::Index>(v1)] > kNonconstantThreshold && (mixed.array() > 0.0).all() &&
        is_superharmonic(g, mixed)) {
      return mixed;
    }
    return std::nullopt;
  };
  for (std::size_t v0 = 0; v0 < n; ++v0) {
    for (std::size_t v1 = 0; v1 < n; ++v1) {
      if (v0 == v1) continue;
      if (auto h = attempt(v0, v1, 0.0)) return h;
      if (g.has_killing()) {
        if (auto h = attempt(v0, v1, kStrictMargin)) return h;
      }
    }
  }
  if (!any_feasible) throw Error(ErrorCode::LpInfeasible, "no superharmonic LP was feasible");
  if (require_nonconstant) return std::nullopt;
  return ones;
}

struct CounterexampleReport {
  IntertwinerCertificate certificate;
  double max_relative_difference_b = 0.0;
  double max_relative_difference_c = 0.0;
  double max_relative_difference_m = 0.0;

  double max_relative_difference() const {
    return std::max({max_relative_difference_b, max_relative_difference_c,
                     max_relative_difference_m});
  }
};

struct Counterexample {
  Graph graph;
  Measure measure;
  OrderIso iso;
  CounterexampleReport report;
};

/// Two genuinely different graphs whose diffusions are order equivalent,
/// built by a ground state transform with a nonconstant positive
/// superharmonic h (τ = id, β = 1). Returns nullopt when no such h exists.
/// Relative differences are measured against the original value, or
/// against the larger of the two when the original vanishes.
inline std::optional<Counterexample> counterexample_pair(const Graph& g, const Measure& m) {
  check_measure(g, m);
  if (!is_connected(g)) throw Error(ErrorCode::NotConnected, "graph must be connected");
  auto h = find_positive_superharmonic(g, true);
  if (!h) return std::nullopt;
  GstSpec spec = GstSpec::identity(g.size());
  spec.h = *h;
  auto gi = gst_intertwiner(g, m, spec);

  auto rel = [](double before, double after) {
    const double denom = before != 0.0 ? std::abs(before) : std::abs(after);
    return denom == 0.0 ? 0.0 : std::abs(after - before) / denom;
  };
  CounterexampleReport rep;
  rep.certificate = gi.certificate;
  const Graph& g2 = gi.transformed.graph;
  for (std::size_t x = 0; x < g.size(); ++x) {
    rep.max_relative_difference_m =
        std::max(rep.max_relative_difference_m, rel(m[x], gi.transformed.measure[x]));
    rep.max_relative_difference_c =
        std::max(rep.max_relative_difference_c, rel(g.killing(x), g2.killing(x)));
    for (const auto& nb : g.neighbors(x)) {
      rep.max_relative_difference_b =
          std::max(rep.max_relative_difference_b, rel(nb.weight, g2.weight(x, nb.index)));
    }
  }
  return Counterexample{g2, gi.transformed.measure, gi.iso, rep};
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_GST_HPP_
