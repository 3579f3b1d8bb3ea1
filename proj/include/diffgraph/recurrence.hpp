#ifndef DIFFGRAPH_RECURRENCE_HPP_
#define DIFFGRAPH_RECURRENCE_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/gst.hpp"
#include "diffgraph/operators.hpp"

namespace diffgraph {

enum class Recurrence { Recurrent, Transient };

inline constexpr std::string_view to_string(Recurrence r) {
  return r == Recurrence::Recurrent ? "Recurrent" : "Transient";
}

struct ComponentVerdict {
  std::vector<std::size_t> vertices;
  Recurrence verdict = Recurrence::Recurrent;
};

/// A finite component is recurrent exactly when the killing term vanishes
/// on it.
inline std::vector<ComponentVerdict> classify_finite(const Graph& g) {
  std::vector<ComponentVerdict> out;
  for (auto& block : connected_components(g)) {
    const bool killed = std::any_of(block.begin(), block.end(),
                                    [&](std::size_t v) { return g.killing(v) != 0.0; });
    out.push_back({std::move(block), killed ? Recurrence::Transient : Recurrence::Recurrent});
  }
  return out;
}

/// Nested vertex sets X₁ ⊂ X₂ ⊂ … of a finite host graph, all containing o.
struct Exhaustion {
  Graph host;
  std::size_t root = 0;
  std::vector<std::vector<std::size_t>> subsets;

  void validate() const {
    if (root >= host.size()) throw Error(ErrorCode::InvalidExhaustion, "root outside host");
    std::vector<bool> previous(host.size(), false);
    std::size_t previous_size = 0;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
      std::vector<bool> member(host.size(), false);
      for (auto v : subsets[k]) {
        if (v >= host.size()) throw Error(ErrorCode::InvalidExhaustion, "vertex outside host");
        if (member[v]) throw Error(ErrorCode::InvalidExhaustion, "repeated vertex in subset");
        member[v] = true;
      }
      if (!member[root]) throw Error(ErrorCode::InvalidExhaustion, "subset misses the root");
      for (std::size_t v = 0; v < host.size(); ++v) {
        if (previous[v] && !member[v]) throw Error(ErrorCode::InvalidExhaustion, "subsets not nested");
      }
      if (k > 0 && subsets[k].size() <= previous_size) {
        throw Error(ErrorCode::InvalidExhaustion, "nesting is not strict");
      }
      previous = std::move(member);
      previous_size = subsets[k].size();
    }
  }
};

enum class Trend { RecurrentTrend, TransientTrend, Inconclusive };

inline constexpr std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::RecurrentTrend: return "RecurrentTrend";
    case Trend::TransientTrend: return "TransientTrend";
    case Trend::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct CapacityReport {
  std::vector<double> caps;
  Trend verdict = Trend::Inconclusive;
  /// Least-squares fit cap_n ≈ intercept + slope / n over the subset index n.
  double fit_intercept = 0.0;
  double fit_slope = 0.0;
  double fit_r_squared = 0.0;
};

inline constexpr double kRecurrentDropFactor = 0.05;
inline constexpr double kTransientBand = 0.02;
inline constexpr double kTransientFloor = 1e-3;
inline constexpr double kRecurrentFitR2 = 0.9;
inline constexpr std::size_t kDirectSolveLimit = 500;

namespace detail {

/// Equilibrium potential of o inside `subset`: φ(o) = 1, φ = 0 outside the
/// interior of the subset (vertices of the subset all of whose neighbours
/// lie in it, plus o itself), ℒφ = 0 at the other interior vertices.
/// Returns 𝒬(φ).
inline double point_capacity(const Graph& g, std::size_t root, const std::vector<std::size_t>& subset) {
  std::vector<bool> member(g.size(), false);
  for (auto v : subset) member[v] = true;
  std::vector<long> local(g.size(), -1);
  std::vector<std::size_t> free;
  for (auto v : subset) {
    if (v == root) continue;
    bool interior = true;
    for (const auto& nb : g.neighbors(v)) interior = interior && member[nb.index];
    if (interior) {
      local[v] = static_cast<long>(free.size());
      free.push_back(v);
    }
  }
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::size_t v = free[static_cast<std::size_t>(i)];
    double diag = g.killing(v);
    for (const auto& nb : g.neighbors(v)) {
      diag += nb.weight;
      if (nb.index == root) {
        rhs[i] += nb.weight;
      } else if (local[nb.index] >= 0) {
        triplets.emplace_back(i, local[nb.index], -nb.weight);
      }
    }
    triplets.emplace_back(i, i, diag);
  }
  Eigen::VectorXd interior_values;
  if (k > 0) {
    if (free.size() <= kDirectSolveLimit) {
      Eigen::SparseMatrix<double> a(k, k);
      a.setFromTriplets(triplets.begin(), triplets.end());
      const Eigen::MatrixXd dense(a);
      const Eigen::LLT<Eigen::MatrixXd> llt(dense);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "harmonic extension is not positive definite");
      }
      interior_values = llt.solve(rhs);
    } else {
      Eigen::SparseMatrix<double> a(k, k);
      a.setFromTriplets(triplets.begin(), triplets.end());
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(1e-14);
      cg.setMaxIterations(20 * k);
      cg.compute(a);
      interior_values = cg.solve(rhs);
      if (cg.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "conjugate gradient did not converge");
      }
    }
  }
  VertexFunction phi = VertexFunction::Zero(static_cast<Eigen::Index>(g.size()));
  phi[static_cast<Eigen::Index>(root)] = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    phi[static_cast<Eigen::Index>(free[static_cast<std::size_t>(i)])] = interior_values[i];
  }
  return quadratic_form(g, phi);
}

}  // namespace detail

/// Capacity of the root along the exhaustion and a labelled trend verdict.
/// The verdict is a heuristic on finitely many values; the raw capacities are
/// always reported.
inline CapacityReport capacity_sequence(const Exhaustion& ex) {
  ex.validate();
  CapacityReport rep;
  for (const auto& subset : ex.subsets) rep.caps.push_back(detail::point_capacity(ex.host, ex.root, subset));
  const std::size_t count = rep.caps.size();
  if (count == 0) return rep;

  // cap_n ≈ a + b/n
  if (count >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const double x = 1.0 / static_cast<double>(i + 1);
      const double y = rep.caps[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double nn = static_cast<double>(count);
    const double denom = nn * sxx - sx * sx;
    rep.fit_slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
    rep.fit_intercept = (sy - rep.fit_slope * sx) / nn;
    double ss_tot = 0, ss_res = 0;
    const double mean = sy / nn;
    for (std::size_t i = 0; i < count; ++i) {
      const double pred = rep.fit_intercept + rep.fit_slope / static_cast<double>(i + 1);
      ss_res += (rep.caps[i] - pred) * (rep.caps[i] - pred);
      ss_tot += (rep.caps[i] - mean) * (rep.caps[i] - mean);
    }
    rep.fit_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  }

  const double first = rep.caps.front();
  const double last = rep.caps.back();
  if (count >= 3) {
    const auto tail = std::vector<double>(rep.caps.end() - 3, rep.caps.end());
    const double hi = *std::max_element(tail.begin(), tail.end());
    const double lo = *std::min_element(tail.begin(), tail.end());
    if (lo > kTransientFloor && hi - lo <= kTransientBand * hi) {
      rep.verdict = Trend::TransientTrend;
      return rep;
    }
  }
  if (count >= 2 && last < kRecurrentDropFactor * first && rep.fit_r_squared >= kRecurrentFitR2) {
    rep.verdict = Trend::RecurrentTrend;
  }
  return rep;
}

struct LiouvilleResult {
  bool recurrent = false;
  bool only_constant_superharmonic = false;

  bool consistent() const { return recurrent == only_constant_superharmonic; }
};

/// Compares the recurrence verdict with the absence of nonconstant positive
/// superharmonic functions, each computed independently.
inline LiouvilleResult liouville_check(const Graph& g) {
  if (!is_connected(g)) throw Error(ErrorCode::HypothesisViolated, "graph must be connected");
  if (g.has_killing()) throw Error(ErrorCode::HypothesisViolated, "killing term must vanish");
  LiouvilleResult r;
  const auto verdicts = classify_finite(g);
  r.recurrent = verdicts.size() == 1 && verdicts.front().verdict == Recurrence::Recurrent;
  r.only_constant_superharmonic = !find_positive_superharmonic(g, true).has_value();
  return r;
}

struct TotalWeightVerdict {
  Recurrence verdict = Recurrence::Recurrent;
  double total_edge_weight = 0.0;
  std::string justification;
};

inline TotalWeightVerdict finite_total_weight_verdict(const Graph& g) {
  if (!is_connected(g)) throw Error(ErrorCode::HypothesisViolated, "graph must be connected");
  if (g.has_killing()) throw Error(ErrorCode::HypothesisViolated, "killing term must vanish");
  TotalWeightVerdict v;
  v.total_edge_weight = total_edge_weight(g);
  v.justification =
      "connected, no killing, finite total edge weight n(X) = " + std::to_string(v.total_edge_weight) +
      " implies recurrence";
  const auto check = classify_finite(g);
  if (check.size() != 1 || check.front().verdict != Recurrence::Recurrent) {
    throw Error(ErrorCode::HypothesisViolated, "finite classification disagrees");
  }
  return v;
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_RECURRENCE_HPP_
