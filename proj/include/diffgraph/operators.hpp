#ifndef DIFFGRAPH_OPERATORS_HPP_
#define DIFFGRAPH_OPERATORS_HPP_

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"

namespace diffgraph {

/// Largest vertex count for which dense matrices are materialized.
inline constexpr std::size_t kDenseLimit = 2000;

inline void check_dense_size(const Graph& g) {
  if (g.size() > kDenseLimit) {
    throw Error(ErrorCode::SizeLimit,
                std::to_string(g.size()) + " vertices exceeds dense limit " +
                    std::to_string(kDenseLimit));
  }
}

/// ℒf(x) = Σ_y b(x,y)(f(x) - f(y)) + c(x) f(x).
inline VertexFunction formal_laplacian(const Graph& g, const VertexFunction& f) {
  check_function(g, f);
  VertexFunction out(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    double s = g.killing(x) * f[x];
    for (const auto& nb : g.neighbors(x)) s += nb.weight * (f[x] - f[nb.index]);
    out[x] = s;
  }
  return out;
}

/// The operator L = ℒ/m over the canonical vertex order.
struct LaplacianMatrix {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd measure;

  /// M^{1/2} L M^{-1/2}, real symmetric with the spectrum of L.
  Eigen::MatrixXd symmetrized() const {
    const Eigen::VectorXd s = measure.cwiseSqrt();
    Eigen::MatrixXd out = s.asDiagonal() * matrix * s.cwiseInverse().asDiagonal();
    return 0.5 * (out + out.transpose());
  }
};

/// Dense matrix of ℒ itself (symmetric, measure free).
inline Eigen::MatrixXd formal_laplacian_matrix(const Graph& g) {
  check_dense_size(g);
  const std::size_t n = g.size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    double diag = g.killing(x);
    for (const auto& nb : g.neighbors(x)) {
      l(x, nb.index) = -nb.weight;
      diag += nb.weight;
    }
    l(x, x) = diag;
  }
  return l;
}

inline LaplacianMatrix laplacian_matrix(const Graph& g, const Measure& m) {
  check_measure(g, m);
  LaplacianMatrix out;
  out.measure = m.values();
  out.matrix = m.values().cwiseInverse().asDiagonal() * formal_laplacian_matrix(g);
  return out;
}

/// Polarized energy 𝒬(f,g) = ½ Σ_{x,y} b(x,y)(f(x)-f(y))(g(x)-g(y)) + Σ_x c(x) f(x) g(x).
inline double quadratic_form(const Graph& g, const VertexFunction& f, const VertexFunction& h) {
  check_function(g, f);
  check_function(g, h);
  double q = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) {
    q += g.killing(x) * f[x] * h[x];
    for (const auto& nb : g.neighbors(x)) {
      if (x < nb.index) q += nb.weight * (f[x] - f[nb.index]) * (h[x] - h[nb.index]);
    }
  }
  return q;
}

inline double quadratic_form(const Graph& g, const VertexFunction& f) {
  return quadratic_form(g, f, f);
}

/// ⟨f, h⟩_m = Σ_x f(x) h(x) m(x).
inline double inner_product(const Measure& m, const VertexFunction& f, const VertexFunction& h) {
  return (f.array() * h.array() * m.values().array()).sum();
}

inline double weighted_norm(const Measure& m, const VertexFunction& f) {
  return std::sqrt(inner_product(m, f, f));
}

/// |𝒬(f,v) - ⟨f, Lv⟩_m| + |𝒬(f,v) - ⟨Lf, v⟩_m| with L = ℒ/m.
inline double greens_formula_residual(const Graph& g, const Measure& m, const VertexFunction& f,
                                      const VertexFunction& v) {
  check_measure(g, m);
  const double q = quadratic_form(g, f, v);
  const VertexFunction lv = formal_laplacian(g, v).cwiseQuotient(m.values());
  const VertexFunction lf = formal_laplacian(g, f).cwiseQuotient(m.values());
  return std::abs(q - inner_product(m, f, lv)) + std::abs(q - inner_product(m, lf, v));
}

inline bool is_superharmonic(const Graph& g, const VertexFunction& f) {
  return (formal_laplacian(g, f).array() >= -kSignTolerance).all();
}

inline bool is_harmonic(const Graph& g, const VertexFunction& f) {
  return (formal_laplacian(g, f).array().abs() <= kSignTolerance).all();
}

struct NormBoundReport {
  double sup_degree = 0.0;
  /// Operator norm of L on ℓ²(m), i.e. its largest eigenvalue.
  double operator_norm = 0.0;
};

inline NormBoundReport norm_bound_report(const Graph& g, const Measure& m) {
  NormBoundReport r;
  if (g.size() == 0) return r;
  r.sup_degree = degree_vector(g, m).maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      laplacian_matrix(g, m).symmetrized(), Eigen::EigenvaluesOnly);
  r.operator_norm = solver.eigenvalues().cwiseAbs().maxCoeff();
  return r;
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_OPERATORS_HPP_
