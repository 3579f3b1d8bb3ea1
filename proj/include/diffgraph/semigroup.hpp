#ifndef DIFFGRAPH_SEMIGROUP_HPP_
#define DIFFGRAPH_SEMIGROUP_HPP_

#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/operators.hpp"

namespace diffgraph {

/// Times above this are clamped; e^{-λt} has long underflowed by then.
inline constexpr double kMaxHeatTime = 1e6;

/// Eigendecomposition S = V Λ V^T of the symmetrized operator M^{1/2} L M^{-1/2}.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd sqrt_measure;
};

namespace detail {

inline std::string spectrum_key(const Graph& g, const Measure& m) {
  std::string key;
  auto put = [&key](const auto& value) {
    char buf[sizeof(value)];
    std::memcpy(buf, &value, sizeof(value));
    key.append(buf, sizeof(value));
  };
  put(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    put(g.killing(i));
    put(m[i]);
  }
  for (const auto& e : g.edges()) {
    put(e.u);
    put(e.v);
    put(e.weight);
  }
  return key;
}

class SpectrumCache {
 public:
  std::shared_ptr<const Spectrum> get(const Graph& g, const Measure& m) {
    const std::string key = spectrum_key(g, m);
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto spectrum = compute(g, m);
    std::lock_guard lock(mutex_);
    if (entries_.size() >= kCapacity) entries_.clear();
    entries_.emplace(key, spectrum);
    return spectrum;
  }

 private:
  static constexpr std::size_t kCapacity = 64;

  static std::shared_ptr<const Spectrum> compute(const Graph& g, const Measure& m) {
    check_dense_size(g);
    check_measure(g, m);
    auto out = std::make_shared<Spectrum>();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        laplacian_matrix(g, m).symmetrized());
    out->eigenvalues = solver.eigenvalues();
    out->eigenvectors = solver.eigenvectors();
    out->sqrt_measure = m.values().cwiseSqrt();
    return out;
  }

  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Spectrum>> entries_;
};

inline SpectrumCache& spectrum_cache() {
  static SpectrumCache cache;
  return cache;
}

inline double checked_time(double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "heat time must be nonnegative");
  return std::min(t, kMaxHeatTime);
}

}  // namespace detail

inline std::shared_ptr<const Spectrum> spectrum_of(const Graph& g, const Measure& m) {
  return detail::spectrum_cache().get(g, m);
}

/// The heat semigroup e^{-tL} of a finite graph over (X, m).
class HeatSemigroup {
 public:
  HeatSemigroup(const Graph& g, const Measure& m) : spectrum_(spectrum_of(g, m)) {}

  std::size_t size() const { return static_cast<std::size_t>(spectrum_->eigenvalues.size()); }
  const Spectrum& spectrum() const { return *spectrum_; }

  VertexFunction apply(double t, const VertexFunction& f) const {
    if (static_cast<std::size_t>(f.size()) != size()) {
      throw Error(ErrorCode::DimensionMismatch, "function size differs from vertex count");
    }
    t = detail::checked_time(t);
    if (t == 0.0) return f;
    const auto& s = *spectrum_;
    const Eigen::VectorXd coeff = s.eigenvectors.transpose() * s.sqrt_measure.cwiseProduct(f);
    const Eigen::VectorXd decayed = coeff.cwiseProduct((-t * s.eigenvalues).array().exp().matrix());
    return (s.eigenvectors * decayed).cwiseQuotient(s.sqrt_measure);
  }

  /// Matrix of e^{-tL}; column x is e^{-tL} 1_x.
  Eigen::MatrixXd matrix(double t) const {
    t = detail::checked_time(t);
    if (t == 0.0) return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
    const auto& s = *spectrum_;
    const Eigen::VectorXd decay = (-t * s.eigenvalues).array().exp().matrix();
    const Eigen::MatrixXd w = s.eigenvectors * decay.asDiagonal() * s.eigenvectors.transpose();
    return s.sqrt_measure.cwiseInverse().asDiagonal() * w * s.sqrt_measure.asDiagonal();
  }

  /// k_t(x,y) = (e^{-tL} 1_x)(y).
  double kernel(double t, std::size_t x, std::size_t y) const {
    t = detail::checked_time(t);
    if (t == 0.0) return x == y ? 1.0 : 0.0;
    const auto& s = *spectrum_;
    double sum = 0.0;
    for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
      sum += std::exp(-t * s.eigenvalues[k]) * s.eigenvectors(y, k) * s.eigenvectors(x, k);
    }
    return sum * s.sqrt_measure[x] / s.sqrt_measure[y];
  }

 private:
  std::shared_ptr<const Spectrum> spectrum_;
};

inline VertexFunction heat_apply(const Graph& g, const Measure& m, double t,
                                 const VertexFunction& f) {
  check_function(g, f);
  return HeatSemigroup(g, m).apply(t, f);
}

inline double heat_kernel(const Graph& g, const Measure& m, double t, const std::string& x,
                          const std::string& y) {
  const std::size_t i = g.index_of(x);
  const std::size_t j = g.index_of(y);
  return HeatSemigroup(g, m).kernel(t, i, j);
}

/// e^{-tL} u0 at each of the ascending `times`, sharing one eigendecomposition.
inline std::vector<VertexFunction> heat_trajectory(const Graph& g, const Measure& m,
                                                   const VertexFunction& u0,
                                                   const std::vector<double>& times) {
  check_function(g, u0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] < times[k - 1]) throw Error(ErrorCode::InvalidArgument, "times must ascend");
  }
  const HeatSemigroup semigroup(g, m);
  std::vector<VertexFunction> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(semigroup.apply(t, u0));
  return out;
}

/// Value of ∫_0^∞ e^{-tL} 1_x(y) dt, or divergence.
struct GreenValue {
  bool diverges = false;
  double value = 0.0;
};

/// Green function G(x,y) = (L^{-1} 1_x)(y) = m(x) ℒ^{-1}(y,x), evaluated on the
/// component of x. A component without killing has a structural zero
/// eigenvalue and reports divergence without attempting an inversion.
inline GreenValue green_function(const Graph& g, const Measure& m, std::size_t x, std::size_t y) {
  check_measure(g, m);
  const auto label = component_labels(g);
  if (label.at(x) != label.at(y)) return {false, 0.0};
  std::vector<std::size_t> block;
  bool killed = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (label[i] == label[x]) {
      block.push_back(i);
      killed = killed || g.killing(i) != 0.0;
    }
  }
  if (!killed) return {true, 0.0};
  if (block.size() > kDenseLimit) {
    throw Error(ErrorCode::SizeLimit, "component too large for a dense solve");
  }
  const auto n = static_cast<Eigen::Index>(block.size());
  std::vector<Eigen::Index> local(g.size(), -1);
  for (Eigen::Index k = 0; k < n; ++k) local[block[static_cast<std::size_t>(k)]] = k;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::size_t v = block[static_cast<std::size_t>(k)];
    l(k, k) = g.killing(v);
    for (const auto& nb : g.neighbors(v)) {
      l(k, local[nb.index]) = -nb.weight;
      l(k, k) += nb.weight;
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[local[x]] = m[x];
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(l);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "Green function solve");
  const Eigen::VectorXd u = ldlt.solve(rhs);
  return {false, u[local[y]]};
}

inline GreenValue green_function(const Graph& g, const Measure& m, const std::string& x,
                                 const std::string& y) {
  return green_function(g, m, g.index_of(x), g.index_of(y));
}

/// P(x,y) = b(x,y)/n(x) over the normalizing measure n.
struct MarkovOperator {
  Eigen::MatrixXd matrix;
  Measure normalizing;
};

inline MarkovOperator markov_operator(const Graph& g) {
  check_dense_size(g);
  MarkovOperator op{Eigen::MatrixXd::Zero(g.size(), g.size()), normalizing_measure(g)};
  for (std::size_t x = 0; x < g.size(); ++x) {
    for (const auto& nb : g.neighbors(x)) op.matrix(x, nb.index) = nb.weight / op.normalizing[x];
  }
  return op;
}

inline VertexFunction markov_apply(const MarkovOperator& p, const VertexFunction& f) {
  if (f.size() != p.matrix.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "function size differs from vertex count");
  }
  return p.matrix * f;
}

/// Spectral radius of P, computed from its ℓ²(n)-symmetrization.
inline double spectral_radius(const MarkovOperator& p) {
  if (p.matrix.size() == 0) return 0.0;
  const Eigen::VectorXd s = p.normalizing.values().cwiseSqrt();
  Eigen::MatrixXd sym = s.asDiagonal() * p.matrix * s.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_SEMIGROUP_HPP_
