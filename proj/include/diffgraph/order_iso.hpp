#ifndef DIFFGRAPH_ORDER_ISO_HPP_
#define DIFFGRAPH_ORDER_ISO_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "diffgraph/error.hpp"
#include "diffgraph/graph.hpp"
#include "diffgraph/operators.hpp"
#include "diffgraph/semigroup.hpp"

namespace diffgraph {

/// Default acceptance threshold for certificate residuals.
inline constexpr double kCertificateTolerance = 1e-9;

/// An order isomorphism U: ℓ²(X₁,m₁) → ℓ²(X₂,m₂), (Uf)(y) = h(y) f(τ(y)).
/// `tau[y]` is the X₁ index of τ(y); `h` lives on X₂.
struct OrderIso {
  std::vector<std::size_t> tau;
  VertexFunction h;

  std::size_t size() const { return tau.size(); }

  /// Throws unless τ is a bijection and h > 0.
  void validate() const {
    if (static_cast<std::size_t>(h.size()) != tau.size()) {
      throw Error(ErrorCode::DimensionMismatch, "tau and h sizes differ");
    }
    std::vector<bool> hit(tau.size(), false);
    for (auto x : tau) {
      if (x >= tau.size() || hit[x]) throw Error(ErrorCode::NotBijective, "tau is not a bijection");
      hit[x] = true;
    }
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (!(h[i] > 0.0) || !std::isfinite(h[i])) {
        throw Error(ErrorCode::NotPositive, "scaling must be strictly positive");
      }
    }
  }

  std::vector<std::size_t> inverse_tau() const {
    std::vector<std::size_t> inv(tau.size());
    for (std::size_t y = 0; y < tau.size(); ++y) inv[tau[y]] = y;
    return inv;
  }

  /// Matrix of U with rows on X₂ and columns on X₁.
  Eigen::MatrixXd matrix() const {
    const auto n = static_cast<Eigen::Index>(tau.size());
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t y = 0; y < tau.size(); ++y) {
      u(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(tau[y])) = h[static_cast<Eigen::Index>(y)];
    }
    return u;
  }

  static OrderIso identity(std::size_t n) {
    OrderIso iso;
    iso.tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) iso.tau[i] = i;
    iso.h = VertexFunction::Ones(static_cast<Eigen::Index>(n));
    return iso;
  }
};

/// Reads (τ, h) off a matrix with rows on X₂ and columns on X₁. Every row
/// and column must carry exactly one nonzero entry, and it must be positive.
inline OrderIso decompose_order_iso(const Eigen::MatrixXd& u, const Measure& m1,
                                    const Measure& m2) {
  if (static_cast<std::size_t>(u.cols()) != m1.size() ||
      static_cast<std::size_t>(u.rows()) != m2.size()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix shape does not match the measures");
  }
  if (u.rows() != u.cols()) throw Error(ErrorCode::NotOrderIso, "matrix is not square");
  OrderIso iso;
  iso.tau.assign(static_cast<std::size_t>(u.rows()), 0);
  iso.h.resize(u.rows());
  std::vector<int> column_hits(static_cast<std::size_t>(u.cols()), 0);
  for (Eigen::Index y = 0; y < u.rows(); ++y) {
    int hits = 0;
    for (Eigen::Index x = 0; x < u.cols(); ++x) {
      const double v = u(y, x);
      if (v == 0.0) continue;
      if (!(v > 0.0)) throw Error(ErrorCode::NotOrderIso, "nonpositive nonzero entry");
      ++hits;
      ++column_hits[static_cast<std::size_t>(x)];
      iso.tau[static_cast<std::size_t>(y)] = static_cast<std::size_t>(x);
      iso.h[y] = v;
    }
    if (hits != 1) throw Error(ErrorCode::NotOrderIso, "row without exactly one nonzero entry");
  }
  for (int hits : column_hits) {
    if (hits != 1) throw Error(ErrorCode::NotOrderIso, "column without exactly one nonzero entry");
  }
  return iso;
}

/// (Uf)(y) = h(y) f(τ(y)).
inline VertexFunction apply(const OrderIso& iso, const VertexFunction& f) {
  if (static_cast<std::size_t>(f.size()) != iso.size()) {
    throw Error(ErrorCode::DimensionMismatch, "function size differs from iso size");
  }
  VertexFunction out(f.size());
  for (std::size_t y = 0; y < iso.size(); ++y) {
    out[static_cast<Eigen::Index>(y)] =
        iso.h[static_cast<Eigen::Index>(y)] * f[static_cast<Eigen::Index>(iso.tau[y])];
  }
  return out;
}

/// Adjoint in the weighted inner products: (U*g)(x) = h g m₂ (τ^{-1}x) / m₁(x).
inline VertexFunction adjoint_apply(const OrderIso& iso, const Measure& m1, const Measure& m2,
                                    const VertexFunction& g) {
  if (static_cast<std::size_t>(g.size()) != iso.size() || m1.size() != iso.size() ||
      m2.size() != iso.size()) {
    throw Error(ErrorCode::DimensionMismatch, "adjoint operand sizes");
  }
  VertexFunction out(g.size());
  for (std::size_t y = 0; y < iso.size(); ++y) {
    const auto yi = static_cast<Eigen::Index>(y);
    const std::size_t x = iso.tau[y];
    out[static_cast<Eigen::Index>(x)] = iso.h[yi] * g[yi] * m2[y] / m1[x];
  }
  return out;
}

/// φ(x) = m₂(τ^{-1}x) h(τ^{-1}x)² / m₁(x) on X₁.
inline VertexFunction constancy_multiplier(const OrderIso& iso, const Measure& m1,
                                           const Measure& m2) {
  VertexFunction phi(static_cast<Eigen::Index>(iso.size()));
  for (std::size_t y = 0; y < iso.size(); ++y) {
    const double hy = iso.h[static_cast<Eigen::Index>(y)];
    phi[static_cast<Eigen::Index>(iso.tau[y])] = m2[y] * hy * hy / m1[iso.tau[y]];
  }
  return phi;
}

/// β = 1/φ when the multiplier φ is constant to 1e-10 relative.
inline double beta_of(const OrderIso& iso, const Graph& g1, const Measure& m1, const Measure& m2) {
  check_measure(g1, m1);
  if (m2.size() != iso.size() || g1.size() != iso.size()) {
    throw Error(ErrorCode::DimensionMismatch, "iso size differs from graph size");
  }
  if (!is_connected(g1)) throw Error(ErrorCode::NotConnected, "source graph must be connected");
  if (iso.size() == 0) return 1.0;
  const VertexFunction phi = constancy_multiplier(iso, m1, m2);
  const double lo = phi.minCoeff();
  const double hi = phi.maxCoeff();
  if (hi - lo > 1e-10 * hi) {
    throw Error(ErrorCode::NotConstantMultiplier,
                "multiplier ranges over [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return 1.0 / phi.mean();
}

struct IntertwiningResidual {
  /// ‖U L₁ - L₂ U‖_F / (1 + ‖L₁‖_F).
  double generator = 0.0;
  /// max over t and probes of ‖U e^{-tL₁} f - e^{-tL₂} U f‖_{m₂} / ‖U f‖_{m₂}.
  double semigroup = 0.0;
};

inline constexpr std::array<double, 3> kSpotCheckTimes{0.1, 1.0, 10.0};

inline IntertwiningResidual verify_intertwining(const Graph& g1, const Measure& m1,
                                                const Graph& g2, const Measure& m2,
                                                const OrderIso& iso,
                                                std::uint64_t seed = 0x5eedULL) {
  iso.validate();
  if (g1.size() != iso.size() || g2.size() != iso.size()) {
    throw Error(ErrorCode::DimensionMismatch, "graph sizes differ from iso size");
  }
  IntertwiningResidual r;
  if (iso.size() == 0) return r;
  const Eigen::MatrixXd l1 = laplacian_matrix(g1, m1).matrix;
  const Eigen::MatrixXd l2 = laplacian_matrix(g2, m2).matrix;
  const Eigen::MatrixXd u = iso.matrix();
  r.generator = (u * l1 - l2 * u).norm() / (1.0 + l1.norm());

  const HeatSemigroup s1(g1, m1);
  const HeatSemigroup s2(g2, m2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int probe = 0; probe < 5; ++probe) {
    VertexFunction f(static_cast<Eigen::Index>(iso.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = unit(rng);
    const VertexFunction uf = apply(iso, f);
    const double scale = weighted_norm(m2, uf);
    if (scale == 0.0) continue;
    for (double t : kSpotCheckTimes) {
      const VertexFunction lhs = apply(iso, s1.apply(t, f));
      const VertexFunction rhs = s2.apply(t, uf);
      r.semigroup = std::max(r.semigroup, weighted_norm(m2, lhs - rhs) / scale);
    }
  }
  return r;
}

struct CertificateResiduals {
  double generator = 0.0;
  double semigroup = 0.0;
  /// m₁(τw) = β h(w)² m₂(w)
  double measure = 0.0;
  /// b₁(τx,τy) = β h(x) h(y) b₂(x,y)
  double edge = 0.0;
  /// c₁(τz) = β h(z) ℒ₂h(z)
  double killing = 0.0;
  /// |√β ‖Uf‖_{m₂} - ‖f‖_{m₁}| / ‖f‖_{m₁} over random f
  double unitarity = 0.0;

  double max() const {
    return std::max({generator, semigroup, measure, edge, killing, unitarity});
  }
};

struct IntertwinerCertificate {
  OrderIso iso;
  double beta = 1.0;
  CertificateResiduals residuals;
  bool accepted = false;
};

namespace detail {

inline double relative_gap(double a, double b, double floor = 0.0) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace detail

/// Residuals of the three structure equations together with the generator,
/// semigroup and unitarity checks for a given (iso, β).
inline IntertwinerCertificate verify_structure_equations(const Graph& g1, const Measure& m1,
                                                         const Graph& g2, const Measure& m2,
                                                         const OrderIso& iso, double beta,
                                                         double tolerance = kCertificateTolerance,
                                                         std::uint64_t seed = 0x5eedULL) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be positive");
  check_measure(g1, m1);
  check_measure(g2, m2);
  const auto inter = verify_intertwining(g1, m1, g2, m2, iso, seed);

  IntertwinerCertificate cert;
  cert.iso = iso;
  cert.beta = beta;
  auto& r = cert.residuals;
  r.generator = inter.generator;
  r.semigroup = inter.semigroup;

  const std::size_t n = iso.size();
  const VertexFunction& h = iso.h;
  const VertexFunction lh = formal_laplacian(g2, h);
  for (std::size_t w = 0; w < n; ++w) {
    const auto wi = static_cast<Eigen::Index>(w);
    const std::size_t tw = iso.tau[w];
    r.measure = std::max(r.measure, detail::relative_gap(m1[tw], beta * h[wi] * h[wi] * m2[w]));
    for (std::size_t y = 0; y < n; ++y) {
      if (y == w) continue;
      const double lhs = g1.weight(tw, iso.tau[y]);
      const double rhs = beta * h[wi] * h[static_cast<Eigen::Index>(y)] * g2.weight(w, y);
      r.edge = std::max(r.edge, detail::relative_gap(lhs, rhs));
    }
    double terms = h[wi] * (g2.weighted_degree(w) + g2.killing(w));
    for (const auto& nb : g2.neighbors(w)) terms += nb.weight * h[static_cast<Eigen::Index>(nb.index)];
    r.killing = std::max(r.killing, detail::relative_gap(g1.killing(tw), beta * h[wi] * lh[wi],
                                                         beta * h[wi] * terms));
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int probe = 0; probe < 20 && n > 0; ++probe) {
    VertexFunction f(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = unit(rng);
    const double norm1 = weighted_norm(m1, f);
    if (norm1 == 0.0) continue;
    const double norm2 = std::sqrt(beta) * weighted_norm(m2, apply(iso, f));
    r.unitarity = std::max(r.unitarity, std::abs(norm2 - norm1) / norm1);
  }
  cert.accepted = r.max() <= tolerance;
  return cert;
}

/// Post-hoc invariants that every intertwiner must satisfy, computed
/// independently of the reconstruction search.
struct InvariantReport {
  /// max_x |Deg₁(τx) - Deg₂(x)| / Deg₂(x)
  double degree = 0.0;
  bool combinatorial_isometry = true;
  /// max |ϱ₁(τy,τz) - ϱ₂(y,z)| relative
  double degree_path = 0.0;
  /// min_x ℒ₂h(x)
  double min_laplacian_of_h = 0.0;
  /// max_x |ℒ₂h(x)|
  double max_abs_laplacian_of_h = 0.0;
  /// max over random f,g of |𝒬₁(f,g) - β 𝒬₂(Uf,Ug)| / (1 + |𝒬₁(f,g)|)
  double form_transport = 0.0;
};

inline InvariantReport check_invariants(const Graph& g1, const Measure& m1, const Graph& g2,
                                        const Measure& m2, const IntertwinerCertificate& cert,
                                        std::uint64_t seed = 0xa11ceULL) {
  InvariantReport rep;
  const auto& iso = cert.iso;
  const std::size_t n = iso.size();
  const Eigen::VectorXd deg1 = degree_vector(g1, m1);
  const Eigen::VectorXd deg2 = degree_vector(g2, m2);
  const Eigen::MatrixXd d1 = distance_matrix(g1, m1, MetricKind::Combinatorial);
  const Eigen::MatrixXd d2 = distance_matrix(g2, m2, MetricKind::Combinatorial);
  const Eigen::MatrixXd r1 = distance_matrix(g1, m1, MetricKind::DegreePath);
  const Eigen::MatrixXd r2 = distance_matrix(g2, m2, MetricKind::DegreePath);
  for (std::size_t y = 0; y < n; ++y) {
    const auto yi = static_cast<Eigen::Index>(y);
    rep.degree = std::max(rep.degree, detail::relative_gap(deg1[iso.tau[y]], deg2[yi]));
    for (std::size_t z = 0; z < n; ++z) {
      const auto zi = static_cast<Eigen::Index>(z);
      const auto ty = static_cast<Eigen::Index>(iso.tau[y]);
      const auto tz = static_cast<Eigen::Index>(iso.tau[z]);
      if (d1(ty, tz) != d2(yi, zi)) rep.combinatorial_isometry = false;
      if (std::isinf(r1(ty, tz)) || std::isinf(r2(yi, zi))) {
        if (r1(ty, tz) != r2(yi, zi)) rep.degree_path = std::numeric_limits<double>::infinity();
      } else {
        rep.degree_path = std::max(rep.degree_path, detail::relative_gap(r1(ty, tz), r2(yi, zi)));
      }
    }
  }
  const VertexFunction lh = formal_laplacian(g2, iso.h);
  if (n > 0) {
    rep.min_laplacian_of_h = lh.minCoeff();
    rep.max_abs_laplacian_of_h = lh.cwiseAbs().maxCoeff();
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int probe = 0; probe < 20 && n > 0; ++probe) {
    VertexFunction f(static_cast<Eigen::Index>(n));
    VertexFunction g(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      f[i] = unit(rng);
      g[i] = unit(rng);
    }
    const double q1 = quadratic_form(g1, f, g);
    const double q2 = cert.beta * quadratic_form(g2, apply(iso, f), apply(iso, g));
    rep.form_transport = std::max(rep.form_transport, std::abs(q1 - q2) / (1.0 + std::abs(q1)));
  }
  return rep;
}

struct ReconstructOptions {
  std::size_t max_solutions = 16;
  /// Gauge vertex of X₂ where h = 1; defaults to the smallest vertex.
  std::optional<std::string> root;
  std::size_t node_budget = 1'000'000;
  double tolerance = kCertificateTolerance;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

/// Integer class ids for real values, shared across both graphs: sorted
/// values whose consecutive relative gap is ≤ tol fall into one class.
inline std::vector<long> cluster_values(const std::vector<double>& values, double tol) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<long> cls(values.size(), 0);
  long current = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0) {
      const double prev = values[order[k - 1]];
      const double cur = values[order[k]];
      const bool same = (std::isinf(prev) && std::isinf(cur)) ||
                        std::abs(cur - prev) <= tol * std::max(std::abs(cur), std::abs(prev));
      if (!same) ++current;
    }
    cls[order[k]] = current;
  }
  return cls;
}

struct SideData {
  const Graph* graph = nullptr;
  const Measure* measure = nullptr;
  Eigen::MatrixXd dist;
  std::vector<std::vector<long>> degree_path_class;
  std::vector<long> color;
};

/// Joint colour refinement by generalized degree, then by multisets of
/// (d, ϱ-class, colour) over all other vertices.
inline void refine_colors(SideData& a, SideData& b, double tol) {
  const std::size_t n = a.graph->size();
  std::vector<double> deg;
  for (std::size_t i = 0; i < n; ++i) deg.push_back(generalized_degree(*a.graph, *a.measure, i));
  for (std::size_t i = 0; i < n; ++i) deg.push_back(generalized_degree(*b.graph, *b.measure, i));
  const auto deg_class = cluster_values(deg, tol);
  a.color.assign(deg_class.begin(), deg_class.begin() + static_cast<long>(n));
  b.color.assign(deg_class.begin() + static_cast<long>(n), deg_class.end());

  const Eigen::MatrixXd r1 = distance_matrix(*a.graph, *a.measure, MetricKind::DegreePath);
  const Eigen::MatrixXd r2 = distance_matrix(*b.graph, *b.measure, MetricKind::DegreePath);
  std::vector<double> rho;
  rho.reserve(2 * n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rho.push_back(r1(i, j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rho.push_back(r2(i, j));
  const auto rho_class = cluster_values(rho, tol);
  a.degree_path_class.assign(n, std::vector<long>(n));
  b.degree_path_class.assign(n, std::vector<long>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a.degree_path_class[i][j] = rho_class[i * n + j];
      b.degree_path_class[i][j] = rho_class[n * n + i * n + j];
    }
  }

  auto count_colors = [](const std::vector<long>& x, const std::vector<long>& y) {
    std::vector<long> all(x);
    all.insert(all.end(), y.begin(), y.end());
    std::sort(all.begin(), all.end());
    return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
  };

  std::size_t classes = count_colors(a.color, b.color);
  for (std::size_t round = 0; round < n; ++round) {
    std::map<std::vector<long>, long> ids;
    auto signature = [&](const SideData& s, std::size_t v) {
      std::vector<std::array<long, 3>> items;
      items.reserve(n);
      for (std::size_t w = 0; w < n; ++w) {
        if (w == v) continue;
        items.push_back({static_cast<long>(s.dist(v, w)), s.degree_path_class[v][w], s.color[w]});
      }
      std::sort(items.begin(), items.end());
      std::vector<long> sig{s.color[v]};
      for (const auto& it : items) sig.insert(sig.end(), it.begin(), it.end());
      return sig;
    };
    std::vector<long> next_a(n), next_b(n);
    for (std::size_t v = 0; v < n; ++v) {
      next_a[v] = ids.try_emplace(signature(a, v), static_cast<long>(ids.size())).first->second;
    }
    for (std::size_t v = 0; v < n; ++v) {
      next_b[v] = ids.try_emplace(signature(b, v), static_cast<long>(ids.size())).first->second;
    }
    a.color = std::move(next_a);
    b.color = std::move(next_b);
    const std::size_t now = count_colors(a.color, b.color);
    if (now == classes) break;
    classes = now;
  }
}

class Reconstructor {
 public:
  Reconstructor(const Graph& g1, const Measure& m1, const Graph& g2, const Measure& m2,
                const ReconstructOptions& opts)
      : g1_(g1), m1_(m1), g2_(g2), m2_(m2), opts_(opts), n_(g1.size()) {}

  std::vector<IntertwinerCertificate> run() {
    s1_ = {&g1_, &m1_, distance_matrix(g1_, m1_, MetricKind::Combinatorial), {}, {}};
    s2_ = {&g2_, &m2_, distance_matrix(g2_, m2_, MetricKind::Combinatorial), {}, {}};
    refine_colors(s1_, s2_, 1e-9);

    std::map<long, std::pair<std::size_t, std::size_t>> histogram;
    for (auto c : s1_.color) ++histogram[c].first;
    for (auto c : s2_.color) ++histogram[c].second;
    for (const auto& [c, counts] : histogram) {
      if (counts.first != counts.second) return {};
    }

    const std::size_t root = opts_.root ? g2_.index_of(*opts_.root) : 0;
    order_ = search_order(root, histogram);
    tau_.assign(n_, 0);
    h_ = VertexFunction::Zero(static_cast<Eigen::Index>(n_));
    used_.assign(n_, false);

    for (std::size_t v = 0; v < n_ && found_.size() < opts_.max_solutions; ++v) {
      if (s1_.color[v] != s2_.color[root]) continue;
      tick();
      beta_ = m1_[v] / m2_[root];
      tau_[root] = v;
      h_[static_cast<Eigen::Index>(root)] = 1.0;
      used_[v] = true;
      extend(1);
      used_[v] = false;
    }
    std::sort(found_.begin(), found_.end(),
              [](const IntertwinerCertificate& a, const IntertwinerCertificate& b) {
                return a.iso.tau < b.iso.tau;
              });
    return found_;
  }

 private:
  std::vector<std::size_t> search_order(std::size_t root,
                                        const std::map<long, std::pair<std::size_t, std::size_t>>& hist) {
    std::vector<std::size_t> order{root};
    std::vector<bool> placed(n_, false);
    placed[root] = true;
    while (order.size() < n_) {
      std::size_t best = n_;
      auto key = [&](std::size_t v) {
        bool frontier = false;
        for (const auto& nb : g2_.neighbors(v)) frontier = frontier || placed[nb.index];
        return std::make_tuple(!frontier, hist.at(s2_.color[v]).second, v);
      };
      for (std::size_t v = 0; v < n_; ++v) {
        if (placed[v]) continue;
        if (best == n_ || key(v) < key(best)) best = v;
      }
      placed[best] = true;
      order.push_back(best);
    }
    return order;
  }

  void tick() {
    if (++nodes_ > opts_.node_budget) {
      throw Error(ErrorCode::SearchBudgetExceeded,
                  "more than " + std::to_string(opts_.node_budget) + " search nodes");
    }
  }

  bool consistent(std::size_t depth, std::size_t w, std::size_t v, double hw) const {
    for (std::size_t k = 0; k < depth; ++k) {
      const std::size_t u = order_[k];
      const std::size_t tu = tau_[u];
      if (s1_.dist(v, tu) != s2_.dist(w, u)) return false;
      const double lhs = g1_.weight(v, tu);
      const double rhs = beta_ * hw * h_[static_cast<Eigen::Index>(u)] * g2_.weight(w, u);
      if ((lhs == 0.0) != (rhs == 0.0)) return false;
      if (relative_gap(lhs, rhs) > opts_.tolerance) return false;
    }
    return true;
  }

  void extend(std::size_t depth) {
    if (found_.size() >= opts_.max_solutions) return;
    if (depth == n_) {
      OrderIso iso{tau_, h_};
      auto cert = verify_structure_equations(g1_, m1_, g2_, m2_, iso, beta_, opts_.tolerance,
                                             opts_.seed);
      if (cert.accepted) found_.push_back(std::move(cert));
      return;
    }
    const std::size_t w = order_[depth];
    for (std::size_t v = 0; v < n_; ++v) {
      if (used_[v] || s1_.color[v] != s2_.color[w]) continue;
      tick();
      const double hw = std::sqrt(m1_[v] / (beta_ * m2_[w]));
      if (!consistent(depth, w, v, hw)) continue;
      tau_[w] = v;
      h_[static_cast<Eigen::Index>(w)] = hw;
      used_[v] = true;
      extend(depth + 1);
      used_[v] = false;
      if (found_.size() >= opts_.max_solutions) return;
    }
  }

  const Graph& g1_;
  const Measure& m1_;
  const Graph& g2_;
  const Measure& m2_;
  ReconstructOptions opts_;
  std::size_t n_;
  SideData s1_, s2_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> tau_;
  VertexFunction h_;
  std::vector<bool> used_;
  double beta_ = 1.0;
  std::size_t nodes_ = 0;
  std::vector<IntertwinerCertificate> found_;
};

}  // namespace detail

/// Searches for order isomorphisms U: ℓ²(X₁,m₁) → ℓ²(X₂,m₂) intertwining the
/// two Laplacians. The scaling is gauge-fixed by h(root) = 1; each candidate τ
/// is pruned by colour refinement and incremental edge-equation checks, then
/// re-verified from scratch. An empty result means no intertwiner exists.
inline std::vector<IntertwinerCertificate> reconstruct(const Graph& g1, const Measure& m1,
                                                       const Graph& g2, const Measure& m2,
                                                       const ReconstructOptions& opts = {}) {
  check_measure(g1, m1);
  check_measure(g2, m2);
  if (!is_connected(g1) || !is_connected(g2)) {
    throw Error(ErrorCode::NotConnected, "reconstruction needs connected graphs");
  }
  check_dense_size(g1);
  check_dense_size(g2);
  if (g1.size() != g2.size() || g1.size() == 0 || opts.max_solutions == 0) return {};
  return detail::Reconstructor(g1, m1, g2, m2, opts).run();
}

}  // namespace diffgraph

#endif  // DIFFGRAPH_ORDER_ISO_HPP_
