#ifndef DIFFGRAPH_ACCEPTANCE_HPP_
#define DIFFGRAPH_ACCEPTANCE_HPP_

// End-to-end acceptance checks shared by the test binary and `diffgraph selftest`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "diffgraph/diffgraph.hpp"
#include "diffgraph/random_graphs.hpp"

namespace diffgraph::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

/// Runs a check body, turning an exception into a failure with its message.
inline CriterionResult guarded(int id, std::string name,
                               const std::function<void(CriterionResult&)>& body) {
  CriterionResult r{id, std::move(name), false, {}};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

/// max over edges/pairs of |b₁(τy,τz) - β b₂(y,z)| / max(...) and the same for m.
struct ScaledRecovery {
  double edge = 0.0;
  double measure = 0.0;
  double h_spread = 0.0;
};

inline ScaledRecovery scaled_recovery(const Graph& g1, const Measure& m1, const Graph& g2,
                                      const Measure& m2, const IntertwinerCertificate& c) {
  ScaledRecovery r;
  const auto& tau = c.iso.tau;
  r.h_spread = c.iso.h.maxCoeff() / c.iso.h.minCoeff() - 1.0;
  for (std::size_t y = 0; y < g2.size(); ++y) {
    r.measure = std::max(r.measure, diffgraph::detail::relative_gap(m1[tau[y]], c.beta * m2[y]));
    for (std::size_t z = 0; z < g2.size(); ++z) {
      if (y == z) continue;
      r.edge = std::max(r.edge, diffgraph::detail::relative_gap(g1.weight(tau[y], tau[z]),
                                                                c.beta * g2.weight(y, z)));
    }
  }
  return r;
}

}  // namespace detail

inline CriterionResult gst_intertwining(std::uint64_t seed) {
  return detail::guarded(1, "ground state transform intertwines", [&](CriterionResult& r) {
    gen::Rng rng(seed);
    double worst_gen = 0.0, worst_semi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = trial % 2 == 0 ? 0.3 : 0.0;
      const std::size_t n = gen::uniform_index(rng, 2, 30);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const Measure m = gen::random_measure(rng, n);
      GstSpec spec;
      spec.h = *find_positive_superharmonic(g, g.has_killing());
      spec.tau = gen::random_permutation(rng, n);
      spec.beta = gen::uniform(rng, 0.1, 10.0);
      const auto gi = gst_intertwiner(g, m, spec);
      worst_gen = std::max(worst_gen, gi.certificate.residuals.generator);
      worst_semi = std::max(worst_semi, gi.certificate.residuals.semigroup);
    }
    r.passed = worst_gen <= 1e-10 && worst_semi <= 1e-9;
    r.detail = detail::fmt("generator %.3g (<=1e-10), semigroup %.3g (<=1e-9)", worst_gen, worst_semi);
  });
}

/// Random c ≡ 0 pairs (G₁, G₂) with G₂ a relabelled copy of G₁ scaled by 1/β.
struct ScaledPair {
  Graph g1;
  Measure m1;
  Graph g2;
  Measure m2;
  double beta;
};

inline std::vector<ScaledPair> scaled_pairs(std::uint64_t seed) {
  gen::Rng rng(seed);
  constexpr double betas[] = {0.5, 2.0, 7.0};
  std::vector<ScaledPair> out;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = gen::uniform_index(rng, 2, 20);
    Graph g = gen::random_connected_graph(rng, n);
    Measure m = gen::random_measure(rng, n);
    const double beta = betas[trial % 3];
    auto [g2, m2] = gen::relabel_scaled(g, m, gen::random_permutation(rng, n), beta);
    out.push_back({std::move(g), std::move(m), std::move(g2), std::move(m2), beta});
  }
  return out;
}

inline CriterionResult main_theorem(std::uint64_t seed) {
  return detail::guarded(2, "reconstruction of scaled relabellings", [&](CriterionResult& r) {
    std::size_t empty = 0;
    detail::ScaledRecovery worst;
    double beta_gap = 0.0;
    for (const auto& p : scaled_pairs(seed)) {
      const auto certs = reconstruct(p.g1, p.m1, p.g2, p.m2);
      if (certs.empty()) ++empty;
      for (const auto& c : certs) {
        const auto rec = detail::scaled_recovery(p.g1, p.m1, p.g2, p.m2, c);
        worst.edge = std::max(worst.edge, rec.edge);
        worst.measure = std::max(worst.measure, rec.measure);
        worst.h_spread = std::max(worst.h_spread, rec.h_spread);
        beta_gap = std::max(beta_gap, std::abs(c.beta - p.beta) / p.beta);
      }
    }
    r.passed = empty == 0 && worst.h_spread <= 1e-9 && worst.edge <= 1e-9 && worst.measure <= 1e-9;
    r.detail = "pairs without certificate " + std::to_string(empty) +
               detail::fmt(", h spread %.3g, b %.3g, m %.3g", worst.h_spread, worst.edge, worst.measure) +
               detail::fmt(", beta %.3g", beta_gap);
  });
}

inline CriterionResult structure_invariants(std::uint64_t seed) {
  return detail::guarded(3, "invariants of accepted certificates", [&](CriterionResult& r) {
    struct Case {
      Graph g1;
      Measure m1;
      Graph g2;
      Measure m2;
    };
    std::vector<Case> cases;
    for (auto& p : scaled_pairs(seed)) cases.push_back({p.g1, p.m1, p.g2, p.m2});
    // Pairs with killing, where the reconstructed h is not constant.
    gen::Rng rng(seed + 1);
    for (int trial = 0; trial < 10; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = 0.4;
      const std::size_t n = gen::uniform_index(rng, 3, 12);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const Measure m = gen::random_measure(rng, n);
      GstSpec spec;
      spec.h = *find_positive_superharmonic(g, true);
      spec.tau = gen::random_permutation(rng, n);
      spec.beta = gen::uniform(rng, 0.1, 10.0);
      const auto t = ground_state_transform(g, m, spec);
      cases.push_back({t.graph, t.measure, g, m});
    }
    std::size_t accepted = 0, empty = 0;
    bool isometry = true;
    double degree = 0.0, degree_path = 0.0, unitarity = 0.0, min_lh = 0.0;
    for (const auto& c : cases) {
      const auto certs = reconstruct(c.g1, c.m1, c.g2, c.m2);
      if (certs.empty()) ++empty;
      for (const auto& cert : certs) {
        if (!cert.accepted) continue;
        ++accepted;
        const auto inv = check_invariants(c.g1, c.m1, c.g2, c.m2, cert);
        degree = std::max(degree, inv.degree);
        degree_path = std::max(degree_path, inv.degree_path);
        isometry = isometry && inv.combinatorial_isometry;
        min_lh = std::min(min_lh, inv.min_laplacian_of_h);
        unitarity = std::max(unitarity, cert.residuals.unitarity);
      }
    }
    r.passed = empty == 0 && accepted > 0 && degree <= 1e-10 && isometry && degree_path <= 1e-10 &&
               unitarity <= 1e-11 && min_lh >= -1e-12;
    r.detail = std::to_string(accepted) + " certificates, " + std::to_string(empty) + " empty" +
               detail::fmt(", degree %.3g, degree path %.3g, unitarity %.3g", degree, degree_path, unitarity) +
               detail::fmt(", min Lh %.3g", min_lh) + (isometry ? ", d isometric" : ", d NOT isometric");
  });
}

inline CriterionResult non_uniqueness() {
  return detail::guarded(4, "counterexample without recurrence", [&](CriterionResult& r) {
    const Graph g = gen::two_vertex(1.0, 1.0, 0.0);
    const auto ce = counterexample_pair(g, Measure::uniform(2));
    if (!ce) {
      r.detail = "no counterexample produced";
      return;
    }
    const auto& res = ce->report.certificate.residuals;
    const double b = ce->report.max_relative_difference_b;
    r.passed = res.generator <= 1e-10 && res.semigroup <= 1e-10 && b >= 0.5;
    r.detail = detail::fmt("residual %.3g, max relative b difference %.17g", std::max(res.generator, res.semigroup), b);
  });
}

inline CriterionResult capacity_criterion() {
  return detail::guarded(5, "capacity along exhaustions", [&](CriterionResult& r) {
    Exhaustion path{gen::integer_path(-50, 50), 0, {}};
    path.root = path.host.index_of("0");
    for (int n = 1; n <= 40; ++n) {
      std::vector<std::size_t> s;
      for (int k = -n; k <= n; ++k) s.push_back(path.host.index_of(std::to_string(k)));
      path.subsets.push_back(std::move(s));
    }
    const auto path_rep = capacity_sequence(path);
    double path_err = 0.0;
    for (std::size_t i = 0; i < path_rep.caps.size(); ++i) {
      path_err = std::max(path_err, std::abs(path_rep.caps[i] * static_cast<double>(i + 1) - 2.0));
    }

    auto [tree, level] = gen::binary_tree(12);
    Exhaustion ball{std::move(tree), 0, {}};
    ball.root = ball.host.index_of("t00001");
    // The depth-12 ball is the whole host, which has no boundary and capacity 0.
    for (int n = 1; n <= 11; ++n) {
      std::vector<std::size_t> s;
      for (std::size_t v = 0; v < level.size(); ++v) {
        if (level[v] <= n) s.push_back(v);
      }
      ball.subsets.push_back(std::move(s));
    }
    const auto tree_rep = capacity_sequence(ball);
    double tree_err = 0.0;
    for (std::size_t i = 9; i < tree_rep.caps.size(); ++i) {
      tree_err = std::max(tree_err, std::abs(tree_rep.caps[i] - 1.0));
    }
    r.passed = path_err <= 1e-9 && tree_err <= 1e-3 && path_rep.verdict == Trend::RecurrentTrend &&
               tree_rep.verdict == Trend::TransientTrend;
    r.detail = detail::fmt("path |n cap - 2| %.3g, tree |cap - 1| %.3g", path_err, tree_err) + ", verdicts " +
               std::string(to_string(path_rep.verdict)) + "/" + std::string(to_string(tree_rep.verdict));
  });
}

inline CriterionResult liouville(std::uint64_t seed) {
  return detail::guarded(6, "positive superharmonic functions", [&](CriterionResult& r) {
    gen::Rng rng(seed);
    std::size_t wrong_free = 0, wrong_killed = 0;
    for (int trial = 0; trial < 30; ++trial) {
      const Graph g = gen::random_connected_graph(rng, gen::uniform_index(rng, 2, 12));
      if (find_positive_superharmonic(g, true).has_value()) ++wrong_free;
    }
    for (int trial = 0; trial < 30; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = 0.3;
      const Graph g = gen::random_connected_graph(rng, gen::uniform_index(rng, 2, 12), opts);
      const auto h = find_positive_superharmonic(g, true);
      const bool valid = h && (h->array() > 0.0).all() && is_superharmonic(g, *h) &&
                         h->maxCoeff() - h->minCoeff() > 1e-6;
      if (!valid) ++wrong_killed;
    }
    r.passed = wrong_free == 0 && wrong_killed == 0;
    r.detail = "nonconstant found without killing: " + std::to_string(wrong_free) +
               ", missing or invalid with killing: " + std::to_string(wrong_killed);
  });
}

inline CriterionResult heat_kernel_exactness(std::uint64_t seed) {
  return detail::guarded(7, "heat kernel exactness", [&](CriterionResult& r) {
    const Graph pair = gen::two_vertex();
    const HeatSemigroup two(pair, Measure::uniform(2));
    double closed = 0.0;
    for (double t : {0.1, 1.0, 5.0}) {
      const double e = std::exp(-2.0 * t);
      closed = std::max({closed, std::abs(two.kernel(t, 0, 0) - (1.0 + e) / 2.0),
                         std::abs(two.kernel(t, 0, 1) - (1.0 - e) / 2.0),
                         std::abs(two.kernel(t, 1, 1) - (1.0 + e) / 2.0)});
    }
    gen::Rng rng(seed);
    double law = 0.0;
    std::size_t violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = trial % 2 == 0 ? 0.3 : 0.0;
      const std::size_t n = gen::uniform_index(rng, 1, 15);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const Measure m = gen::random_measure(rng, n);
      const HeatSemigroup s(g, m);
      const double t1 = gen::uniform(rng, 0.0, 3.0);
      const double t2 = gen::uniform(rng, 0.0, 3.0);
      if (trial < 20) {
        law = std::max(law, (s.matrix(t1 + t2) - s.matrix(t1) * s.matrix(t2)).cwiseAbs().maxCoeff());
      }
      const VertexFunction f = gen::random_function(rng, n, 0.0, 1.0);
      const VertexFunction pf = s.apply(t1, f);
      if (pf.minCoeff() < -1e-12 || pf.maxCoeff() > 1.0 + 1e-12) ++violations;
    }
    r.passed = closed <= 1e-12 && law <= 1e-11 && violations == 0;
    r.detail = detail::fmt("closed form %.3g, semigroup law %.3g, sub-Markov violations %.0f", closed, law,
                           static_cast<double>(violations));
  });
}

inline CriterionResult greens_formulae(std::uint64_t seed) {
  return detail::guarded(8, "Green's formulae", [&](CriterionResult& r) {
    gen::Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = 0.3;
      const std::size_t n = gen::uniform_index(rng, 1, 12);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const Measure m = gen::random_measure(rng, n);
      const VertexFunction f = gen::random_function(rng, n);
      const VertexFunction v = gen::random_function(rng, n);
      worst = std::max(worst, greens_formula_residual(g, m, f, v));
    }
    r.passed = worst <= 1e-12;
    r.detail = detail::fmt("max residual %.3g (<=1e-12)", worst);
  });
}

inline CriterionResult discrete_time(std::uint64_t seed) {
  return detail::guarded(9, "discrete time intertwining", [&](CriterionResult& r) {
    gen::Rng rng(seed);
    double commute = 0.0, harmonic = 0.0, h_spread = 0.0;
    std::size_t empty = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = gen::uniform_index(rng, 2, 15);
      const Graph g = gen::random_connected_graph(rng, n);
      const Measure m = normalizing_measure(g);
      // Without killing the only positive superharmonic functions are constants.
      GstSpec spec;
      spec.h = VertexFunction::Constant(static_cast<Eigen::Index>(n), gen::uniform(rng, 0.2, 5.0));
      spec.tau = gen::random_permutation(rng, n);
      spec.beta = gen::uniform(rng, 0.1, 10.0);
      const auto t = ground_state_transform(g, m, spec);
      const auto p1 = markov_operator(t.graph);
      const auto p2 = markov_operator(g);
      const Eigen::MatrixXd u = OrderIso{spec.tau, spec.h}.matrix();
      commute = std::max(commute, (u * p1.matrix - p2.matrix * u).norm());
      harmonic = std::max(harmonic, (markov_apply(p2, spec.h) - spec.h).cwiseAbs().maxCoeff());
      const auto certs = reconstruct(t.graph, t.measure, g, m);
      if (certs.empty()) ++empty;
      for (const auto& c : certs) h_spread = std::max(h_spread, c.iso.h.maxCoeff() / c.iso.h.minCoeff() - 1.0);
    }
    r.passed = commute <= 1e-11 && harmonic <= 1e-11 && empty == 0 && h_spread <= 1e-9;
    r.detail = detail::fmt("|UP1 - P2U| %.3g, |P2h - h| %.3g, reconstructed h spread %.3g", commute, harmonic,
                           h_spread) +
               ", empty " + std::to_string(empty);
  });
}

inline CriterionResult special_cases(std::uint64_t seed) {
  return detail::guarded(10, "unit measure and standard weights", [&](CriterionResult& r) {
    gen::Rng rng(seed);
    double unit_gap = 0.0;
    std::size_t empty = 0, mismatched = 0;
    for (int trial = 0; trial < 20; ++trial) {
      gen::RandomGraphOptions opts;
      opts.killing_probability = trial % 2 == 0 ? 0.3 : 0.0;
      const std::size_t n = gen::uniform_index(rng, 2, 15);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const Measure ones = Measure::uniform(n);
      auto [g2, m2] = gen::relabel_scaled(g, ones, gen::random_permutation(rng, n), 1.0);
      const auto certs = reconstruct(g, ones, g2, m2);
      if (certs.empty()) ++empty;
      for (const auto& c : certs) {
        for (std::size_t y = 0; y < n; ++y) {
          unit_gap = std::max(unit_gap, std::abs(g.killing(c.iso.tau[y]) - g2.killing(y)));
          for (std::size_t z = 0; z < n; ++z) {
            unit_gap = std::max(unit_gap, std::abs(g.weight(c.iso.tau[y], c.iso.tau[z]) - g2.weight(y, z)));
          }
        }
      }
    }
    double standard_gap = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      gen::RandomGraphOptions opts;
      opts.standard_weights = true;
      opts.extra_edge_probability = 0.3;
      const std::size_t n = gen::uniform_index(rng, 2, 12);
      const Graph g = gen::random_connected_graph(rng, n, opts);
      const auto perm = gen::random_permutation(rng, n);
      const Graph g2 = gen::relabel_scaled(g, Measure::uniform(n), perm, 1.0).first;
      const auto certs = reconstruct(g, normalizing_measure(g), g2, normalizing_measure(g2));
      if (certs.empty()) ++empty;
      for (const auto& c : certs) {
        for (std::size_t y = 0; y < n; ++y) {
          for (std::size_t z = 0; z < n; ++z) {
            if (y == z) continue;
            const double recovered = c.beta * c.iso.h[static_cast<Eigen::Index>(y)] *
                                     c.iso.h[static_cast<Eigen::Index>(z)] * g2.weight(y, z);
            standard_gap = std::max(standard_gap, std::abs(recovered - std::round(recovered)));
            if (std::round(recovered) != g.weight(c.iso.tau[y], c.iso.tau[z])) ++mismatched;
          }
        }
      }
    }
    r.passed = empty == 0 && unit_gap <= 1e-10 && standard_gap <= 1e-10 && mismatched == 0;
    r.detail = detail::fmt("unit measure b,c gap %.3g, standard weights gap %.3g", unit_gap, standard_gap) +
               ", mismatched " + std::to_string(mismatched) + ", empty " + std::to_string(empty);
  });
}

inline CriterionResult gradient_ball_remark() {
  return detail::guarded(11, "gradient unit ball is not convex-closed", [&](CriterionResult& r) {
    const Graph g = gen::integer_path(-1, 1);
    const Measure m = Measure::uniform(3);
    VertexFunction plus = VertexFunction::Zero(3);
    VertexFunction minus = VertexFunction::Zero(3);
    plus[static_cast<Eigen::Index>(g.index_of("1"))] = 1.0;
    minus[static_cast<Eigen::Index>(g.index_of("-1"))] = 1.0;
    const bool in_plus = in_gradient_unit_ball(g, m, plus);
    const bool in_minus = in_gradient_unit_ball(g, m, minus);
    const bool in_sum = in_gradient_unit_ball(g, m, plus + minus);
    const double at_zero = gradient_norm_squared(g, m, plus + minus, g.index_of("0"));
    r.passed = in_plus && in_minus && !in_sum && at_zero == 2.0;
    r.detail = std::string("f+ ") + (in_plus ? "in" : "out") + ", f- " + (in_minus ? "in" : "out") +
               ", f+ + f- " + (in_sum ? "in" : "out") + detail::fmt(", squared gradient at 0 = %.17g", at_zero);
  });
}

inline std::vector<CriterionResult> run_all(std::uint64_t seed = 20240601) {
  return {gst_intertwining(seed),      main_theorem(seed + 1),   structure_invariants(seed + 2),
          non_uniqueness(),            capacity_criterion(),     liouville(seed + 3),
          heat_kernel_exactness(seed + 4), greens_formulae(seed + 5), discrete_time(seed + 6),
          special_cases(seed + 7),     gradient_ball_remark()};
}

}  // namespace diffgraph::acceptance

#endif  // DIFFGRAPH_ACCEPTANCE_HPP_
