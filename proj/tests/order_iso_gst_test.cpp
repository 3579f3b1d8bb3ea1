#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "diffgraph/gst.hpp"
#include "diffgraph/lp.hpp"
#include "diffgraph/order_iso.hpp"
#include "diffgraph/random_graphs.hpp"
#include "diffgraph/recurrence.hpp"

namespace diffgraph {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::MalformedInput;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Every bijection τ whose gauge-fixed scaling satisfies the three structure
// equations, found by enumerating all permutations.
std::set<std::vector<std::size_t>> brute_force_intertwiners(const Graph& g1, const Measure& m1, const Graph& g2,
                                                            const Measure& m2) {
  const std::size_t n = g1.size();
  std::set<std::vector<std::size_t>> out;
  std::vector<std::size_t> tau(n);
  std::iota(tau.begin(), tau.end(), 0);
  do {
    const double beta = m1[tau[0]] / m2[0];
    Eigen::VectorXd h(static_cast<Eigen::Index>(n));
    for (std::size_t w = 0; w < n; ++w) h[w] = std::sqrt(m1[tau[w]] / (beta * m2[w]));
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x) {
      double lh = g2.killing(x) * h[x];
      for (std::size_t y = 0; y < n; ++y) {
        if (y != x) {
          ok = ok && rel(g1.weight(tau[x], tau[y]), beta * h[x] * h[y] * g2.weight(x, y)) <= 1e-9;
          lh += g2.weight(x, y) * (h[x] - h[y]);
        }
      }
      const double scale = std::max(g1.killing(tau[x]), beta * h[x] * (g2.weighted_degree(x) + g2.killing(x)) * h.maxCoeff());
      ok = ok && std::abs(g1.killing(tau[x]) - beta * h[x] * lh) <= 1e-9 * std::max(scale, 1e-300);
    }
    if (ok) out.insert(tau);
  } while (std::next_permutation(tau.begin(), tau.end()));
  return out;
}

TEST(Decompose, Examples) {
  Eigen::Matrix2d u;
  u << 0, 3, 2, 0;
  const auto iso = decompose_order_iso(u, Measure::uniform(2), Measure::uniform(2));
  EXPECT_EQ(iso.tau, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(iso.h, Eigen::Vector2d(3.0, 2.0));
  EXPECT_EQ(iso.matrix(), Eigen::MatrixXd(u));
  u << 0, -3, 2, 0;
  EXPECT_EQ(code_of([&] { decompose_order_iso(u, Measure::uniform(2), Measure::uniform(2)); }), ErrorCode::NotOrderIso);
  u << 1, 1, 0, 1;
  EXPECT_EQ(code_of([&] { decompose_order_iso(u, Measure::uniform(2), Measure::uniform(2)); }), ErrorCode::NotOrderIso);
}

TEST(Apply, Examples) {
  const OrderIso swap{{1, 0}, Eigen::Vector2d(3.0, 2.0)};
  EXPECT_EQ(apply(swap, Eigen::Vector2d(5.0, 7.0)), Eigen::Vector2d(21.0, 10.0));
  EXPECT_EQ(apply(OrderIso::identity(2), Eigen::Vector2d(5.0, 7.0)), Eigen::Vector2d(5.0, 7.0));
  // U 1_{τ(y)} = h(y) 1_y
  EXPECT_EQ(apply(swap, Eigen::Vector2d(0.0, 1.0)), Eigen::Vector2d(3.0, 0.0));
  const Measure ones = Measure::uniform(2);
  EXPECT_EQ(adjoint_apply(swap, ones, ones, Eigen::Vector2d(1.0, 0.0)), Eigen::Vector2d(0.0, 3.0));
  EXPECT_EQ(adjoint_apply(OrderIso::identity(2), ones, ones, Eigen::Vector2d(4.0, 6.0)), Eigen::Vector2d(4.0, 6.0));
}

TEST(Apply, AdjointMatchesWeightedTranspose) {
  gen::Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = gen::uniform_index(rng, 1, 10);
    const OrderIso iso{gen::random_permutation(rng, n), gen::random_function(rng, n, 0.1, 5.0)};
    const Measure m1 = gen::random_measure(rng, n);
    const Measure m2 = gen::random_measure(rng, n);
    const Eigen::MatrixXd oracle = m1.values().cwiseInverse().asDiagonal() * iso.matrix().transpose() * m2.values().asDiagonal();
    const VertexFunction g = gen::random_function(rng, n);
    EXPECT_LE((adjoint_apply(iso, m1, m2, g) - oracle * g).cwiseAbs().maxCoeff(), 1e-12);
    // U*U is multiplication by the constancy multiplier.
    const VertexFunction f = gen::random_function(rng, n);
    const VertexFunction uu = adjoint_apply(iso, m1, m2, apply(iso, f));
    EXPECT_LE((uu - constancy_multiplier(iso, m1, m2).cwiseProduct(f)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Beta, Examples) {
  const Graph two = gen::two_vertex();
  const Measure ones = Measure::uniform(2);
  EXPECT_EQ(beta_of(OrderIso::identity(2), two, ones, ones), 1.0);
  const OrderIso bumpy{{0, 1}, Eigen::Vector2d(1.0, 2.0)};
  EXPECT_EQ(code_of([&] { beta_of(bumpy, two, ones, ones); }), ErrorCode::NotConstantMultiplier);
  GstSpec spec = GstSpec::identity(2);
  spec.beta = 4.0;
  const auto gi = gst_intertwiner(two, ones, spec);
  EXPECT_NEAR(beta_of(gi.iso, gi.transformed.graph, gi.transformed.measure, ones), 4.0, 1e-15);
}

TEST(Intertwining, Examples) {
  const Graph tri = gen::triangle();
  const Measure ones = Measure::uniform(3);
  const auto same = verify_intertwining(tri, ones, tri, ones, OrderIso::identity(3));
  EXPECT_EQ(same.generator, 0.0);
  EXPECT_LE(same.semigroup, 1e-15);
  const auto cross = verify_intertwining(tri, ones, gen::three_path(), ones, OrderIso::identity(3));
  EXPECT_GE(cross.generator, 0.1);
}

TEST(StructureEquations, PerturbedEdgeShowsUp) {
  const Graph tri = gen::triangle();
  const Measure ones = Measure::uniform(3);
  const auto exact = verify_structure_equations(tri, ones, tri, ones, OrderIso::identity(3), 1.0);
  EXPECT_TRUE(exact.accepted);
  EXPECT_EQ(exact.residuals.edge, 0.0);
  const Graph bumped = gen::make_graph({"a", "b", "c"}, {{"a", "b", 1.1}, {"b", "c", 1.0}, {"c", "a", 1.0}});
  const auto off = verify_structure_equations(tri, ones, bumped, ones, OrderIso::identity(3), 1.0);
  EXPECT_FALSE(off.accepted);
  // |1 - 1.1| / 1.1
  EXPECT_NEAR(off.residuals.edge, 0.1 / 1.1, 1e-12);
}

TEST(Reconstruct, Examples) {
  const Graph tri = gen::triangle();
  const Measure ones = Measure::uniform(3);
  const auto [half, half_m] = gen::relabel_scaled(tri, ones, {1, 2, 0}, 2.0);
  const auto certs = reconstruct(tri, ones, half, half_m);
  ASSERT_EQ(certs.size(), 6u);
  std::set<std::vector<std::size_t>> taus;
  for (const auto& c : certs) {
    EXPECT_TRUE(c.accepted);
    EXPECT_NEAR(c.beta, 2.0, 1e-15);
    EXPECT_LE((c.iso.h.array() - 1.0).abs().maxCoeff(), 1e-15);
    taus.insert(c.iso.tau);
  }
  EXPECT_EQ(taus.size(), 6u);
  EXPECT_TRUE(std::is_sorted(certs.begin(), certs.end(), [](const auto& a, const auto& b) { return a.iso.tau < b.iso.tau; }));

  const auto self = reconstruct(tri, ones, tri, ones);
  EXPECT_EQ(self.front().iso.tau, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(self.front().beta, 1.0);
  EXPECT_TRUE(reconstruct(tri, ones, gen::three_path(), ones).empty());

  ReconstructOptions capped;
  capped.max_solutions = 2;
  EXPECT_EQ(reconstruct(tri, ones, half, half_m, capped).size(), 2u);
}

TEST(Reconstruct, AgreesWithPermutationEnumeration) {
  gen::Rng rng(42);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = gen::uniform_index(rng, 2, 6);
    gen::RandomGraphOptions opts;
    opts.standard_weights = trial % 3 == 0;
    opts.extra_edge_probability = 0.4;
    opts.killing_probability = trial % 3 == 1 ? 0.4 : 0.0;
    const Graph g = gen::random_connected_graph(rng, n, opts);
    const Measure m = opts.standard_weights ? Measure::uniform(n) : gen::random_measure(rng, n);
    Graph g2 = g;
    Measure m2 = m;
    if (trial % 4 == 3) {
      // An unrelated graph of the same size, usually without any intertwiner.
      g2 = gen::random_connected_graph(rng, n, opts);
      m2 = gen::random_measure(rng, n);
    } else if (g.has_killing()) {
      GstSpec spec;
      spec.h = *find_positive_superharmonic(g, true);
      spec.tau = gen::random_permutation(rng, n);
      spec.beta = gen::uniform(rng, 0.5, 3.0);
      auto t = ground_state_transform(g, m, spec);
      // Original is the second graph: certificates map into the transformed one.
      g2 = g;
      m2 = m;
      const auto expected = brute_force_intertwiners(t.graph, t.measure, g2, m2);
      ReconstructOptions opts_all;
      opts_all.max_solutions = 1000;
      std::set<std::vector<std::size_t>> found;
      for (const auto& c : reconstruct(t.graph, t.measure, g2, m2, opts_all)) found.insert(c.iso.tau);
      EXPECT_EQ(found, expected) << "trial " << trial;
      EXPECT_FALSE(found.empty());
      continue;
    } else {
      std::tie(g2, m2) = gen::relabel_scaled(g, m, gen::random_permutation(rng, n), gen::uniform(rng, 0.5, 3.0));
    }
    if (!is_connected(g2)) continue;
    ReconstructOptions opts_all;
    opts_all.max_solutions = 1000;
    std::set<std::vector<std::size_t>> found;
    for (const auto& c : reconstruct(g, m, g2, m2, opts_all)) found.insert(c.iso.tau);
    EXPECT_EQ(found, brute_force_intertwiners(g, m, g2, m2)) << "trial " << trial;
  }
}

TEST(Reconstruct, RejectsDisconnectedAndSizeMismatch) {
  const Graph split = gen::make_graph({"a", "b", "c"}, {{"a", "b", 1.0}}, {{"c", 1.0}});
  const Measure ones = Measure::uniform(3);
  EXPECT_EQ(code_of([&] { reconstruct(split, ones, split, ones); }), ErrorCode::NotConnected);
  EXPECT_TRUE(reconstruct(gen::triangle(), ones, gen::two_vertex(), Measure::uniform(2)).empty());
}

TEST(Certificates, InvariantsHold) {
  gen::Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const bool killed = trial % 2 == 0;
    gen::RandomGraphOptions opts;
    opts.killing_probability = killed ? 0.4 : 0.0;
    const std::size_t n = gen::uniform_index(rng, 2, 12);
    const Graph g = gen::random_connected_graph(rng, n, opts);
    const Measure m = gen::random_measure(rng, n);
    GstSpec spec;
    spec.h = *find_positive_superharmonic(g, killed);
    spec.tau = gen::random_permutation(rng, n);
    spec.beta = gen::uniform(rng, 0.1, 10.0);
    const auto t = ground_state_transform(g, m, spec);
    const auto certs = reconstruct(t.graph, t.measure, g, m);
    ASSERT_FALSE(certs.empty());
    for (const auto& c : certs) {
      ASSERT_TRUE(c.accepted);
      const auto inv = check_invariants(t.graph, t.measure, g, m, c);
      EXPECT_LE(inv.degree, 1e-10);
      EXPECT_TRUE(inv.combinatorial_isometry);
      EXPECT_LE(inv.degree_path, 1e-10);
      EXPECT_GE(inv.min_laplacian_of_h, -1e-12);
      EXPECT_LE(inv.form_transport, 1e-10);
      EXPECT_LE(c.residuals.unitarity, 1e-11);
      // h is harmonic exactly when the first graph carries no killing.
      const bool harmonic = is_harmonic(g, c.iso.h);
      double max_c1 = 0.0;
      for (std::size_t x = 0; x < n; ++x) max_c1 = std::max(max_c1, t.graph.killing(x));
      EXPECT_EQ(harmonic, max_c1 <= 1e-12);
      if (!killed) { EXPECT_LE(c.iso.h.maxCoeff() / c.iso.h.minCoeff() - 1.0, 1e-9); }
      // Recurrence verdicts agree under τ.
      EXPECT_EQ(classify_finite(t.graph).front().verdict, classify_finite(g).front().verdict);
    }
  }
}

TEST(Gst, Examples) {
  const Graph g = gen::triangle();
  const Measure ones = Measure::uniform(3);
  const auto same = ground_state_transform(g, ones, GstSpec::identity(3));
  EXPECT_EQ(same.graph.dense_weights(), g.dense_weights());
  EXPECT_EQ(same.measure.values(), ones.values());

  const Graph killed = gen::two_vertex(1.0, 1.0, 0.0);
  GstSpec spec = GstSpec::identity(2);
  spec.h = Eigen::Vector2d(1.0, 2.0);
  const auto t = ground_state_transform(killed, Measure::uniform(2), spec);
  EXPECT_EQ(t.measure.values(), Eigen::Vector2d(1.0, 4.0));
  EXPECT_EQ(t.graph.weight(0, 1), 2.0);
  EXPECT_EQ(t.graph.killing(0), 0.0);
  EXPECT_EQ(t.graph.killing(1), 2.0);
  EXPECT_TRUE(gst_intertwiner(killed, Measure::uniform(2), spec).certificate.accepted);

  GstSpec scale = GstSpec::identity(2);
  scale.beta = 4.0;
  const Measure m(Eigen::Vector2d(1.5, 0.5));
  const auto s = ground_state_transform(gen::two_vertex(1.0, 0.25, 0.5), m, scale);
  EXPECT_EQ(s.graph.weight(0, 1), 4.0);
  EXPECT_EQ(s.graph.killing(0), 1.0);
  EXPECT_EQ(s.graph.killing(1), 2.0);
  EXPECT_EQ(s.measure.values(), Eigen::Vector2d(6.0, 2.0));

  const auto id = gst_intertwiner(g, ones, GstSpec::identity(3));
  EXPECT_EQ(id.certificate.residuals.generator, 0.0);
  EXPECT_EQ(id.iso.tau, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Gst, RejectsInvalidSpecs) {
  const Graph g = gen::triangle();
  const Measure ones = Measure::uniform(3);
  GstSpec spec = GstSpec::identity(3);
  spec.h[0] = 2.0;  // ℒh(b) < 0
  EXPECT_EQ(code_of([&] { ground_state_transform(g, ones, spec); }), ErrorCode::NotSuperharmonic);
  spec = GstSpec::identity(3);
  spec.h[1] = 0.0;
  EXPECT_EQ(code_of([&] { ground_state_transform(g, ones, spec); }), ErrorCode::NotPositive);
  spec = GstSpec::identity(3);
  spec.tau = {0, 0, 1};
  EXPECT_EQ(code_of([&] { ground_state_transform(g, ones, spec); }), ErrorCode::NotBijective);
  spec = GstSpec::identity(3);
  spec.beta = -1.0;
  EXPECT_EQ(code_of([&] { ground_state_transform(g, ones, spec); }), ErrorCode::NotPositive);
  spec = GstSpec::identity(2);
  EXPECT_EQ(code_of([&] { ground_state_transform(g, ones, spec); }), ErrorCode::DimensionMismatch);
}

TEST(Gst, PropertiesOnRandomSpecs) {
  gen::Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const bool killed = trial % 2 == 0;
    gen::RandomGraphOptions opts;
    opts.killing_probability = killed ? 0.4 : 0.0;
    const std::size_t n = gen::uniform_index(rng, 2, 20);
    const Graph g = gen::random_connected_graph(rng, n, opts);
    const Measure m = gen::random_measure(rng, n);
    GstSpec spec;
    spec.h = *find_positive_superharmonic(g, killed);
    if (!killed) spec.h *= gen::uniform(rng, 0.5, 2.0);
    spec.tau = gen::random_permutation(rng, n);
    spec.beta = gen::uniform(rng, 0.1, 10.0);
    const auto gi = gst_intertwiner(g, m, spec);
    const auto& t = gi.transformed;
    EXPECT_TRUE(gi.certificate.accepted);
    EXPECT_LE(gi.certificate.residuals.max(), 1e-12);

    bool all_zero = true;
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_GE(t.graph.killing(x), -1e-12);
      all_zero = all_zero && t.graph.killing(x) <= 1e-12;
    }
    EXPECT_EQ(all_zero, is_harmonic(g, spec.h));

    for (int k = 0; k < 20; ++k) {
      const VertexFunction f = gen::random_function(rng, n);
      const double lhs = quadratic_form(t.graph, f);
      const double rhs = spec.beta * quadratic_form(g, apply(gi.iso, f));
      EXPECT_LE(rel(lhs, rhs), 1e-10);
    }
    const Eigen::VectorXd deg_h = degree_vector(t.graph, t.measure);
    const Eigen::VectorXd deg = degree_vector(g, m);
    for (std::size_t x = 0; x < n; ++x) EXPECT_LE(rel(deg_h[spec.tau[x]], deg[x]), 1e-10);

    // The search recovers the spec after fixing h at vertex 0.
    ReconstructOptions all;
    all.max_solutions = 1000;
    all.root = g.vertex(0);
    bool recovered = false;
    for (const auto& c : reconstruct(t.graph, t.measure, g, m, all)) {
      if (c.iso.tau != spec.tau) continue;
      recovered = (c.iso.h - spec.h / spec.h[0]).cwiseAbs().maxCoeff() <= 1e-9 &&
                  rel(c.beta, spec.beta * spec.h[0] * spec.h[0]) <= 1e-9;
    }
    EXPECT_TRUE(recovered) << "trial " << trial;
  }
}

TEST(Superharmonic, Search) {
  EXPECT_FALSE(find_positive_superharmonic(gen::triangle(), true).has_value());
  EXPECT_EQ(*find_positive_superharmonic(gen::triangle(), false), Eigen::Vector3d::Ones());
  const Graph killed = gen::two_vertex(1.0, 1.0, 0.0);
  const auto h = find_positive_superharmonic(killed, true);
  ASSERT_TRUE(h.has_value());
  EXPECT_TRUE(is_superharmonic(killed, *h));
  EXPECT_GT(h->maxCoeff() - h->minCoeff(), 1e-6);
  EXPECT_TRUE(is_superharmonic(killed, Eigen::Vector2d(1.0, 2.0)));
}

TEST(Counterexample, Examples) {
  const auto ce = counterexample_pair(gen::two_vertex(1.0, 1.0, 0.0), Measure::uniform(2));
  ASSERT_TRUE(ce.has_value());
  EXPECT_NEAR(ce->report.max_relative_difference_b, 1.0, 1e-12);
  EXPECT_NEAR(ce->graph.weight(0, 1), 2.0, 1e-12);
  EXPECT_TRUE(ce->report.certificate.accepted);
  EXPECT_FALSE(counterexample_pair(gen::triangle(), Measure::uniform(3)).has_value());
  const auto star = counterexample_pair(gen::star(3, 1.0), Measure::uniform(4));
  ASSERT_TRUE(star.has_value());
  EXPECT_TRUE(star->report.certificate.accepted);
  EXPECT_GT(star->report.max_relative_difference(), 0.0);
}

TEST(Simplex, KnownOptima) {
  // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, x ≤ 3  →  (3, 1), value 11
  lp::Problem p;
  p.rows.resize(3, 2);
  p.rows << 1, 1, 1, 3, 1, 0;
  p.rhs = Eigen::Vector3d(4, 6, 3);
  p.sense.assign(3, lp::Sense::LessEqual);
  p.objective = Eigen::Vector2d(3, 2);
  auto s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, 11.0, 1e-12);
  EXPECT_NEAR(s.x[0], 3.0, 1e-12);
  EXPECT_NEAR(s.x[1], 1.0, 1e-12);

  // Equality and ≥ rows: max -x - y, x + y = 2, x ≥ 0.5 → value -2
  p.rows.resize(2, 2);
  p.rows << 1, 1, 1, 0;
  p.rhs = Eigen::Vector2d(2, 0.5);
  p.sense = {lp::Sense::Equal, lp::Sense::GreaterEqual};
  p.objective = Eigen::Vector2d(-1, -1);
  s = lp::solve(p);
  ASSERT_EQ(s.status, lp::Status::Optimal);
  EXPECT_NEAR(s.objective, -2.0, 1e-12);
  EXPECT_GE(s.x[0], 0.5 - 1e-12);

  // x ≥ 2 and x ≤ 1
  p.rows.resize(2, 1);
  p.rows << 1, 1;
  p.rhs = Eigen::Vector2d(2, 1);
  p.sense = {lp::Sense::GreaterEqual, lp::Sense::LessEqual};
  p.objective = Eigen::VectorXd::Ones(1);
  EXPECT_EQ(lp::solve(p).status, lp::Status::Infeasible);

  // max x with only x ≥ 1
  p.rows.resize(1, 1);
  p.rows << 1;
  p.rhs = Eigen::VectorXd::Ones(1);
  p.sense = {lp::Sense::GreaterEqual};
  EXPECT_EQ(lp::solve(p).status, lp::Status::Unbounded);
}

TEST(Simplex, RandomProblemsRespectConstraintsAndBeatSamples) {
  gen::Rng rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index vars = static_cast<Eigen::Index>(gen::uniform_index(rng, 1, 5));
    const Eigen::Index rows = static_cast<Eigen::Index>(gen::uniform_index(rng, 1, 6));
    lp::Problem p;
    p.rows = Eigen::MatrixXd(rows, vars);
    for (Eigen::Index i = 0; i < p.rows.size(); ++i) p.rows.data()[i] = gen::uniform(rng, 0.1, 2.0);
    p.rhs = Eigen::VectorXd(rows);
    for (Eigen::Index i = 0; i < rows; ++i) p.rhs[i] = gen::uniform(rng, 1.0, 5.0);
    p.sense.assign(static_cast<std::size_t>(rows), lp::Sense::LessEqual);
    p.objective = gen::random_function(rng, static_cast<std::size_t>(vars));
    const auto s = lp::solve(p);
    ASSERT_EQ(s.status, lp::Status::Optimal);
    EXPECT_GE(s.x.minCoeff(), -1e-12);
    EXPECT_LE(((p.rows * s.x) - p.rhs).maxCoeff(), 1e-10);
    // No random feasible point does better.
    for (int k = 0; k < 200; ++k) {
      Eigen::VectorXd x(vars);
      for (Eigen::Index i = 0; i < vars; ++i) x[i] = gen::uniform(rng, 0.0, 5.0);
      if (((p.rows * x) - p.rhs).maxCoeff() > 0.0) continue;
      EXPECT_LE(p.objective.dot(x), s.objective + 1e-10);
    }
  }
}

}  // namespace
}  // namespace diffgraph
