// diffgraph: command-line front end for the graph diffusion library.
//
// Exit codes: 0 success, 1 domain error, 2 malformed input or usage.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffgraph/acceptance.hpp"
#include "diffgraph/diffgraph.hpp"
#include "diffgraph/json_io.hpp"

namespace {

using namespace diffgraph;
using io::json;

struct Globals {
  std::uint64_t seed = 20240601;
  std::optional<double> tol;
  std::string measure;
};

struct Loaded {
  Graph graph;
  Measure measure;
};

Loaded load(const std::string& path, const Globals& g) {
  auto doc = io::graph_from_json(io::read_file(path));
  if (g.measure == "normalizing") return {doc.graph, normalizing_measure(doc.graph)};
  if (g.measure == "uniform" || !doc.measure) return {doc.graph, Measure::uniform(doc.graph.size())};
  return {doc.graph, *doc.measure};
}

void emit(const json& j) { std::cout << io::dump(j) << '\n'; }

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Square matrix as CSV with a header row of vertex ids.
void emit_matrix_csv(const Graph& g, const Eigen::MatrixXd& a) {
  std::cout << "vertex";
  for (const auto& v : g.vertices()) std::cout << ',' << v;
  std::cout << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::cout << g.vertex(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      std::cout << ',' << csv_number(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    std::cout << '\n';
  }
}

json matrix_json(const Graph& g, const Eigen::MatrixXd& a) {
  json out = json::object();
  for (std::size_t i = 0; i < g.size(); ++i) {
    json row = json::object();
    for (std::size_t j = 0; j < g.size(); ++j) {
      row[g.vertex(j)] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    out[g.vertex(i)] = row;
  }
  return out;
}

json distance_json(const ExtendedDistance& d) {
  return d.is_infinite() ? json(nullptr) : json(d.value());
}

VertexFunction initial_function(const Graph& g, const std::string& f_path, const std::string& indicator) {
  if (!f_path.empty() && !indicator.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give either --f or --indicator");
  }
  if (!indicator.empty()) {
    VertexFunction f = VertexFunction::Zero(static_cast<Eigen::Index>(g.size()));
    f[static_cast<Eigen::Index>(g.index_of(indicator))] = 1.0;
    return f;
  }
  if (f_path.empty()) throw Error(ErrorCode::InvalidArgument, "an initial function is required (--f or --indicator)");
  return io::function_from_json(g, io::read_file(f_path));
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double t = 0.0;
    try {
      t = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorCode::MalformedInput, "bad time value \"" + item + "\"");
    out.push_back(t);
  }
  return out;
}

std::vector<std::vector<std::size_t>> default_balls(const Graph& g, std::size_t root) {
  const auto dist = combinatorial_distances_from(g, root);
  double radius = 0.0;
  for (double d : dist) {
    if (std::isfinite(d)) radius = std::max(radius, d);
  }
  std::vector<std::vector<std::size_t>> out;
  for (int r = 1; r < static_cast<int>(radius); ++r) {
    std::vector<std::size_t> ball;
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (dist[v] <= r) ball.push_back(v);
    }
    out.push_back(std::move(ball));
  }
  return out;
}

std::vector<std::vector<std::size_t>> subsets_from_json(const Graph& g, const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::MalformedInput, "subsets must be a list of vertex-id lists");
  std::vector<std::vector<std::size_t>> out;
  for (const auto& list : doc) {
    if (!list.is_array()) throw Error(ErrorCode::MalformedInput, "subsets must be a list of vertex-id lists");
    std::vector<std::size_t> s;
    for (const auto& id : list) {
      if (!id.is_string()) throw Error(ErrorCode::MalformedInput, "vertex ids must be strings");
      s.push_back(g.index_of(id.get<std::string>()));
    }
    out.push_back(std::move(s));
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Diffusion, intertwining and recurrence on weighted graphs"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--seed", globals.seed, "seed for randomized test vectors");
  app.add_option("--tol", globals.tol, "acceptance threshold for certificates");
  app.add_option("--measure", globals.measure, "uniform or normalizing; defaults to the file's measure, else uniform")
      ->check(CLI::IsMember({"uniform", "normalizing"}));

  std::string graph_path, graph2_path, from, to, f_path, indicator, matrix, kind = "d", times, h_path, tau_path,
      root, subsets_path;
  double t = 1.0, beta = 1.0;
  bool csv = false, nonconstant = false;
  std::size_t max_solutions = 16;

  auto graph_arg = [&](CLI::App* sub) { sub->add_option("graph", graph_path, "graph JSON file")->required(); };

  auto* validate = app.add_subcommand("validate", "check a graph file and print its canonical form");
  graph_arg(validate);

  auto* info = app.add_subcommand("info", "summary of degrees, components and operator bounds");
  graph_arg(info);
  info->add_option("--matrix", matrix, "print a matrix as CSV: weights, laplacian or generator")
      ->check(CLI::IsMember({"weights", "laplacian", "generator"}));

  auto* metric = app.add_subcommand("metric", "combinatorial (d) or degree-path (rho) distances");
  graph_arg(metric);
  metric->add_option("--kind", kind, "d or rho")->check(CLI::IsMember({"d", "rho"}));
  metric->add_option("--from", from);
  metric->add_option("--to", to);

  auto* heat = app.add_subcommand("heat", "apply the heat semigroup to an initial function");
  graph_arg(heat);
  heat->add_option("--t", t, "time");
  heat->add_option("--times", times, "comma-separated ascending times");
  heat->add_option("--f", f_path, "initial function JSON");
  heat->add_option("--indicator", indicator, "use the indicator of this vertex as initial function");
  heat->add_flag("--csv", csv, "time series as CSV");

  auto* kernel = app.add_subcommand("kernel", "heat kernel values");
  graph_arg(kernel);
  kernel->add_option("--t", t, "time");
  kernel->add_option("--from", from);
  kernel->add_option("--to", to);
  kernel->add_flag("--csv", csv, "full kernel matrix as CSV");

  auto* green = app.add_subcommand("green", "Green function G(x,y)");
  graph_arg(green);
  green->add_option("--from", from)->required();
  green->add_option("--to", to)->required();

  auto* markov = app.add_subcommand("markov", "transition operator over the normalizing measure");
  graph_arg(markov);
  markov->add_option("--f", f_path, "function to apply P to");
  markov->add_flag("--csv", csv, "transition matrix as CSV");

  auto* gst = app.add_subcommand("gst", "ground state transform; prints the transformed graph");
  graph_arg(gst);
  gst->set_help_flag("--help", "print this help message and exit");
  gst->add_option("--h", h_path, "positive superharmonic function JSON")->required();
  gst->add_option("--tau", tau_path, "vertex bijection JSON");
  gst->add_option("--beta", beta, "positive scale");

  auto* super = app.add_subcommand("superharmonic", "find a positive superharmonic function");
  graph_arg(super);
  super->add_flag("--nonconstant", nonconstant, "require a nonconstant function");

  auto* counter = app.add_subcommand("counterexample", "order-equivalent but different graph");
  graph_arg(counter);

  auto* recon = app.add_subcommand("reconstruct", "search for intertwining order isomorphisms");
  recon->add_option("graph1", graph_path, "first graph JSON")->required();
  recon->add_option("graph2", graph2_path, "second graph JSON")->required();
  recon->add_option("--root", root, "vertex of the second graph where h = 1");
  recon->add_option("--max-solutions", max_solutions);

  auto* recur = app.add_subcommand("recurrence", "capacities along an exhaustion");
  graph_arg(recur);
  recur->add_option("--root", root, "reference vertex; defaults to the first vertex");
  recur->add_option("--subsets", subsets_path, "JSON list of nested vertex-id lists");
  recur->add_flag("--csv", csv, "caps only, as CSV");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const double tol = globals.tol.value_or(kCertificateTolerance);

  if (*validate) {
    auto doc = io::graph_from_json(io::read_file(graph_path));
    emit(io::graph_to_json(doc.graph, doc.measure ? &*doc.measure : nullptr));
    return 0;
  }

  if (*selftest) {
    const auto results = acceptance::run_all(globals.seed);
    bool all = true;
    for (const auto& r : results) {
      std::printf("%-4d %-4s %-44s %s\n", r.id, r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
      all = all && r.passed;
    }
    return all ? 0 : 1;
  }

  if (*recon) {
    const auto a = load(graph_path, globals);
    const auto b = load(graph2_path, globals);
    ReconstructOptions opts;
    opts.max_solutions = max_solutions;
    if (!root.empty()) opts.root = root;
    opts.tolerance = tol;
    opts.seed = globals.seed;
    json out = json::array();
    for (const auto& c : reconstruct(a.graph, a.measure, b.graph, b.measure, opts)) {
      out.push_back(io::certificate_to_json(a.graph, b.graph, c));
    }
    emit(out);
    return 0;
  }

  const auto [g, m] = load(graph_path, globals);

  if (*info) {
    if (!matrix.empty()) {
      if (matrix == "weights") emit_matrix_csv(g, g.dense_weights());
      if (matrix == "laplacian") emit_matrix_csv(g, formal_laplacian_matrix(g));
      if (matrix == "generator") emit_matrix_csv(g, laplacian_matrix(g, m).matrix);
      return 0;
    }
    json comps = json::array();
    for (const auto& v : classify_finite(g)) {
      json ids = json::array();
      for (auto x : v.vertices) ids.push_back(g.vertex(x));
      comps.push_back({{"vertices", ids}, {"verdict", std::string(to_string(v.verdict))}});
    }
    const auto bound = norm_bound_report(g, m);
    emit({{"vertices", g.size()},
          {"edges", g.edges().size()},
          {"connected", is_connected(g)},
          {"has_killing", g.has_killing()},
          {"total_edge_weight", total_edge_weight(g)},
          {"degree", io::function_to_json(g, degree_vector(g, m))},
          {"sup_degree", bound.sup_degree},
          {"operator_norm", bound.operator_norm},
          {"components", comps}});
    return 0;
  }

  if (*metric) {
    if (from.empty() != to.empty()) throw Error(ErrorCode::InvalidArgument, "give both --from and --to");
    if (!from.empty()) {
      const auto d = kind == "d" ? combinatorial_distance(g, from, to) : degree_path_metric(g, m, from, to);
      emit({{"kind", kind}, {"from", from}, {"to", to}, {"distance", distance_json(d)}});
    } else {
      const auto k = kind == "d" ? MetricKind::Combinatorial : MetricKind::DegreePath;
      emit({{"kind", kind}, {"distances", matrix_json(g, distance_matrix(g, m, k))}});
    }
    return 0;
  }

  if (*heat) {
    const VertexFunction f = initial_function(g, f_path, indicator);
    const std::vector<double> ts = times.empty() ? std::vector<double>{t} : parse_times(times);
    const auto traj = heat_trajectory(g, m, f, ts);
    if (csv) {
      std::cout << "t";
      for (const auto& v : g.vertices()) std::cout << ',' << v;
      std::cout << '\n';
      for (std::size_t i = 0; i < ts.size(); ++i) {
        std::cout << csv_number(ts[i]);
        for (Eigen::Index x = 0; x < traj[i].size(); ++x) std::cout << ',' << csv_number(traj[i][x]);
        std::cout << '\n';
      }
      return 0;
    }
    json out = json::array();
    for (std::size_t i = 0; i < ts.size(); ++i) out.push_back({{"t", ts[i]}, {"u", io::function_to_json(g, traj[i])}});
    emit(times.empty() ? out.front() : out);
    return 0;
  }

  if (*kernel) {
    if (from.empty() != to.empty()) throw Error(ErrorCode::InvalidArgument, "give both --from and --to");
    if (!from.empty()) {
      emit({{"t", t}, {"from", from}, {"to", to}, {"kernel", heat_kernel(g, m, t, from, to)}});
      return 0;
    }
    // Row x holds k_t(x, ·).
    const Eigen::MatrixXd k = HeatSemigroup(g, m).matrix(t).transpose();
    if (csv) {
      emit_matrix_csv(g, k);
    } else {
      emit({{"t", t}, {"kernel", matrix_json(g, k)}});
    }
    return 0;
  }

  if (*green) {
    const auto v = green_function(g, m, from, to);
    emit({{"from", from}, {"to", to}, {"diverges", v.diverges}, {"value", v.diverges ? json(nullptr) : json(v.value)}});
    return 0;
  }

  if (*markov) {
    const auto p = markov_operator(g);
    if (csv) {
      emit_matrix_csv(g, p.matrix);
      return 0;
    }
    json out = {{"normalizing_measure", io::function_to_json(g, p.normalizing.values())},
                {"spectral_radius", spectral_radius(p)},
                {"matrix", matrix_json(g, p.matrix)}};
    if (!f_path.empty()) {
      out["Pf"] = io::function_to_json(g, markov_apply(p, io::function_from_json(g, io::read_file(f_path))));
    }
    emit(out);
    return 0;
  }

  if (*gst) {
    GstSpec spec = GstSpec::identity(g.size());
    spec.h = io::function_from_json(g, io::read_file(h_path), std::nullopt);
    if (!tau_path.empty()) spec.tau = io::permutation_from_json(g, io::read_file(tau_path));
    spec.beta = beta;
    const auto tg = ground_state_transform(g, m, spec);
    emit(io::graph_to_json(tg.graph, &tg.measure));
    return 0;
  }

  if (*super) {
    const auto h = find_positive_superharmonic(g, nonconstant);
    json out = {{"found", h.has_value()}, {"nonconstant_required", nonconstant}};
    out["h"] = h ? io::function_to_json(g, *h) : json(nullptr);
    if (h) out["laplacian_of_h"] = io::function_to_json(g, formal_laplacian(g, *h));
    emit(out);
    return 0;
  }

  if (*counter) {
    const auto ce = counterexample_pair(g, m);
    if (!ce) {
      emit({{"found", false}});
      return 0;
    }
    const auto& r = ce->report;
    emit({{"found", true},
          {"graph", io::graph_to_json(ce->graph, &ce->measure)},
          {"h", io::function_to_json(g, ce->iso.h)},
          {"certificate", io::certificate_to_json(ce->graph, g, r.certificate)},
          {"max_relative_difference", {{"b", r.max_relative_difference_b},
                                       {"c", r.max_relative_difference_c},
                                       {"m", r.max_relative_difference_m}}}});
    return 0;
  }

  if (*recur) {
    Exhaustion ex{g, root.empty() ? 0 : g.index_of(root), {}};
    ex.subsets = subsets_path.empty() ? default_balls(g, ex.root) : subsets_from_json(g, io::read_file(subsets_path));
    const auto rep = capacity_sequence(ex);
    std::string table = "n,cap\n";
    for (std::size_t i = 0; i < rep.caps.size(); ++i) table += std::to_string(i + 1) + "," + csv_number(rep.caps[i]) + "\n";
    if (csv) {
      std::cout << table;
      return 0;
    }
    emit({{"root", g.vertex(ex.root)},
          {"caps", rep.caps},
          {"verdict", std::string(to_string(rep.verdict))},
          {"fit", {{"intercept", rep.fit_intercept}, {"slope", rep.fit_slope}, {"r_squared", rep.fit_r_squared}}},
          {"caps_csv", table}});
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const diffgraph::Error& e) {
    std::cerr << diffgraph::io::dump({{"error", std::string(diffgraph::to_string(e.code()))}, {"message", e.what()}})
              << '\n';
    return diffgraph::is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << diffgraph::io::dump({{"error", "Internal"}, {"message", e.what()}}) << '\n';
    return 1;
  }
}
