#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DIFFGRAPH_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(DIFFGRAPH_DATA) + "/" + name; }

fs::path scratch(const std::string& name, const std::string& content) {
  const fs::path p = fs::temp_directory_path() / ("diffgraph_cli_test_" + name);
  std::ofstream(p) << content;
  return p;
}

TEST(Cli, ValidatePrintsCanonicalGraph) {
  const auto r = run("validate " + data("triangle.json"));
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["vertices"].size(), 3u);
  EXPECT_EQ(j["edges"].size(), 3u);
}

TEST(Cli, ReconstructFindsScaledCopy) {
  const auto r = run("reconstruct " + data("k3a.json") + " " + data("k3b.json"));
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  ASSERT_FALSE(j.empty());
  for (const auto& c : j) EXPECT_NEAR(c["beta"].get<double>(), 2.0, 1e-12);
}

TEST(Cli, DegreePathMetric) {
  const auto r = run("metric " + data("p3.json") + " --kind rho --from -1 --to 1");
  ASSERT_EQ(r.status, 0);
  EXPECT_NEAR(json::parse(r.out)["distance"].get<double>(), std::sqrt(2.0), 1e-12);
}

TEST(Cli, ExitCodes) {
  const auto bad = scratch("bad.json", "{\"vertices\": [");
  EXPECT_EQ(run("validate " + bad.string()).status, 2);
  const auto loop = scratch("loop.json", R"({"vertices":["a"],"edges":[{"u":"a","v":"a","w":1}]})");
  EXPECT_EQ(run("validate " + loop.string()).status, 2);
  EXPECT_EQ(run("validate " + data("triangle.json") + " --no-such-flag").status, 2);
  EXPECT_EQ(run("").status, 2);
  // ℒh < 0 at the bumped vertex's neighbours.
  const auto h = scratch("h.json", R"({"a":2,"b":1,"c":1})");
  EXPECT_EQ(run("gst " + data("triangle.json") + " --h " + h.string()).status, 1);
  EXPECT_EQ(run("counterexample " + data("triangle.json")).status, 0);
}

TEST(Cli, OutputIsDeterministic) {
  const std::string args = "heat " + data("k3a.json") + " --times 0.1,0.5,2 --indicator a";
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
}

TEST(Cli, TransformThenReconstruct) {
  const auto t = run("gst " + data("two_vertex_killed.json") + " --h " + data("two_vertex_h.json") + " --beta 3");
  ASSERT_EQ(t.status, 0);
  const auto transformed = scratch("transformed.json", t.out);
  const auto r = run("reconstruct " + transformed.string() + " " + data("two_vertex_killed.json") + " --root 1");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  bool found = false;
  for (const auto& c : j) {
    if (c["tau"]["1"] == "1" && c["tau"]["2"] == "2") {
      found = true;
      EXPECT_NEAR(c["beta"].get<double>(), 3.0, 1e-12);
      EXPECT_NEAR(c["h"]["2"].get<double>(), 2.0, 1e-12);
    }
  }
  EXPECT_TRUE(found) << r.out;
}

TEST(Cli, RecurrenceOnPath) {
  const auto subsets = scratch("subsets.json", R"([["0"]])");
  const auto r = run("recurrence " + data("p3.json") + " --root 0 --subsets " + subsets.string());
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["caps"].size(), 1u);
  EXPECT_NEAR(j["caps"][0].get<double>(), 2.0, 1e-12);
}

}  // namespace
