#include <doctest.h>

#include <map>
#include <set>

#include "nbx/error.hpp"
#include "nbx/oracle.hpp"
#include "support.hpp"

using namespace nbx;
using namespace nbx::oracle;

namespace {

RawGraph clique(VertexId n) {
  RawGraph g;
  for (VertexId a = 1; a <= n; ++a)
    for (VertexId b = a + 1; b <= n; ++b) g.edges.push_back({a, b});
  return g;
}

template <class M>
std::vector<typename M::mapped_type> values(const M& m) {
  std::vector<typename M::mapped_type> out;
  for (const auto& [k, v] : m) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("reference examples") {
  const RawGraph path{{}, {{1, 2}, {2, 3}}, false};
  CHECK(values(bfs(path, 1)) == std::vector<std::int64_t>{0, 1, 2});
  CHECK(values(coreness(clique(3))) == std::vector<std::int64_t>{2, 2, 2});
  CHECK(triangle_count(clique(4)) == 4);
  CHECK(triangle_count_brute(clique(4)) == 4);
  CHECK(values(cc({{}, {{1, 2}, {3, 4}}, false})) == std::vector<std::int64_t>{1, 1, 3, 3});
  CHECK(values(greedy_color(clique(3))) == std::vector<std::int64_t>{2, 1, 0});
}

TEST_CASE("self-loops and duplicates are ignored") {
  const RawGraph g{{}, {{1, 1}, {1, 2}, {1, 2}, {2, 1}}, false};
  CHECK(values(coreness(g)) == std::vector<std::int64_t>{1, 1});
  CHECK(triangle_count(g) == 0);
}

TEST_CASE("pagerank star") {
  const auto r = pagerank({{}, {{2, 1}, {3, 1}, {4, 1}}, true}, 0.85, 1);
  CHECK(r.at(1) == doctest::Approx(0.675));
  CHECK(r.at(2) == doctest::Approx(0.0375));
}

TEST_CASE("sorted intersection agrees with brute force") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto cg = testing::random_graph(seed, 10 + seed, 0.3, false);
    CHECK(triangle_count(cg.raw) == triangle_count_brute(cg.raw));
  }
}

TEST_CASE("per-vertex triangle charges sum to the total") {
  const auto cg = testing::random_graph(99, 50, 0.2, false);
  std::int64_t sum = 0;
  for (const auto& [v, c] : triangles(cg.raw)) sum += c;
  CHECK(sum == triangle_count_brute(cg.raw));
}

TEST_CASE("coreness by peeling matches a direct definition") {
  // v has coreness >= c iff it survives repeated deletion of vertices with degree < c
  const auto cg = testing::random_graph(55, 40, 0.2, false);
  const auto core = coreness(cg.raw);
  std::map<VertexId, std::set<VertexId>> adj;
  for (VertexId v : cg.raw.vertices) adj[v];
  for (const auto& e : cg.raw.edges) {
    adj[e.src].insert(e.dst);
    adj[e.dst].insert(e.src);
  }
  for (std::int64_t c = 1; c <= 12; ++c) {
    auto live = adj;
    bool removed = true;
    while (removed) {
      removed = false;
      for (auto it = live.begin(); it != live.end();) {
        std::size_t d = 0;
        for (VertexId y : it->second) d += live.count(y);
        if (static_cast<std::int64_t>(d) < c) {
          it = live.erase(it);
          removed = true;
        } else {
          ++it;
        }
      }
    }
    for (const auto& [v, k] : core) CHECK((k >= c) == (live.count(v) > 0));
  }
}

TEST_CASE("validators") {
  const RawGraph path{{}, {{1, 2}, {2, 3}}, false};
  CHECK_FALSE(validate_mis(path, {{1, true}, {2, false}, {3, true}}));
  CHECK(validate_mis(path, {{1, true}, {2, true}, {3, false}}));   // not independent
  CHECK(validate_mis(path, {{1, true}, {2, false}, {3, false}}));  // not maximal
  CHECK_FALSE(validate_mm(path, {{1, 2}, {2, 1}, {3, -1}}));
  CHECK(validate_mm(path, {{1, 2}, {2, -1}, {3, -1}}));   // not symmetric
  CHECK(validate_mm(path, {{1, -1}, {2, -1}, {3, -1}}));  // not maximal
  CHECK(validate_mm(path, {{1, 3}, {2, -1}, {3, 1}}));    // not an edge
}

TEST_CASE("run dispatch") {
  const RawGraph path{{}, {{1, 2}, {2, 3}}, false};
  CHECK(run("tc", clique(4)).total == 4);
  CHECK(std::get<std::int64_t>(run("bfs", path, {1}).values.at(3)) == 2);
  CHECK_THROWS_AS(run("nope", path), ParameterError);
  CHECK_THROWS_AS(run("bfs", path), ParameterError);
}
