#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nbx/algorithms.hpp"
#include "nbx/engine.hpp"
#include "nbx/oracle.hpp"

namespace nbx::testing {

struct CorpusGraph {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double p = 0.0;
  oracle::RawGraph raw;
  VertexId source = 0;
};

/// G(n, p) over sparse ids (3 + 5*j). Undirected graphs draw each pair once,
/// directed graphs draw each ordered pair.
inline CorpusGraph random_graph(std::uint64_t seed, std::size_t n, double p, bool directed) {
  std::mt19937_64 rng(seed);
  CorpusGraph g{seed, n, p, {}, 0};
  g.raw.directed = directed;
  std::bernoulli_distribution coin(p);
  auto id = [](std::size_t j) { return static_cast<VertexId>(3 + 5 * j); };
  for (std::size_t j = 0; j < n; ++j) g.raw.vertices.push_back(id(j));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = directed ? 0 : a + 1; b < n; ++b)
      if (a != b && coin(rng)) g.raw.edges.push_back({id(a), id(b)});
  if (n > 0) g.source = id(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  return g;
}

/// The fixed 100-graph corpus: n in [10, 200], p cycling through {0.02, 0.1, 0.3}.
inline std::vector<CorpusGraph> corpus(bool directed, std::size_t count = 100) {
  static constexpr double kProbs[] = {0.02, 0.1, 0.3};
  std::vector<CorpusGraph> out;
  std::mt19937_64 sizes(20240611);
  std::uniform_int_distribution<std::size_t> pick_n(10, 200);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t n = pick_n(sizes);
    out.push_back(random_graph(1000 + i, n, kProbs[i % 3], directed));
  }
  return out;
}

inline Graph to_graph(const oracle::RawGraph& raw) {
  return Graph(EdgeList::normalize(raw.vertices, raw.edges, raw.directed));
}

inline EngineConfig config(std::size_t k) {
  EngineConfig cfg;
  cfg.workers = k;
  return cfg;
}

inline algo::AlgorithmSpec make(const std::string& name, const Graph& g, VertexId source, std::uint64_t seed = 7) {
  algo::AlgorithmParams params;
  params.source = source;
  params.seed = seed;
  return algo::make_algorithm(name, params, g);
}

inline RunResult run(const Graph& g, const algo::AlgorithmSpec& spec, EngineConfig cfg) {
  Engine engine(g, std::move(cfg));
  return engine.run(spec.program);
}

/// Algorithms run on directed corpus graphs; the rest use the undirected corpus.
inline bool wants_directed(const std::string& name) { return name == "bfs" || name == "pr" || name == "ppr"; }

}  // namespace nbx::testing
