#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbx/engine.hpp"
#include "nbx/graph_model.hpp"

namespace nbx::algo {

/// An algorithm as a neighborhood-expression program plus the attributes it reports.
struct AlgorithmSpec {
  std::string name;
  Program program;
  std::vector<AttrPos> output;
  /// Vertex the program is rooted at (BFS, PPR).
  std::optional<VertexId> source;
};

struct AlgorithmParams {
  std::optional<VertexId> source;
  double damping = 0.85;
  std::uint32_t iterations = 10;
  std::uint64_t seed = 0;
};

// MIS vertex states.
inline constexpr std::int64_t kUndecided = 0;
inline constexpr std::int64_t kInSet = 1;
inline constexpr std::int64_t kExcluded = 2;

// Marker for "no vertex" in id-valued attributes.
inline constexpr std::int64_t kNone = -1;

/// dis: hop distance along in-edges from `source`, kIntMax when unreachable.
AlgorithmSpec bfs(VertexId source);
/// label: minimum vertex id of the component.
AlgorithmSpec cc();
/// rank after exactly `iterations` synchronous sweeps from 1/n. Dangling mass leaks.
AlgorithmSpec pagerank(double damping = 0.85, std::uint32_t iterations = 10);
/// PageRank with all teleport mass on `source`; starts from 1 at the source.
AlgorithmSpec ppr(VertexId source, double damping = 0.85, std::uint32_t iterations = 10);
/// core: coreness via repeated local h-index updates starting from the degree.
AlgorithmSpec kcore();
/// color: greedy coloring in descending (degree, id) priority.
AlgorithmSpec coloring();
/// state: Luby-style maximal independent set, randomness keyed by `seed`.
AlgorithmSpec mis(std::uint64_t seed);
/// partner: maximal matching by min-id propose / accept / decide rounds.
AlgorithmSpec mm(std::uint64_t seed = 0);
/// tri: triangles whose lowest-priority corner is this vertex.
AlgorithmSpec tc();

const std::vector<std::string>& algorithm_names();

/// Builds the named algorithm. Throws ParameterError for an unknown name, a
/// missing source, or a source that is not a vertex of `g`.
AlgorithmSpec make_algorithm(std::string_view name, const AlgorithmParams& params, const Graph& g);

/// Sum of per-vertex triangle counts in a tc() result.
std::int64_t triangle_total(const RunResult& r);

}  // namespace nbx::algo
