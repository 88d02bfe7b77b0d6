#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbx/graph_model.hpp"

// Single-machine reference implementations. Everything here works from the
// raw edge list with ordered maps and sets and shares no code with the engine.
namespace nbx::oracle {

/// Raw input: edge records as read, plus vertices that may have no edges.
/// Self-loops and duplicates are tolerated and ignored.
struct RawGraph {
  std::vector<VertexId> vertices;
  std::vector<Edge> edges;
  bool directed = false;
};

struct OracleParams {
  std::optional<VertexId> source;
  double damping = 0.85;
  std::uint32_t iterations = 10;
};

struct OracleResult {
  /// One entry per vertex.
  std::map<VertexId, AttrValue> values;
  /// Graph-wide count (tc only).
  std::optional<std::int64_t> total;
};

/// Hop distance along edge direction from `source`; kIntMax when unreachable.
std::map<VertexId, std::int64_t> bfs(const RawGraph& g, VertexId source);
/// Minimum id of the (weakly) connected component.
std::map<VertexId, std::int64_t> cc(const RawGraph& g);
/// `iterations` synchronous sweeps from 1/n; dangling rank leaks.
std::map<VertexId, double> pagerank(const RawGraph& g, double damping, std::uint32_t iterations);
/// Teleport to `source` only; starts from 1 at the source.
std::map<VertexId, double> ppr(const RawGraph& g, VertexId source, double damping, std::uint32_t iterations);
/// Coreness by repeated removal of a minimum-degree vertex.
std::map<VertexId, std::int64_t> coreness(const RawGraph& g);
/// Sequential greedy coloring in descending (degree, id) order.
std::map<VertexId, std::int64_t> greedy_color(const RawGraph& g);
/// Per-vertex triangle counts, each triangle charged to its lowest (degree, id) corner.
std::map<VertexId, std::int64_t> triangles(const RawGraph& g);
/// Triangle total by sorted adjacency intersection.
std::int64_t triangle_count(const RawGraph& g);
/// Triangle total by checking every vertex triple.
std::int64_t triangle_count_brute(const RawGraph& g);

/// nullopt when `in_set` is an independent and maximal set; otherwise a description of the first defect.
std::optional<std::string> validate_mis(const RawGraph& g, const std::map<VertexId, bool>& in_set);
/// nullopt when `partner` (-1 = unmatched) is a symmetric, maximal matching over existing edges.
std::optional<std::string> validate_mm(const RawGraph& g, const std::map<VertexId, std::int64_t>& partner);

/// Names accepted by run(): bfs cc pr ppr core color tc.
const std::vector<std::string>& oracle_names();

/// Throws ParameterError for an unknown name or a missing/unknown source.
OracleResult run(std::string_view name, const RawGraph& g, const OracleParams& params = {});

}  // namespace nbx::oracle
