#pragma once

#include <filesystem>
#include <iosfwd>

#include "nbx/graph_model.hpp"
#include "nbx/oracle.hpp"

namespace nbx {

enum class InputFormat { Adjacency, EdgePairs };

/// Edge records exactly as read (self-loops and duplicates kept).
struct RawInput {
  InputFormat format = InputFormat::EdgePairs;
  oracle::RawGraph graph;
};

/// Parses either `id<TAB>nb1 nb2 ...` adjacency lines or `src dst` pairs. The
/// format is fixed by the first data line: a tab means adjacency. Blank lines
/// and lines starting with '#' are skipped. Ids must fit in a signed 64-bit
/// integer. Throws IngestError with the 1-based line number.
RawInput parse_edges(std::istream& in, bool undirected = false);

/// Reads and normalizes a file: drops self-loops and duplicates and
/// symmetrizes when `undirected`. Throws IngestError (line 0 for I/O failures).
EdgeList ingest(const std::filesystem::path& path, bool undirected = false);
EdgeList normalize(const RawInput& raw);

/// Writes `g` in the adjacency format, one line per vertex in ascending id order.
void dump_adjacency(const EdgeList& g, std::ostream& out);

}  // namespace nbx
