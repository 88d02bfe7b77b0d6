#include "nbx/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <map>
#include <ostream>
#include <string>

#include "nbx/error.hpp"

namespace nbx {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

VertexId parse_id(std::string_view tok, std::size_t line) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || end != tok.data() + tok.size())
    throw IngestError(line, "'" + std::string(tok) + "' is not a vertex id");
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw IngestError(line, "vertex id " + std::string(tok) + " exceeds 2^63-1");
  return v;
}

bool skippable(std::string_view s) {
  for (char c : s) {
    if (c == '#') return true;
    if (!is_space(c)) return false;
  }
  return true;
}

}  // namespace

RawInput parse_edges(std::istream& in, bool undirected) {
  RawInput raw;
  raw.graph.directed = !undirected;
  std::optional<InputFormat> format;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    if (!format) format = line.find('\t') != std::string::npos ? InputFormat::Adjacency : InputFormat::EdgePairs;
    const auto toks = tokens(line);
    if (*format == InputFormat::EdgePairs) {
      if (toks.size() != 2) throw IngestError(lineno, "expected 'src dst', got " + std::to_string(toks.size()) + " fields");
      raw.graph.edges.push_back({parse_id(toks[0], lineno), parse_id(toks[1], lineno)});
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IngestError(lineno, "adjacency line has no tab after the vertex id");
    const auto head = tokens(std::string_view(line).substr(0, tab));
    if (head.size() != 1) throw IngestError(lineno, "adjacency line must start with exactly one vertex id");
    const VertexId src = parse_id(head[0], lineno);
    raw.graph.vertices.push_back(src);
    for (auto tok : tokens(std::string_view(line).substr(tab + 1))) raw.graph.edges.push_back({src, parse_id(tok, lineno)});
  }
  if (in.bad()) throw IngestError(lineno, "read failure");
  raw.format = format.value_or(InputFormat::EdgePairs);
  return raw;
}

EdgeList normalize(const RawInput& raw) {
  return EdgeList::normalize(raw.graph.vertices, raw.graph.edges, raw.graph.directed);
}

EdgeList ingest(const std::filesystem::path& path, bool undirected) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open " + path.string());
  return normalize(parse_edges(in, undirected));
}

void dump_adjacency(const EdgeList& g, std::ostream& out) {
  std::map<VertexId, std::vector<VertexId>> adj;
  for (VertexId v : g.vertices) adj[v];
  for (const auto& e : g.edges) adj[e.src].push_back(e.dst);
  for (const auto& [v, nbs] : adj) {
    out << v << '\t';
    for (std::size_t i = 0; i < nbs.size(); ++i) out << (i ? " " : "") << nbs[i];
    out << '\n';
  }
}

}  // namespace nbx
