#include "nbx/graph_model.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

#include "nbx/error.hpp"

namespace nbx {

AttrKind kind_of(const AttrValue& v) noexcept { return static_cast<AttrKind>(v.index()); }

std::string_view kind_name(AttrKind k) noexcept {
  switch (k) {
    case AttrKind::Int64:
      return "int64";
    case AttrKind::Float64:
      return "float64";
    case AttrKind::Bool:
      return "bool";
  }
  return "?";
}

AttributeSchema AttributeSchema::make(std::vector<AttrSpec> specs) {
  if (specs.empty()) throw SchemaError("schema needs at least one attribute");
  if (specs.size() > kMaxAttributes) throw SchemaError("schema exceeds 255 attributes");
  AttributeSchema s;
  std::unordered_set<std::string> seen;
  for (auto& spec : specs) {
    if (spec.name.empty()) throw SchemaError("attribute name must be non-empty");
    if (!seen.insert(spec.name).second) throw SchemaError("duplicate attribute name '" + spec.name + "'");
    s.attrs_.push_back({std::move(spec.name), spec.kind});
  }
  return s;
}

const std::string& AttributeSchema::name(AttrPos pos) const {
  if (!valid_position(pos)) throw BoundsError("attribute position " + std::to_string(pos) + " out of range");
  return attrs_[pos - 1].name;
}

AttrKind AttributeSchema::kind(AttrPos pos) const {
  if (!valid_position(pos)) throw BoundsError("attribute position " + std::to_string(pos) + " out of range");
  return attrs_[pos - 1].kind;
}

AttrPos AttributeSchema::position_of(std::string_view name) const {
  for (std::size_t i = 0; i < attrs_.size(); ++i)
    if (attrs_[i].name == name) return i + 1;
  throw LookupError("no attribute named '" + std::string(name) + "'");
}

std::vector<AttrPos> AttributeSchema::all_positions() const {
  std::vector<AttrPos> out(attrs_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i + 1;
  return out;
}

namespace {

AttrValue zero_of(AttrKind k) {
  switch (k) {
    case AttrKind::Int64:
      return std::int64_t{0};
    case AttrKind::Float64:
      return 0.0;
    case AttrKind::Bool:
      return false;
  }
  return std::int64_t{0};
}

}  // namespace

VertexValue::VertexValue(const AttributeSchema& schema) {
  slots_.reserve(schema.size());
  for (AttrPos p = 1; p <= schema.size(); ++p) slots_.push_back(zero_of(schema.kind(p)));
}

const AttrValue& VertexValue::get(AttrPos pos) const {
  if (pos < 1 || pos > slots_.size())
    throw BoundsError("attribute position " + std::to_string(pos) + " out of range for value of size " +
                      std::to_string(slots_.size()));
  return slots_[pos - 1];
}

std::int64_t VertexValue::get_int(AttrPos pos) const {
  const auto& v = get(pos);
  if (const auto* p = std::get_if<std::int64_t>(&v)) return *p;
  throw SchemaError("attribute " + std::to_string(pos) + " is not int64");
}

double VertexValue::get_float(AttrPos pos) const {
  const auto& v = get(pos);
  if (const auto* p = std::get_if<double>(&v)) return *p;
  throw SchemaError("attribute " + std::to_string(pos) + " is not float64");
}

bool VertexValue::get_bool(AttrPos pos) const {
  const auto& v = get(pos);
  if (const auto* p = std::get_if<bool>(&v)) return *p;
  throw SchemaError("attribute " + std::to_string(pos) + " is not bool");
}

void VertexValue::set(AttrPos pos, AttrValue v) {
  if (pos < 1 || pos > slots_.size())
    throw BoundsError("attribute position " + std::to_string(pos) + " out of range");
  auto& slot = slots_[pos - 1];
  if (slot.index() != v.index())
    throw SchemaError("attribute " + std::to_string(pos) + " expects " +
                      std::string(kind_name(kind_of(slot))) + ", got " + std::string(kind_name(kind_of(v))));
  slot = v;
}

bool VertexValue::conforms_to(const AttributeSchema& schema) const noexcept {
  if (slots_.size() != schema.size()) return false;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (kind_of(slots_[i]) != schema.kind(i + 1)) return false;
  return true;
}

bool VertexValue::same_shape(const VertexValue& other) const noexcept {
  if (slots_.size() != other.slots_.size()) return false;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].index() != other.slots_[i].index()) return false;
  return true;
}

bool attr_bits_equal(const AttrValue& a, const AttrValue& b) noexcept {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a))
    return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b));
  return a == b;
}

bool operator==(const VertexValue& a, const VertexValue& b) noexcept {
  if (a.slots_.size() != b.slots_.size()) return false;
  for (std::size_t i = 0; i < a.slots_.size(); ++i)
    if (!attr_bits_equal(a.slots_[i], b.slots_[i])) return false;
  return true;
}

bool value_equal(const VertexValue& a, const VertexValue& b, std::span<const AttrPos> positions) {
  if (!a.same_shape(b)) throw SchemaError("values do not share a schema");
  for (AttrPos p : positions)
    if (!attr_bits_equal(a.get(p), b.get(p))) return false;
  return true;
}

EdgeList EdgeList::normalize(std::vector<VertexId> vertices, std::vector<Edge> edges, bool directed) {
  EdgeList out;
  out.directed = directed;
  out.vertices = std::move(vertices);
  out.vertices.reserve(out.vertices.size() + edges.size() * 2);
  std::vector<Edge> kept;
  kept.reserve(directed ? edges.size() : edges.size() * 2);
  for (const auto& e : edges) {
    out.vertices.push_back(e.src);
    out.vertices.push_back(e.dst);
    if (e.src == e.dst) continue;
    kept.push_back(e);
    if (!directed) kept.push_back({e.dst, e.src});
  }
  std::sort(out.vertices.begin(), out.vertices.end());
  out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  out.edges = std::move(kept);
  return out;
}

Graph::Graph(const EdgeList& list) : directed_(list.directed) {
  vertices_ = list.vertices;
  std::sort(vertices_.begin(), vertices_.end());
  vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
  const std::size_t n = vertices_.size();

  std::vector<std::pair<std::size_t, std::size_t>> dense;
  dense.reserve(list.edges.size());
  for (const auto& e : list.edges) {
    if (e.src == e.dst) continue;
    dense.emplace_back(index_of(e.src), index_of(e.dst));
  }
  std::sort(dense.begin(), dense.end());
  dense.erase(std::unique(dense.begin(), dense.end()), dense.end());
  num_edges_ = dense.size();

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (auto [s, d] : dense) {
    ++out_offsets_[s + 1];
    ++in_offsets_[d + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_targets_.resize(dense.size());
  in_sources_.resize(dense.size());
  std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  // `dense` is sorted by (src, dst): out-lists come out ascending, and in-lists
  // are filled in ascending src order as well.
  for (auto [s, d] : dense) {
    out_targets_[out_fill[s]++] = vertices_[d];
    in_sources_[in_fill[d]++] = vertices_[s];
  }

  total_degree_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto outs = out_neighbors(i);
    auto ins = in_neighbors(i);
    std::size_t common = 0;
    auto a = outs.begin();
    auto b = ins.begin();
    while (a != outs.end() && b != ins.end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++common;
        ++a;
        ++b;
      }
    }
    total_degree_[i] = outs.size() + ins.size() - common;
  }
}

bool Graph::contains(VertexId id) const noexcept {
  return std::binary_search(vertices_.begin(), vertices_.end(), id);
}

std::size_t Graph::index_of(VertexId id) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id);
  if (it == vertices_.end() || *it != id) throw LookupError("unknown vertex " + std::to_string(id));
  return static_cast<std::size_t>(it - vertices_.begin());
}

std::span<const VertexId> Graph::out_neighbors(std::size_t index) const {
  if (index >= vertices_.size()) throw BoundsError("vertex index out of range");
  return {out_targets_.data() + out_offsets_[index], out_offsets_[index + 1] - out_offsets_[index]};
}

std::span<const VertexId> Graph::in_neighbors(std::size_t index) const {
  if (index >= vertices_.size()) throw BoundsError("vertex index out of range");
  return {in_sources_.data() + in_offsets_[index], in_offsets_[index + 1] - in_offsets_[index]};
}

Degrees Graph::degrees(std::size_t index) const {
  return {in_neighbors(index).size(), out_neighbors(index).size(), total_degree_.at(index)};
}

}  // namespace nbx
