#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace nbx {

using VertexId = std::uint64_t;
using WorkerId = std::uint32_t;

/// 1-based attribute position within a schema.
using AttrPos = std::size_t;

/// Sentinel for "unreachable/undefined" integer attributes.
inline constexpr std::int64_t kIntMax = 2147483647;

enum class AttrKind : std::uint8_t { Int64 = 0, Float64 = 1, Bool = 2 };

using AttrValue = std::variant<std::int64_t, double, bool>;

AttrKind kind_of(const AttrValue& v) noexcept;
std::string_view kind_name(AttrKind k) noexcept;

struct AttrSpec {
  std::string name;
  AttrKind kind;
};

/// Ordered, named, typed vertex attributes. Positions run 1..size().
class AttributeSchema {
 public:
  static constexpr std::size_t kMaxAttributes = 255;

  AttributeSchema() = default;

  /// Throws SchemaError on empty input, duplicate names, or more than 255 attributes.
  static AttributeSchema make(std::vector<AttrSpec> specs);
  static AttributeSchema make(std::initializer_list<AttrSpec> specs) {
    return make(std::vector<AttrSpec>(specs));
  }

  std::size_t size() const noexcept { return attrs_.size(); }
  bool empty() const noexcept { return attrs_.empty(); }

  const std::string& name(AttrPos pos) const;
  AttrKind kind(AttrPos pos) const;
  AttrPos position_of(std::string_view name) const;

  bool valid_position(AttrPos pos) const noexcept { return pos >= 1 && pos <= attrs_.size(); }

  /// All positions 1..size().
  std::vector<AttrPos> all_positions() const;

  bool operator==(const AttributeSchema&) const = default;

 private:
  struct Entry {
    std::string name;
    AttrKind kind;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> attrs_;
};

/// One slot per schema attribute. The runtime kind of every slot is fixed at
/// construction; set() rejects a value of a different kind.
class VertexValue {
 public:
  VertexValue() = default;

  /// Zero/false-initialized value for the schema.
  explicit VertexValue(const AttributeSchema& schema);

  std::size_t size() const noexcept { return slots_.size(); }

  const AttrValue& get(AttrPos pos) const;
  std::int64_t get_int(AttrPos pos) const;
  double get_float(AttrPos pos) const;
  bool get_bool(AttrPos pos) const;

  void set(AttrPos pos, AttrValue v);

  /// True when slot count and every slot kind agree with the schema.
  bool conforms_to(const AttributeSchema& schema) const noexcept;
  bool same_shape(const VertexValue& other) const noexcept;

  std::span<const AttrValue> slots() const noexcept { return slots_; }

  /// Exact comparison over every slot; floats compare bitwise.
  friend bool operator==(const VertexValue& a, const VertexValue& b) noexcept;

 private:
  std::vector<AttrValue> slots_;
};

/// True iff `a` and `b` agree on every listed position (floats bitwise).
/// Throws SchemaError if the two values do not share a shape and BoundsError
/// for a position outside the shape.
bool value_equal(const VertexValue& a, const VertexValue& b, std::span<const AttrPos> positions);

bool attr_bits_equal(const AttrValue& a, const AttrValue& b) noexcept;

struct Edge {
  VertexId src;
  VertexId dst;
  auto operator<=>(const Edge&) const = default;
};

/// Normalized edge list: sorted unique vertex ids and sorted unique directed
/// edge records without self-loops. Undirected lists hold both directions.
struct EdgeList {
  std::vector<VertexId> vertices;
  std::vector<Edge> edges;
  bool directed = true;

  /// Sorts, deduplicates, drops self-loops, symmetrizes when undirected and
  /// registers every endpoint as a vertex.
  static EdgeList normalize(std::vector<VertexId> vertices, std::vector<Edge> edges, bool directed);
};

struct GraphMeta {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  bool directed = true;
};

struct Degrees {
  std::uint64_t in = 0;
  std::uint64_t out = 0;
  /// Number of distinct neighbors in either direction.
  std::uint64_t total = 0;
};

/// Immutable logical graph in CSR form over dense indices 0..n-1 (ascending id order).
class Graph {
 public:
  Graph() = default;
  explicit Graph(const EdgeList& list);

  GraphMeta meta() const noexcept { return {vertices_.size(), num_edges_, directed_}; }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::uint64_t num_edges() const noexcept { return num_edges_; }
  bool directed() const noexcept { return directed_; }

  std::span<const VertexId> vertices() const noexcept { return vertices_; }
  VertexId id_at(std::size_t index) const { return vertices_.at(index); }
  bool contains(VertexId id) const noexcept;
  /// Throws LookupError for unknown ids.
  std::size_t index_of(VertexId id) const;

  std::span<const VertexId> out_neighbors(std::size_t index) const;
  std::span<const VertexId> in_neighbors(std::size_t index) const;
  Degrees degrees(std::size_t index) const;

 private:
  std::vector<VertexId> vertices_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<VertexId> out_targets_, in_sources_;
  std::vector<std::uint64_t> total_degree_;
  std::uint64_t num_edges_ = 0;
  bool directed_ = true;
};

}  // namespace nbx
