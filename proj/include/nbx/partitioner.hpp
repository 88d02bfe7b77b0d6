#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nbx/graph_model.hpp"

namespace nbx {

/// Index into one worker's local vertex table. Hosts occupy [0, num_hosts),
/// guests follow; each range is sorted by vertex id.
using Slot = std::uint32_t;

/// Per-worker neighbor index N and inverse neighbor index I.
///
/// For directed graphs `in[h]` and `out[h]` hold the in- and out-neighbors of
/// host slot h. Undirected graphs store the neighbor list once, in `out`, and
/// leave `in` empty. `inverse[x]` lists the host slots whose N contains local
/// slot x. All lists are ordered by ascending vertex id.
struct DualNeighborIndex {
  bool directed = false;
  std::vector<std::vector<Slot>> in;
  std::vector<std::vector<Slot>> out;
  std::vector<std::vector<Slot>> inverse;

  bool operator==(const DualNeighborIndex&) const = default;
};

struct Partition {
  WorkerId worker = 0;
  std::size_t num_workers = 1;
  bool directed = false;

  std::vector<VertexId> local_ids;
  std::size_t num_hosts = 0;

  /// Degrees over the full input graph, one per host.
  std::vector<Degrees> host_degrees;
  /// Owner of each guest, indexed by (slot - num_hosts).
  std::vector<WorkerId> guest_owner;
  /// Remote workers holding a guest copy of each host, ascending.
  std::vector<std::vector<WorkerId>> guest_directory;

  DualNeighborIndex index;

  std::size_t num_local() const noexcept { return local_ids.size(); }
  std::size_t num_guests() const noexcept { return local_ids.size() - num_hosts; }
  bool is_host(Slot s) const noexcept { return s < num_hosts; }

  std::span<const VertexId> host_ids() const noexcept { return {local_ids.data(), num_hosts}; }
  std::span<const VertexId> guest_ids() const noexcept {
    return {local_ids.data() + num_hosts, local_ids.size() - num_hosts};
  }

  std::optional<Slot> find_slot(VertexId id) const noexcept;
  /// Throws LookupError when `id` is neither a host nor a guest here.
  Slot slot_of(VertexId id) const;
};

using WorkerAssigner = std::function<WorkerId(VertexId, std::size_t)>;

/// `id mod k`. Throws ConfigError when k == 0.
WorkerId assign_worker(VertexId v, std::size_t k);

/// Hash-partitions `g` over k workers, materializes one-hop guests and builds
/// each worker's dual index.
std::vector<Partition> build_partitions(const Graph& g, std::size_t k,
                                        const WorkerAssigner& assign = assign_worker);

/// Builds N and I for `p` from the input graph. Every neighbor of a host must
/// resolve to a local slot, otherwise ConsistencyError.
DualNeighborIndex build_dual_index(const Partition& p, const Graph& g);

/// Throws ConsistencyError unless `idx` fits `p` and I is exactly the transpose of N.
void check_dual_index(const Partition& p, const DualNeighborIndex& idx);

}  // namespace nbx
