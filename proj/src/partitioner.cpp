#include "nbx/partitioner.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "nbx/error.hpp"

namespace nbx {

std::optional<Slot> Partition::find_slot(VertexId id) const noexcept {
  auto hosts = host_ids();
  auto it = std::lower_bound(hosts.begin(), hosts.end(), id);
  if (it != hosts.end() && *it == id) return static_cast<Slot>(it - hosts.begin());
  auto guests = guest_ids();
  auto jt = std::lower_bound(guests.begin(), guests.end(), id);
  if (jt != guests.end() && *jt == id) return static_cast<Slot>(num_hosts + (jt - guests.begin()));
  return std::nullopt;
}

Slot Partition::slot_of(VertexId id) const {
  if (auto s = find_slot(id)) return *s;
  throw LookupError("vertex " + std::to_string(id) + " is not local to worker " + std::to_string(worker));
}

WorkerId assign_worker(VertexId v, std::size_t k) {
  if (k == 0) throw ConfigError("worker count must be at least 1");
  return static_cast<WorkerId>(v % k);
}

namespace {

void for_each_neighbor(const Graph& g, std::size_t index, auto&& fn) {
  for (VertexId u : g.out_neighbors(index)) fn(u);
  if (g.directed())
    for (VertexId u : g.in_neighbors(index)) fn(u);
}

std::vector<Slot> to_slots(const Partition& p, VertexId host, std::span<const VertexId> ids) {
  std::vector<Slot> out;
  out.reserve(ids.size());
  for (VertexId u : ids) {
    auto s = p.find_slot(u);
    if (!s)
      throw ConsistencyError("neighbor " + std::to_string(u) + " of host " + std::to_string(host) +
                             " is not resolvable on worker " + std::to_string(p.worker));
    out.push_back(*s);
  }
  return out;
}

}  // namespace

std::vector<Partition> build_partitions(const Graph& g, std::size_t k, const WorkerAssigner& assign) {
  if (k == 0) throw ConfigError("worker count must be at least 1");
  if (g.num_vertices() > std::numeric_limits<Slot>::max())
    throw ConfigError("graph too large for 32-bit local slots");

  auto owner_of = [&](VertexId v) {
    WorkerId w = assign(v, k);
    if (w >= k) throw ConfigError("assigner returned worker " + std::to_string(w) + " for k=" + std::to_string(k));
    return w;
  };

  std::vector<Partition> parts(k);
  for (std::size_t w = 0; w < k; ++w) {
    parts[w].worker = static_cast<WorkerId>(w);
    parts[w].num_workers = k;
    parts[w].directed = g.directed();
  }

  std::vector<WorkerId> owner(g.num_vertices());
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    VertexId v = g.id_at(i);
    owner[i] = owner_of(v);
    auto& p = parts[owner[i]];
    p.local_ids.push_back(v);
    p.host_degrees.push_back(g.degrees(i));
  }

  for (auto& p : parts) {
    p.num_hosts = p.local_ids.size();
    std::vector<VertexId> guests;
    for (std::size_t h = 0; h < p.num_hosts; ++h) {
      std::size_t index = g.index_of(p.local_ids[h]);
      for_each_neighbor(g, index, [&](VertexId u) {
        if (owner[g.index_of(u)] != p.worker) guests.push_back(u);
      });
    }
    std::sort(guests.begin(), guests.end());
    guests.erase(std::unique(guests.begin(), guests.end()), guests.end());
    for (VertexId u : guests) {
      p.local_ids.push_back(u);
      p.guest_owner.push_back(owner[g.index_of(u)]);
    }
    p.guest_directory.assign(p.num_hosts, {});
  }

  // Workers are visited in ascending order, so directory entries come out sorted.
  for (const auto& p : parts) {
    for (std::size_t gi = 0; gi < p.num_guests(); ++gi) {
      auto& home = parts[p.guest_owner[gi]];
      Slot host = home.slot_of(p.local_ids[p.num_hosts + gi]);
      home.guest_directory[host].push_back(p.worker);
    }
  }

  for (auto& p : parts) p.index = build_dual_index(p, g);
  return parts;
}

DualNeighborIndex build_dual_index(const Partition& p, const Graph& g) {
  DualNeighborIndex idx;
  idx.directed = p.directed;
  idx.out.resize(p.num_hosts);
  if (p.directed) idx.in.resize(p.num_hosts);
  idx.inverse.resize(p.num_local());

  for (Slot h = 0; h < p.num_hosts; ++h) {
    VertexId v = p.local_ids[h];
    std::size_t index = g.index_of(v);
    idx.out[h] = to_slots(p, v, g.out_neighbors(index));
    if (p.directed) idx.in[h] = to_slots(p, v, g.in_neighbors(index));
  }

  // Host slots ascend with vertex id, so appending in host order keeps each
  // inverse list sorted by id.
  for (Slot h = 0; h < p.num_hosts; ++h) {
    std::vector<Slot> reads = idx.out[h];
    if (p.directed) {
      // a reciprocal neighbor appears in both lists
      reads.insert(reads.end(), idx.in[h].begin(), idx.in[h].end());
      std::sort(reads.begin(), reads.end());
      reads.erase(std::unique(reads.begin(), reads.end()), reads.end());
    }
    for (Slot x : reads) idx.inverse[x].push_back(h);
  }
  check_dual_index(p, idx);
  return idx;
}

void check_dual_index(const Partition& p, const DualNeighborIndex& idx) {
  const std::size_t local = p.num_local();
  if (idx.out.size() != p.num_hosts || idx.inverse.size() != local ||
      (idx.directed ? idx.in.size() != p.num_hosts : !idx.in.empty()))
    throw ConsistencyError("index shape does not match partition");

  std::vector<std::vector<Slot>> transpose(local);
  auto collect = [&](Slot h, const std::vector<Slot>& list) {
    for (Slot x : list) {
      if (x >= local) throw ConsistencyError("dangling local reference " + std::to_string(x));
      transpose[x].push_back(h);
    }
  };
  for (Slot h = 0; h < p.num_hosts; ++h) {
    collect(h, idx.out[h]);
    if (idx.directed) collect(h, idx.in[h]);
  }
  for (std::size_t x = 0; x < local; ++x) {
    auto& t = transpose[x];
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    if (t != idx.inverse[x])
      throw ConsistencyError("inverse index of vertex " + std::to_string(p.local_ids[x]) +
                             " is not the transpose of N");
    if (x >= p.num_hosts && t.empty())
      throw ConsistencyError("guest " + std::to_string(p.local_ids[x]) + " is referenced by no host");
  }
}

}  // namespace nbx
