#include "nbx/oracle.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <utility>

#include "nbx/error.hpp"

namespace nbx::oracle {

namespace {

using Adj = std::map<VertexId, std::set<VertexId>>;

struct Views {
  Adj out;
  Adj in;
  Adj both;
};

Views views(const RawGraph& g) {
  Views v;
  auto touch = [&](VertexId x) {
    v.out[x];
    v.in[x];
    v.both[x];
  };
  for (VertexId x : g.vertices) touch(x);
  for (const auto& e : g.edges) {
    touch(e.src);
    touch(e.dst);
    if (e.src == e.dst) continue;
    v.out[e.src].insert(e.dst);
    v.in[e.dst].insert(e.src);
    v.both[e.src].insert(e.dst);
    v.both[e.dst].insert(e.src);
    if (!g.directed) {
      v.out[e.dst].insert(e.src);
      v.in[e.src].insert(e.dst);
    }
  }
  return v;
}

bool higher(const Adj& both, VertexId a, VertexId b) {
  const auto da = both.at(a).size();
  const auto db = both.at(b).size();
  return da != db ? da > db : a > b;
}

std::map<VertexId, double> rank_sweeps(const RawGraph& g, std::optional<VertexId> source, double a,
                                       std::uint32_t iterations) {
  const Views v = views(g);
  const double n = static_cast<double>(v.out.size());
  std::map<VertexId, double> rank;
  for (const auto& [x, _] : v.out) rank[x] = source ? (x == *source ? 1.0 : 0.0) : 1.0 / n;
  for (std::uint32_t it = 0; it < iterations; ++it) {
    std::map<VertexId, double> next;
    for (const auto& [x, preds] : v.in) {
      double flow = 0.0;
      for (VertexId u : preds) flow += rank[u] / static_cast<double>(v.out.at(u).size());
      const double teleport = source ? (x == *source ? 1.0 - a : 0.0) : (1.0 - a) / n;
      next[x] = teleport + a * flow;
    }
    rank = std::move(next);
  }
  return rank;
}

}  // namespace

std::map<VertexId, std::int64_t> bfs(const RawGraph& g, VertexId source) {
  const Views v = views(g);
  std::map<VertexId, std::int64_t> dis;
  for (const auto& [x, _] : v.out) dis[x] = kIntMax;
  if (!v.out.count(source)) return dis;
  std::deque<VertexId> queue{source};
  dis[source] = 0;
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    for (VertexId y : v.out.at(x)) {
      if (dis[y] != kIntMax) continue;
      dis[y] = dis[x] + 1;
      queue.push_back(y);
    }
  }
  return dis;
}

std::map<VertexId, std::int64_t> cc(const RawGraph& g) {
  const Views v = views(g);
  std::map<VertexId, VertexId> parent;
  for (const auto& [x, _] : v.both) parent[x] = x;
  auto find = [&](VertexId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [x, nbs] : v.both)
    for (VertexId y : nbs) {
      const VertexId rx = find(x), ry = find(y);
      // keep the smaller id as root so the root is the component label
      if (rx < ry) parent[ry] = rx;
      else if (ry < rx) parent[rx] = ry;
    }
  std::map<VertexId, std::int64_t> label;
  for (const auto& [x, _] : v.both) label[x] = static_cast<std::int64_t>(find(x));
  return label;
}

std::map<VertexId, double> pagerank(const RawGraph& g, double damping, std::uint32_t iterations) {
  return rank_sweeps(g, std::nullopt, damping, iterations);
}

std::map<VertexId, double> ppr(const RawGraph& g, VertexId source, double damping, std::uint32_t iterations) {
  return rank_sweeps(g, source, damping, iterations);
}

std::map<VertexId, std::int64_t> coreness(const RawGraph& g) {
  Adj adj = views(g).both;
  std::set<std::pair<std::size_t, VertexId>> queue;
  std::map<VertexId, std::size_t> deg;
  for (const auto& [x, nbs] : adj) {
    deg[x] = nbs.size();
    queue.insert({nbs.size(), x});
  }
  std::map<VertexId, std::int64_t> core;
  std::size_t level = 0;
  while (!queue.empty()) {
    const auto [d, x] = *queue.begin();
    queue.erase(queue.begin());
    level = std::max(level, d);
    core[x] = static_cast<std::int64_t>(level);
    for (VertexId y : adj[x]) {
      if (core.count(y)) continue;
      queue.erase({deg[y], y});
      --deg[y];
      queue.insert({deg[y], y});
    }
  }
  return core;
}

std::map<VertexId, std::int64_t> greedy_color(const RawGraph& g) {
  const Adj adj = views(g).both;
  std::vector<VertexId> order;
  for (const auto& [x, _] : adj) order.push_back(x);
  std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) { return higher(adj, a, b); });
  std::map<VertexId, std::int64_t> color;
  for (VertexId x : order) {
    std::set<std::int64_t> taken;
    for (VertexId y : adj.at(x))
      if (auto it = color.find(y); it != color.end()) taken.insert(it->second);
    std::int64_t c = 0;
    while (taken.count(c)) ++c;
    color[x] = c;
  }
  return color;
}

std::map<VertexId, std::int64_t> triangles(const RawGraph& g) {
  const Adj adj = views(g).both;
  std::map<VertexId, std::int64_t> count;
  for (const auto& [x, _] : adj) count[x] = 0;
  for (const auto& [u, nu] : adj)
    for (VertexId v : nu) {
      if (v <= u) continue;
      const auto& nv = adj.at(v);
      std::vector<VertexId> common;
      std::set_intersection(nu.upper_bound(v), nu.end(), nv.upper_bound(v), nv.end(), std::back_inserter(common));
      for (VertexId w : common) {
        VertexId low = u;
        if (higher(adj, low, v)) low = v;
        if (higher(adj, low, w)) low = w;
        ++count[low];
      }
    }
  return count;
}

std::int64_t triangle_count(const RawGraph& g) {
  const auto per = triangles(g);
  return std::accumulate(per.begin(), per.end(), std::int64_t{0},
                         [](std::int64_t s, const auto& kv) { return s + kv.second; });
}

std::int64_t triangle_count_brute(const RawGraph& g) {
  const Adj adj = views(g).both;
  std::vector<VertexId> ids;
  for (const auto& [x, _] : adj) ids.push_back(x);
  auto linked = [&](VertexId a, VertexId b) { return adj.at(a).count(b) > 0; };
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (!linked(ids[i], ids[j])) continue;
      for (std::size_t k = j + 1; k < ids.size(); ++k)
        if (linked(ids[i], ids[k]) && linked(ids[j], ids[k])) ++total;
    }
  return total;
}

std::optional<std::string> validate_mis(const RawGraph& g, const std::map<VertexId, bool>& in_set) {
  const Adj adj = views(g).both;
  for (const auto& [x, nbs] : adj) {
    auto it = in_set.find(x);
    if (it == in_set.end()) return "vertex " + std::to_string(x) + " has no state";
    bool covered = it->second;
    for (VertexId y : nbs) {
      const bool y_in = in_set.count(y) && in_set.at(y);
      if (it->second && y_in) return "edge " + std::to_string(x) + "-" + std::to_string(y) + " has both ends in the set";
      covered = covered || y_in;
    }
    if (!covered) return "vertex " + std::to_string(x) + " could join the set";
  }
  return std::nullopt;
}

std::optional<std::string> validate_mm(const RawGraph& g, const std::map<VertexId, std::int64_t>& partner) {
  const Adj adj = views(g).both;
  auto partner_of = [&](VertexId x) -> std::optional<std::int64_t> {
    auto it = partner.find(x);
    if (it == partner.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& [x, nbs] : adj) {
    const auto p = partner_of(x);
    if (!p) return "vertex " + std::to_string(x) + " has no partner entry";
    if (*p == -1) {
      for (VertexId y : nbs)
        if (partner_of(y) == -1)
          return "edge " + std::to_string(x) + "-" + std::to_string(y) + " joins two unmatched vertices";
      continue;
    }
    const auto y = static_cast<VertexId>(*p);
    if (*p < 0 || !nbs.count(y)) return "vertex " + std::to_string(x) + " is matched to non-neighbor " + std::to_string(*p);
    if (partner_of(y) != static_cast<std::int64_t>(x))
      return "vertex " + std::to_string(x) + " is matched to " + std::to_string(y) + " but not the other way round";
  }
  return std::nullopt;
}

const std::vector<std::string>& oracle_names() {
  static const std::vector<std::string> names{"bfs", "cc", "pr", "ppr", "core", "color", "tc"};
  return names;
}

OracleResult run(std::string_view name, const RawGraph& g, const OracleParams& params) {
  OracleResult r;
  auto copy = [&](const auto& m) {
    for (const auto& [x, v] : m) r.values[x] = v;
  };
  auto rooted = [&]() {
    if (!params.source) throw ParameterError(std::string(name) + " needs a source vertex");
    return *params.source;
  };
  if (name == "bfs") {
    copy(bfs(g, rooted()));
  } else if (name == "cc") {
    copy(cc(g));
  } else if (name == "pr") {
    copy(pagerank(g, params.damping, params.iterations));
  } else if (name == "ppr") {
    copy(ppr(g, rooted(), params.damping, params.iterations));
  } else if (name == "core") {
    copy(coreness(g));
  } else if (name == "color") {
    copy(greedy_color(g));
  } else if (name == "tc") {
    const auto per = triangles(g);
    copy(per);
    r.total = triangle_count(g);
  } else {
    throw ParameterError("no oracle named '" + std::string(name) + "'");
  }
  return r;
}

}  // namespace nbx::oracle
