#include "nbx/algorithms.hpp"

#include <algorithm>
#include <limits>

#include "nbx/error.hpp"

namespace nbx::algo {

namespace {

// Higher-priority test shared by coloring and triangle counting: larger
// degree wins, ties go to the larger id.
bool outranks(std::int64_t nb_deg, VertexId nb_id, std::int64_t deg, VertexId id) {
  return nb_deg > deg || (nb_deg == deg && nb_id > id);
}

std::optional<VertexValue> with(const VertexValue& base, AttrPos pos, AttrValue v) {
  VertexValue out = base;
  out.set(pos, v);
  return out;
}

}  // namespace

AlgorithmSpec bfs(VertexId source) {
  auto schema = AttributeSchema::make({{"dis", AttrKind::Int64}});
  const auto src = source;
  auto init = [src](VertexContext& v) {
    return with(v.value(), 1, v.id() == src ? std::int64_t{0} : kIntMax);
  };
  auto relax = [](VertexContext& v) -> std::optional<VertexValue> {
    std::int64_t dis = v.value().get_int(1);
    for (auto nb : v.neighbors()) dis = std::min(dis, nb.value().get_int(1) + 1);
    return with(v.value(), 1, dis);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init),
                     IterationPlan::until_quiescent("relax", relax, {}, AccessMode::In)}};
  return {"bfs", std::move(p), {1}, source};
}

AlgorithmSpec cc() {
  auto schema = AttributeSchema::make({{"label", AttrKind::Int64}});
  auto init = [](VertexContext& v) { return with(v.value(), 1, static_cast<std::int64_t>(v.id())); };
  auto propagate = [](VertexContext& v) -> std::optional<VertexValue> {
    std::int64_t label = v.value().get_int(1);
    for (auto nb : v.neighbors()) label = std::min(label, nb.value().get_int(1));
    return with(v.value(), 1, label);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init), IterationPlan::until_quiescent("propagate", propagate)}};
  return {"cc", std::move(p), {1}, std::nullopt};
}

namespace {

AlgorithmSpec rank_program(std::string name, std::optional<VertexId> source, double damping,
                           std::uint32_t iterations) {
  if (iterations == 0) throw ParameterError("iteration count must be at least 1");
  if (!(damping >= 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in [0, 1]");
  auto schema = AttributeSchema::make({{"rank", AttrKind::Float64}, {"outdeg", AttrKind::Int64}});
  const double a = damping;
  auto init = [source](VertexContext& v) -> std::optional<VertexValue> {
    VertexValue out = v.value();
    const double start = source ? (v.id() == *source ? 1.0 : 0.0) : 1.0 / static_cast<double>(v.num_vertices());
    out.set(1, start);
    out.set(2, static_cast<std::int64_t>(v.degree().out));
    return out;
  };
  auto sweep = [source, a](VertexContext& v) -> std::optional<VertexValue> {
    double flow = 0.0;
    for (auto nb : v.neighbors()) flow += nb.value().get_float(1) / static_cast<double>(nb.value().get_int(2));
    const double teleport =
        source ? (v.id() == *source ? 1.0 - a : 0.0) : (1.0 - a) / static_cast<double>(v.num_vertices());
    return with(v.value(), 1, teleport + a * flow);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init),
                     IterationPlan::fixed("sweep", iterations, sweep, {1}, AccessMode::In)}};
  return {std::move(name), std::move(p), {1}, source};
}

}  // namespace

AlgorithmSpec pagerank(double damping, std::uint32_t iterations) {
  return rank_program("pr", std::nullopt, damping, iterations);
}

AlgorithmSpec ppr(VertexId source, double damping, std::uint32_t iterations) {
  return rank_program("ppr", source, damping, iterations);
}

AlgorithmSpec kcore() {
  auto schema = AttributeSchema::make({{"core", AttrKind::Int64}});
  auto init = [](VertexContext& v) { return with(v.value(), 1, static_cast<std::int64_t>(v.degree().total)); };
  auto update = [](VertexContext& v) -> std::optional<VertexValue> {
    const std::int64_t core = v.value().get_int(1);
    if (core == 0) return std::nullopt;
    std::vector<std::int64_t> cnt(static_cast<std::size_t>(core) + 1, 0);
    for (auto nb : v.neighbors()) ++cnt[static_cast<std::size_t>(std::min(core, nb.value().get_int(1)))];
    // largest k <= core with at least k neighbors at estimate >= k
    std::int64_t at_least = 0;
    std::int64_t k = core;
    for (; k > 0; --k) {
      at_least += cnt[static_cast<std::size_t>(k)];
      if (at_least >= k) break;
    }
    return with(v.value(), 1, k);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init), IterationPlan::until_quiescent("hindex", update)}};
  return {"core", std::move(p), {1}, std::nullopt};
}

AlgorithmSpec coloring() {
  auto schema = AttributeSchema::make({{"deg", AttrKind::Int64}, {"color", AttrKind::Int64}});
  auto init = [](VertexContext& v) -> std::optional<VertexValue> {
    VertexValue out = v.value();
    out.set(1, static_cast<std::int64_t>(v.degree().total));
    out.set(2, std::int64_t{-1});
    return out;
  };
  auto pick = [](VertexContext& v) -> std::optional<VertexValue> {
    const std::int64_t deg = v.value().get_int(1);
    if (v.value().get_int(2) != -1) return std::nullopt;
    // a vertex never needs a color above its degree
    std::vector<bool> used(static_cast<std::size_t>(deg) + 1, false);
    for (auto nb : v.neighbors()) {
      if (!outranks(nb.value().get_int(1), nb.id(), deg, v.id())) continue;
      const std::int64_t c = nb.value().get_int(2);
      if (c == -1) return std::nullopt;
      if (c <= deg) used[static_cast<std::size_t>(c)] = true;
    }
    std::int64_t color = 0;
    while (used[static_cast<std::size_t>(color)]) ++color;
    return with(v.value(), 2, color);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init), IterationPlan::until_quiescent("color", pick, {2})}};
  return {"color", std::move(p), {2}, std::nullopt};
}

AlgorithmSpec mis(std::uint64_t seed) {
  auto schema = AttributeSchema::make({{"state", AttrKind::Int64}, {"r", AttrKind::Int64}});
  auto init = [](VertexContext& v) -> std::optional<VertexValue> {
    VertexValue out = v.value();
    out.set(1, kUndecided);
    out.set(2, std::int64_t{0});
    return out;
  };
  auto draw = [seed](VertexContext& v) -> std::optional<VertexValue> {
    if (v.value().get_int(1) != kUndecided) return std::nullopt;
    auto gen = keyed_rng(seed, v.id(), v.superstep());
    return with(v.value(), 2, static_cast<std::int64_t>(gen() >> 1));
  };
  auto select = [](VertexContext& v) -> std::optional<VertexValue> {
    if (v.value().get_int(1) != kUndecided) return std::nullopt;
    const auto mine = std::pair{v.value().get_int(2), v.id()};
    for (auto nb : v.neighbors()) {
      if (nb.value().get_int(1) != kUndecided) continue;
      if (std::pair{nb.value().get_int(2), nb.id()} > mine) return std::nullopt;
    }
    return with(v.value(), 1, kInSet);
  };
  auto exclude = [](VertexContext& v) -> std::optional<VertexValue> {
    if (v.value().get_int(1) != kUndecided) return std::nullopt;
    for (auto nb : v.neighbors())
      if (nb.value().get_int(1) == kInSet) return with(v.value(), 1, kExcluded);
    return std::nullopt;
  };
  Program p{schema,
            {IterationPlan::fixed("init", 1, init),
             RepeatUntilStable{{IterationPlan::fixed("draw", 1, draw, {2}), IterationPlan::fixed("select", 1, select, {1}),
                                IterationPlan::fixed("exclude", 1, exclude, {1})}}}};
  return {"mis", std::move(p), {1}, std::nullopt};
}

AlgorithmSpec mm(std::uint64_t /*seed*/) {
  auto schema = AttributeSchema::make(
      {{"partner", AttrKind::Int64}, {"proposal", AttrKind::Int64}, {"accepted", AttrKind::Int64}});
  auto init = [](VertexContext& v) -> std::optional<VertexValue> {
    VertexValue out = v.value();
    for (AttrPos p = 1; p <= 3; ++p) out.set(p, kNone);
    return out;
  };
  auto propose = [](VertexContext& v) -> std::optional<VertexValue> {
    std::int64_t target = kNone;
    if (v.value().get_int(1) == kNone) {
      for (auto nb : v.neighbors()) {
        if (nb.value().get_int(1) == kNone) {
          target = static_cast<std::int64_t>(nb.id());
          break;
        }
      }
    }
    return with(v.value(), 2, target);
  };
  auto accept = [](VertexContext& v) -> std::optional<VertexValue> {
    std::int64_t chosen = kNone;
    if (v.value().get_int(1) == kNone) {
      const auto me = static_cast<std::int64_t>(v.id());
      for (auto nb : v.neighbors()) {
        if (nb.value().get_int(2) == me) {
          chosen = static_cast<std::int64_t>(nb.id());
          break;
        }
      }
    }
    return with(v.value(), 3, chosen);
  };
  // Proposals go to the smallest free neighbor, so "my accepted proposer is the
  // one I proposed to" holds on both ends of the pair at once.
  auto decide = [](VertexContext& v) -> std::optional<VertexValue> {
    const VertexValue& cur = v.value();
    if (cur.get_int(1) != kNone || cur.get_int(2) == kNone || cur.get_int(3) != cur.get_int(2)) return std::nullopt;
    return with(cur, 1, cur.get_int(2));
  };
  Program p{schema,
            {IterationPlan::fixed("init", 1, init),
             RepeatUntilStable{{IterationPlan::fixed("propose", 1, propose, {2}),
                                IterationPlan::fixed("accept", 1, accept, {3}),
                                IterationPlan::fixed("decide", 1, decide, {1})}}}};
  return {"mm", std::move(p), {1}, std::nullopt};
}

AlgorithmSpec tc() {
  auto schema = AttributeSchema::make({{"deg", AttrKind::Int64}, {"tri", AttrKind::Int64}});
  auto init = [](VertexContext& v) -> std::optional<VertexValue> {
    VertexValue out = v.value();
    out.set(1, static_cast<std::int64_t>(v.degree().total));
    out.set(2, std::int64_t{0});
    return out;
  };
  auto gather = [](VertexContext& v) -> std::optional<VertexValue> {
    const std::int64_t deg = v.value().get_int(1);
    std::vector<VertexId> higher;
    for (auto nb : v.neighbors())
      if (outranks(nb.value().get_int(1), nb.id(), deg, v.id())) higher.push_back(nb.id());
    v.publish_aux(std::move(higher));
    return std::nullopt;
  };
  auto count = [](VertexContext& v) -> std::optional<VertexValue> {
    const auto mine = v.aux();
    std::int64_t triangles = 0;
    for (auto nb : v.neighbors()) {
      if (!std::binary_search(mine.begin(), mine.end(), nb.id())) continue;
      const auto theirs = nb.aux();
      auto a = mine.begin();
      auto b = theirs.begin();
      while (a != mine.end() && b != theirs.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++triangles;
          ++a;
          ++b;
        }
      }
    }
    return with(v.value(), 2, triangles);
  };
  Program p{schema, {IterationPlan::fixed("init", 1, init), IterationPlan::fixed("gather", 1, gather, {2}),
                     IterationPlan::fixed("count", 1, count, {2})}};
  return {"tc", std::move(p), {2}, std::nullopt};
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"bfs", "cc", "pr", "ppr", "core", "color", "mis", "mm", "tc"};
  return names;
}

AlgorithmSpec make_algorithm(std::string_view name, const AlgorithmParams& params, const Graph& g) {
  auto rooted = [&]() {
    if (!params.source) throw ParameterError(std::string(name) + " needs a source vertex");
    if (!g.contains(*params.source))
      throw ParameterError("source vertex " + std::to_string(*params.source) + " is not in the graph");
    return *params.source;
  };
  if (name == "bfs") return bfs(rooted());
  if (name == "cc") return cc();
  if (name == "pr") return pagerank(params.damping, params.iterations);
  if (name == "ppr") return ppr(rooted(), params.damping, params.iterations);
  if (name == "core") return kcore();
  if (name == "color") return coloring();
  if (name == "mis") return mis(params.seed);
  if (name == "mm") return mm(params.seed);
  if (name == "tc") return tc();
  throw ParameterError("unknown algorithm '" + std::string(name) + "'");
}

std::int64_t triangle_total(const RunResult& r) {
  std::int64_t total = 0;
  for (const auto& v : r.values) total += v.get_int(2);
  return total;
}

}  // namespace nbx::algo
