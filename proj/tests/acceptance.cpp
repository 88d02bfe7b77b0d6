// Acceptance suite. Prints one PASS/FAIL line per criterion; exits nonzero on any failure.
// Usage: acceptance [criterion-number ...]
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "nbx/edge_store.hpp"
#include "nbx/runner.hpp"
#include "support.hpp"

using namespace nbx;
using namespace nbx::testing;

namespace {

const std::vector<std::size_t> kWorkers{1, 2, 4, 8};
const std::vector<std::string> kExact{"bfs", "cc", "core", "color", "tc"};
const std::vector<std::string> kAll{"bfs", "cc", "pr", "ppr", "core", "color", "mis", "mm", "tc"};

const std::vector<CorpusGraph>& undirected_corpus() {
  static const auto c = corpus(false);
  return c;
}
const std::vector<CorpusGraph>& directed_corpus() {
  static const auto c = corpus(true);
  return c;
}
const CorpusGraph& corpus_graph(const std::string& algo, std::size_t i) {
  return wants_directed(algo) ? directed_corpus()[i] : undirected_corpus()[i];
}

std::string where(const std::string& algo, std::size_t graph, std::size_t k) {
  return algo + " on graph " + std::to_string(graph) + " (k=" + std::to_string(k) + ")";
}

bool same_values(const RunResult& a, const RunResult& b) { return a.ids == b.ids && a.values == b.values; }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Check = std::function<Outcome()>;

Outcome oracle_equivalence() {
  Outcome o;
  std::size_t runs = 0;
  for (const std::string algo : {"bfs", "cc", "pr", "ppr", "core", "color", "tc"}) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
      const auto& cg = corpus_graph(algo, i);
      const Graph g = to_graph(cg.raw);
      const auto spec = make(algo, g, cg.source);
      oracle::OracleParams op{cg.source, 0.85, 10};
      for (std::size_t k : kWorkers) {
        const auto r = run(g, spec, config(k));
        ++runs;
        if (auto diff = check_result(spec, r, cg.raw, op)) o.fail(where(algo, i, k) + ": " + *diff);
      }
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs match the reference (pr/ppr within 1e-9 relative)";
  return o;
}

Outcome randomized_validity() {
  Outcome o;
  std::size_t runs = 0;
  for (const std::string algo : {"mis", "mm"}) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
      const auto& cg = undirected_corpus()[i];
      const Graph g = to_graph(cg.raw);
      const auto spec = make(algo, g, cg.source, 7);
      std::optional<RunResult> first;
      for (std::size_t k : kWorkers) {
        const auto r = run(g, spec, config(k));
        ++runs;
        if (auto diff = check_result(spec, r, cg.raw, {})) o.fail(where(algo, i, k) + ": " + *diff);
        if (!first) first = r;
        else if (!same_values(*first, r)) o.fail(where(algo, i, k) + ": output differs from k=1");
      }
    }
  }
  if (o.pass) o.detail = std::to_string(runs) + " runs valid; outputs identical across k=1,2,4,8";
  return o;
}

// Auto mode must pick "all" exactly when the previous barrier of the same
// plan saw n_change >= theta (and n_change > 0).
std::optional<std::string> mode_log_defect(const RunResult& r) {
  for (std::size_t s = 1; s < r.supersteps.size(); ++s) {
    const auto& prev = r.supersteps[s - 1];
    const auto& cur = r.supersteps[s];
    if (cur.plan != prev.plan) continue;
    const bool want_all = prev.n_change > 0 && prev.n_change >= r.theta;
    const bool want_none = prev.n_change == 0;
    const auto used = cur.activation_mode_used;
    const bool ok = want_none ? used == ActivationMode::None
                              : (want_all ? used == ActivationMode::All : used == ActivationMode::Neighbor);
    if (!ok)
      return "superstep " + std::to_string(cur.superstep) + " used " + std::string(to_string(used)) +
             " after n_change=" + std::to_string(prev.n_change) + " with theta=" + std::to_string(r.theta);
  }
  return std::nullopt;
}

Outcome activation_equivalence() {
  Outcome o;
  std::size_t runs = 0, neighbor_steps = 0, all_steps = 0;
  const std::size_t k = 4;
  for (const auto& algo : kAll) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
      const auto& cg = corpus_graph(algo, i);
      const Graph g = to_graph(cg.raw);
      const auto spec = make(algo, g, cg.source);
      auto cfg = config(k);
      cfg.activation = ActivationPolicy::Auto;
      const auto autor = run(g, spec, cfg);
      cfg.activation = ActivationPolicy::Neighbor;
      const auto nb = run(g, spec, cfg);
      cfg.activation = ActivationPolicy::All;
      const auto all = run(g, spec, cfg);
      runs += 3;
      if (!same_values(autor, nb)) o.fail(where(algo, i, k) + ": auto and forced-neighbor disagree");
      if (!same_values(autor, all)) o.fail(where(algo, i, k) + ": auto and forced-all disagree");
      if (autor.theta != g.num_vertices() / 50) o.fail(where(algo, i, k) + ": theta is not n/50");
      if (auto d = mode_log_defect(autor)) o.fail(where(algo, i, k) + ": " + *d);
      for (const auto& s : autor.supersteps) {
        neighbor_steps += s.activation_mode_used == ActivationMode::Neighbor;
        all_steps += s.activation_mode_used == ActivationMode::All;
      }
    }
  }
  if (o.pass && (neighbor_steps == 0 || all_steps == 0)) o.fail("corpus never exercised both activation modes");
  if (o.pass)
    o.detail = std::to_string(runs) + " runs agree; auto log consistent (" + std::to_string(neighbor_steps) +
               " neighbor / " + std::to_string(all_steps) + " all supersteps)";
  return o;
}

Outcome host_guest_consistency() {
  Outcome o;
  std::size_t barriers = 0, violations = 0;
  for (const auto& algo : kAll) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
      const auto& cg = corpus_graph(algo, i);
      const Graph g = to_graph(cg.raw);
      const auto spec = make(algo, g, cg.source);
      for (std::size_t k : {2, 4}) {
        Engine engine(g, config(k));
        std::size_t local = 0;
        engine.set_barrier_observer([&](const BarrierSnapshot& snap) {
          ++barriers;
          local += count_guest_violations(snap);
        });
        const auto r = engine.run(spec.program);
        violations += local;
        if (local > 0) o.fail(where(algo, i, k) + ": " + std::to_string(local) + " stale guests");
        if (r.supersteps.empty()) o.fail(where(algo, i, k) + ": no supersteps observed");
      }
    }
  }
  if (o.pass) o.detail = std::to_string(barriers) + " barriers snapshotted, " + std::to_string(violations) + " violations";
  return o;
}

Outcome communication_accounting() {
  Outcome o;
  std::size_t single = 0, pairs = 0, saved_messages = 0;
  for (const auto& algo : kAll) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
      const auto& cg = corpus_graph(algo, i);
      const Graph g = to_graph(cg.raw);
      const auto r = run(g, make(algo, g, cg.source), config(1));
      ++single;
      if (r.comm.bytes_data != 0) o.fail(where(algo, i, 1) + ": bytes_data=" + std::to_string(r.comm.bytes_data));
    }
  }
  const std::size_t k = 4;
  for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; ++i) {
    const auto& cg = undirected_corpus()[i];
    const Graph g = to_graph(cg.raw);
    const auto spec = make("color", g, cg.source);
    auto cfg = config(k);
    cfg.sync = SyncPolicy::Critical;
    const auto crit = run(g, spec, cfg);
    const auto crit_again = run(g, spec, cfg);
    cfg.sync = SyncPolicy::Full;
    const auto full = run(g, spec, cfg);
    ++pairs;
    if (!same_values(crit, full)) o.fail(where("color", i, k) + ": full and critical sync disagree");
    if (crit.comm.bytes_data != crit_again.comm.bytes_data || crit.comm.messages != crit_again.comm.messages ||
        crit.comm.bytes_control != crit_again.comm.bytes_control)
      o.fail(where("color", i, k) + ": repeated run changed byte counts");

    bool cross = false;
    for (const auto& e : cg.raw.edges) cross = cross || assign_worker(e.src, k) != assign_worker(e.dst, k);
    if (cross && !(crit.comm.bytes_data < full.comm.bytes_data))
      o.fail(where("color", i, k) + ": critical sync not cheaper (" + std::to_string(crit.comm.bytes_data) + " vs " +
             std::to_string(full.comm.bytes_data) + ")");
    // Initialization ships both attributes either way; after that every
    // message carries one entry (18 bytes) instead of two (27 bytes).
    if (crit.supersteps.size() != full.supersteps.size()) {
      o.fail(where("color", i, k) + ": superstep counts differ");
      continue;
    }
    for (std::size_t s = 0; s < crit.supersteps.size(); ++s) {
      const auto& c = crit.supersteps[s];
      const auto& f = full.supersteps[s];
      if (c.plan == 0) {
        if (c.bytes_data_delta != f.bytes_data_delta) o.fail(where("color", i, k) + ": init traffic differs");
        continue;
      }
      if (c.bytes_data_delta % sync_encoded_size(1) != 0 || f.bytes_data_delta % sync_encoded_size(2) != 0 ||
          c.bytes_data_delta / 18 != f.bytes_data_delta / 27) {
        o.fail(where("color", i, k) + ": superstep " + std::to_string(c.superstep) + " is not 9 bytes per message (" +
               std::to_string(c.bytes_data_delta) + " vs " + std::to_string(f.bytes_data_delta) + ")");
        continue;
      }
      if (f.bytes_data_delta - c.bytes_data_delta != 9 * (c.bytes_data_delta / 18))
        o.fail(where("color", i, k) + ": saving is not 9 bytes per message");
      saved_messages += c.bytes_data_delta / 18;
    }
  }
  if (o.pass)
    o.detail = std::to_string(single) + " single-worker runs at 0 bytes; " + std::to_string(pairs) +
               " color pairs save 9 bytes on each of " + std::to_string(saved_messages) + " messages";
  return o;
}

std::map<VertexId, std::uint64_t> read_offset_table(const std::filesystem::path& seg) {
  std::ifstream in(offsets_path_for(seg), std::ios::binary);
  std::map<VertexId, std::uint64_t> out;
  unsigned char buf[16];
  while (in.read(reinterpret_cast<char*>(buf), 16)) {
    std::uint64_t id = 0, off = 0;
    for (int b = 7; b >= 0; --b) {
      id = (id << 8) | buf[b];
      off = (off << 8) | buf[8 + b];
    }
    out[id] = off;
  }
  return out;
}

Outcome semi_caching() {
  Outcome o;
  const auto base = std::filesystem::temp_directory_path() / ("nbx-accept-" + std::to_string(::getpid()));
  std::size_t runs = 0, reads = 0;
  const std::size_t k = 4;
  for (const auto& algo : kAll) {
    for (std::size_t i = 0; i < undirected_corpus().size() && o.pass; i += 1) {
      const auto& cg = corpus_graph(algo, i);
      const Graph g = to_graph(cg.raw);
      const auto spec = make(algo, g, cg.source);
      auto cfg = config(k);
      cfg.store = StoreMode::Memory;
      const auto mem = run(g, spec, cfg);

      cfg.store = StoreMode::Disk;
      cfg.audit = true;
      cfg.work_dir = base / (algo + "-" + std::to_string(i));
      Engine engine(g, cfg);
      const auto disk = engine.run(spec.program);
      runs += 2;
      if (!same_values(mem, disk)) o.fail(where(algo, i, k) + ": disk and memory results differ");
      if (mem.comm.bytes_data != disk.comm.bytes_data || mem.comm.messages != disk.comm.messages)
        o.fail(where(algo, i, k) + ": disk and memory byte counts differ");

      for (WorkerId w = 0; w < k; ++w) {
        const auto seg = cfg.work_dir / ("worker-" + std::to_string(w) + ".seg");
        const auto offsets = read_offset_table(seg);
        const auto decoded = read_segments(seg);
        std::map<VertexId, std::uint64_t> record_bytes;
        for (std::size_t s = 0; s < decoded.local_ids.size(); ++s) {
          std::uint64_t entries = decoded.index.inverse[s].size();
          if (s < decoded.num_hosts) {
            entries += decoded.index.out[s].size();
            if (decoded.directed) entries += decoded.index.in[s].size();
          }
          record_bytes[decoded.local_ids[s]] = kRecordHeaderBytes + 4 * entries;
        }
        auto& store = engine.store(w);
        if (store.mode() != StoreMode::Disk) o.fail(where(algo, i, k) + ": store not in disk mode");
        for (const auto& rec : store.access_log()) {
          ++reads;
          auto off = offsets.find(rec.vertex);
          if (off == offsets.end() || off->second != rec.offset || record_bytes.at(rec.vertex) != rec.bytes) {
            o.fail(where(algo, i, k) + ": read of vertex " + std::to_string(rec.vertex) +
                   " is not exactly its contiguous record");
            break;
          }
        }
        const std::size_t bound = store.offset_table_bytes() + store.max_record_bytes();
        if (store.peak_disk_resident_bytes() > bound)
          o.fail(where(algo, i, k) + ": resident index bytes " + std::to_string(store.peak_disk_resident_bytes()) +
                 " exceed offset table + one buffer (" + std::to_string(bound) + ")");
        if (store.offset_table_bytes() != 16 * offsets.size())
          o.fail(where(algo, i, k) + ": offset table size does not match the sidecar");
      }
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(base, ec);
  if (o.pass && reads == 0) o.fail("audit recorded no disk reads");
  if (o.pass)
    o.detail = std::to_string(runs) + " runs identical across tiers; " + std::to_string(reads) +
               " audited reads each one contiguous record";
  return o;
}

Outcome micro_example() {
  Outcome o;
  oracle::RawGraph raw{{1, 2, 3, 4, 5}, {{1, 2}, {1, 4}, {2, 3}, {2, 5}}, false};
  const Graph g = to_graph(raw);
  const auto parts = build_partitions(g, 3);
  // id mod 3: w1 = {v1, v4}, w2 = {v2, v5}, w3 = {v3}
  const Partition& w1 = parts[1];
  const Partition& w2 = parts[2];
  const Partition& w3 = parts[0];
  auto ids = [](const Partition& p, const std::vector<Slot>& slots) {
    std::vector<VertexId> out;
    for (Slot s : slots) out.push_back(p.local_ids[s]);
    return out;
  };
  auto expect = [&](const std::string& what, const std::vector<VertexId>& got, const std::vector<VertexId>& want) {
    if (got != want) {
      std::string s;
      for (auto v : got) s += " v" + std::to_string(v);
      o.fail(what + " was {" + s + " }");
    }
  };
  if (std::vector<VertexId>(w1.host_ids().begin(), w1.host_ids().end()) != std::vector<VertexId>{1, 4} ||
      std::vector<VertexId>(w2.host_ids().begin(), w2.host_ids().end()) != std::vector<VertexId>{2, 5} ||
      std::vector<VertexId>(w3.host_ids().begin(), w3.host_ids().end()) != std::vector<VertexId>{3})
    o.fail("host layout differs from the 3-worker example");
  expect("N(v2,w2)", ids(w2, w2.index.out[w2.slot_of(2)]), {1, 3, 5});
  expect("I(v2,w2)", ids(w2, w2.index.inverse[w2.slot_of(2)]), {5});
  expect("I(v2',w1)", ids(w1, w1.index.inverse[w1.slot_of(2)]), {1});
  expect("I(v2',w3)", ids(w3, w3.index.inverse[w3.slot_of(2)]), {3});
  if (w1.is_host(w1.slot_of(2)) || w3.is_host(w3.slot_of(2))) o.fail("v2 should be a guest on w1 and w3");

  // Same answers through the on-disk segments.
  const auto dir = std::filesystem::temp_directory_path() / ("nbx-micro-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto disk_w2 = IndexStore::create(w2, dir / "w2.seg");
  auto disk_w1 = IndexStore::create(w1, dir / "w1.seg");
  auto disk_w3 = IndexStore::create(w3, dir / "w3.seg");
  auto as_vec = [](std::span<const Slot> s) { return std::vector<Slot>(s.begin(), s.end()); };
  expect("disk N(v2,w2)", ids(w2, as_vec(disk_w2.read_neighbors(2, AccessMode::All))), {1, 3, 5});
  expect("disk I(v2,w2)", ids(w2, as_vec(disk_w2.read_inverse(2))), {5});
  expect("disk I(v2',w1)", ids(w1, as_vec(disk_w1.read_inverse(2))), {1});
  expect("disk I(v2',w3)", ids(w3, as_vec(disk_w3.read_inverse(2))), {3});
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (o.pass) o.detail = "N(v2,w2)={v1',v3',v5}, I(v2,w2)={v5}, I(v2',w1)={v1}, I(v2',w3)={v3} in memory and on disk";
  return o;
}

Outcome superstep_counts() {
  Outcome o;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < directed_corpus().size() && o.pass; ++i) {
    const auto& cg = directed_corpus()[i];
    const Graph g = to_graph(cg.raw);
    std::int64_t ecc = 0;
    for (const auto& [v, d] : oracle::bfs(cg.raw, cg.source))
      if (d != kIntMax) ecc = std::max(ecc, d);
    const auto bfs = make("bfs", g, cg.source);
    const auto pr = make("pr", g, cg.source);
    for (std::size_t k : kWorkers) {
      const auto rb = run(g, bfs, config(k));
      if (rb.supersteps_in_plan(1) != static_cast<std::size_t>(ecc) + 1)
        o.fail(where("bfs", i, k) + ": " + std::to_string(rb.supersteps_in_plan(1)) + " main supersteps, eccentricity " +
               std::to_string(ecc));
      const auto rp = run(g, pr, config(k));
      if (rp.supersteps_in_plan(1) != 10)
        o.fail(where("pr", i, k) + ": " + std::to_string(rp.supersteps_in_plan(1)) + " main supersteps");
      checked += 2;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " runs: bfs = eccentricity + 1 main supersteps, pr = 10";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  Check check;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "randomized-algorithm validity", randomized_validity},
      {3, "activation-policy equivalence", activation_equivalence},
      {4, "host-guest consistency", host_guest_consistency},
      {5, "communication accounting", communication_accounting},
      {6, "semi-caching", semi_caching},
      {7, "micro-example indexes", micro_example},
      {8, "superstep counts", superstep_counts},
  };
  std::set<int> wanted;
  for (int a = 1; a < argc; ++a) wanted.insert(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
