#include "nbx/engine.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace nbx {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct WorkerRuntime {
  const Partition* part = nullptr;
  IndexStore* store = nullptr;
  std::vector<VertexValue> values;
  std::vector<std::vector<VertexId>> aux;
};

std::string_view to_string(ActivationMode m) noexcept {
  switch (m) {
    case ActivationMode::Initial:
      return "initial";
    case ActivationMode::Neighbor:
      return "neighbor";
    case ActivationMode::All:
      return "all";
    case ActivationMode::None:
      return "none";
  }
  return "?";
}

std::string_view to_string(ActivationPolicy p) noexcept {
  switch (p) {
    case ActivationPolicy::Auto:
      return "auto";
    case ActivationPolicy::Neighbor:
      return "neighbor";
    case ActivationPolicy::All:
      return "all";
  }
  return "?";
}

std::string_view to_string(SyncPolicy p) noexcept { return p == SyncPolicy::Critical ? "critical" : "full"; }

VertexId NeighborRef::id() const { return rt_->part->local_ids[slot_]; }
const VertexValue& NeighborRef::value() const { return rt_->values[slot_]; }
std::span<const VertexId> NeighborRef::aux() const { return rt_->aux[slot_]; }

VertexContext::VertexContext(const WorkerRuntime* rt, Slot host, std::span<const Slot> neighbors,
                             std::uint32_t superstep, std::uint64_t seed, std::uint64_t num_vertices,
                             const AttributeSchema* schema)
    : rt_(rt), host_(host), neighbors_(neighbors), superstep_(superstep), seed_(seed), n_(num_vertices),
      schema_(schema) {}

VertexId VertexContext::id() const { return rt_->part->local_ids[host_]; }
const VertexValue& VertexContext::value() const { return rt_->values[host_]; }
Degrees VertexContext::degree() const { return rt_->part->host_degrees[host_]; }
std::span<const VertexId> VertexContext::aux() const { return rt_->aux[host_]; }

std::mt19937_64 keyed_rng(std::uint64_t seed, VertexId v, std::uint32_t superstep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32), superstep};
  return std::mt19937_64(seq);
}

std::mt19937_64 VertexContext::rng() const { return keyed_rng(seed_, id(), superstep_); }

void VertexContext::publish_aux(std::vector<VertexId> items) { published_ = std::move(items); }

IterationPlan IterationPlan::until_quiescent(std::string name, NeighborhoodExpression ne, std::vector<AttrPos> critical,
                                             AccessMode access) {
  return {std::move(name), std::nullopt, std::move(critical), access, std::move(ne)};
}

IterationPlan IterationPlan::fixed(std::string name, std::uint32_t iterations, NeighborhoodExpression ne,
                                   std::vector<AttrPos> critical, AccessMode access) {
  return {std::move(name), iterations, std::move(critical), access, std::move(ne)};
}

std::uint64_t default_theta(std::uint64_t n) noexcept { return n / 50; }

const VertexValue& RunResult::value_of(VertexId v) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), v);
  if (it == ids.end() || *it != v) throw LookupError("no result for vertex " + std::to_string(v));
  return values[static_cast<std::size_t>(it - ids.begin())];
}

std::size_t RunResult::supersteps_in_plan(std::size_t plan) const {
  return static_cast<std::size_t>(
      std::count_if(supersteps.begin(), supersteps.end(), [&](const SuperstepStats& s) { return s.plan == plan; }));
}

std::size_t count_guest_violations(const BarrierSnapshot& snap) {
  std::size_t bad = 0;
  for (const WorkerView& wv : snap.workers) {
    const Partition& p = *wv.partition;
    for (Slot g = static_cast<Slot>(p.num_hosts); g < p.num_local(); ++g) {
      const WorkerView& home = snap.workers[p.guest_owner[g - p.num_hosts]];
      const Slot h = home.partition->slot_of(p.local_ids[g]);
      if (!value_equal(wv.values[g], home.values[h], snap.critical) || wv.aux[g] != home.aux[h]) ++bad;
    }
  }
  return bad;
}

ActivationMode choose_activation(ActivationPolicy policy, std::uint64_t n_change_total, std::uint64_t theta) noexcept {
  if (n_change_total == 0) return ActivationMode::None;
  switch (policy) {
    case ActivationPolicy::Neighbor:
      return ActivationMode::Neighbor;
    case ActivationPolicy::All:
      return ActivationMode::All;
    case ActivationPolicy::Auto:
      return n_change_total < theta ? ActivationMode::Neighbor : ActivationMode::All;
  }
  return ActivationMode::All;
}

std::vector<Slot> activation_phase(const Partition& p, IndexStore& store, std::span<const Slot> changed_hosts,
                                   std::span<const Slot> updated_guests, std::uint64_t n_change_total,
                                   std::uint64_t theta, ActivationPolicy policy, ActivationMode* used) {
  const ActivationMode mode = choose_activation(policy, n_change_total, theta);
  if (used) *used = mode;
  std::vector<Slot> next;
  if (mode == ActivationMode::None) return next;
  if (mode == ActivationMode::All) {
    next.resize(p.num_hosts);
    std::iota(next.begin(), next.end(), Slot{0});
    return next;
  }
  next.assign(changed_hosts.begin(), changed_hosts.end());
  auto notify = [&](Slot x) {
    auto inv = store.read_inverse(p.local_ids[x]);
    next.insert(next.end(), inv.begin(), inv.end());
  };
  for (Slot x : changed_hosts) notify(x);
  for (Slot x : updated_guests) notify(x);
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return next;
}

namespace {

struct RunShared {
  const Program* program = nullptr;
  const EngineConfig* cfg = nullptr;
  std::uint64_t theta = 0;
  std::uint64_t n = 0;
  Transport* transport = nullptr;
  std::vector<WorkerRuntime> rts;
  std::vector<WorkerView> views;

  std::unique_ptr<CyclicBarrier> observer_barrier;
  std::uint32_t obs_superstep = 0;
  std::vector<AttrPos> obs_critical;

  std::vector<std::vector<std::uint64_t>> local_active;
  std::vector<SuperstepStats> stats;
  std::uint64_t start_bytes = 0;

  std::mutex err_mu;
  std::exception_ptr error;
  bool error_is_abort = false;

  void fail(std::exception_ptr e) {
    bool is_abort = false;
    try {
      std::rethrow_exception(e);
    } catch (const Aborted&) {
      is_abort = true;
    } catch (...) {
    }
    {
      std::lock_guard lock(err_mu);
      if (!error || (error_is_abort && !is_abort)) {
        error = e;
        error_is_abort = is_abort;
      }
    }
    transport->abort();
    if (observer_barrier) observer_barrier->abort();
  }
};

std::vector<AttrPos> resolve_critical(const IterationPlan& plan, const AttributeSchema& schema, SyncPolicy sync) {
  if (sync == SyncPolicy::Full || plan.critical.empty()) return schema.all_positions();
  std::vector<AttrPos> c = plan.critical;
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

class WorkerLoop {
 public:
  WorkerLoop(RunShared& sh, WorkerId w)
      : sh_(sh), w_(w), rt_(sh.rts[w]), p_(*rt_.part), store_(*rt_.store), schema_(sh.program->schema) {}

  void run() {
    std::size_t plan_index = 0;
    for (const ProgramStep& step : sh_.program->steps) {
      if (const auto* plan = std::get_if<IterationPlan>(&step)) {
        run_plan(*plan, plan_index++);
        continue;
      }
      const auto& loop = std::get<RepeatUntilStable>(step);
      std::uint64_t changes = 0;
      do {
        changes = 0;
        for (const IterationPlan& plan : loop.body) changes += run_plan(plan, plan_index++);
      } while (changes > 0);
    }
  }

 private:
  std::span<const Slot> gather_neighbors(Slot h, AccessMode access) {
    auto stored = store_.read_neighbors(p_.local_ids[h], access);
    if (!p_.directed || access != AccessMode::All) return stored;
    scratch_.assign(stored.begin(), stored.end());
    std::sort(scratch_.begin(), scratch_.end(),
              [&](Slot a, Slot b) { return p_.local_ids[a] < p_.local_ids[b]; });
    scratch_.erase(std::unique(scratch_.begin(), scratch_.end()), scratch_.end());
    return scratch_;
  }

  Slot guest_slot(VertexId v) const {
    const Slot g = p_.slot_of(v);
    if (p_.is_host(g))
      throw ConsistencyError("worker " + std::to_string(w_) + " received an update for its own host " +
                             std::to_string(v));
    return g;
  }

  std::uint64_t run_plan(const IterationPlan& plan, std::size_t plan_index) {
    const EngineConfig& cfg = *sh_.cfg;
    const std::vector<AttrPos> critical = resolve_critical(plan, schema_, cfg.sync);

    std::vector<Slot> active(p_.num_hosts);
    std::iota(active.begin(), active.end(), Slot{0});
    ActivationMode mode = ActivationMode::Initial;
    std::uint64_t total_changes = 0;

    for (std::uint32_t ps = 1;; ++ps) {
      ++superstep_;
      if (cfg.max_supersteps && superstep_ > *cfg.max_supersteps)
        throw SuperstepLimit("exceeded the limit of " + std::to_string(*cfg.max_supersteps) + " supersteps in plan '" +
                             plan.name + "'");
      const auto t0 = Clock::now();
      store_.set_superstep(superstep_);

      // compute: writes are deferred so every read sees the previous superstep
      std::vector<std::pair<Slot, VertexValue>> pending;
      std::vector<Slot> changed;
      std::vector<std::pair<Slot, std::vector<VertexId>>> aux_out;
      for (Slot h : active) {
        const VertexId id = p_.local_ids[h];
        VertexContext ctx(&rt_, h, gather_neighbors(h, plan.access), superstep_, cfg.seed, sh_.n, &schema_);
        std::optional<VertexValue> out;
        try {
          out = plan.ne(ctx);
        } catch (const RunError&) {
          throw;
        } catch (const std::exception& e) {
          throw RunError(id, superstep_, std::string("neighborhood expression failed: ") + e.what());
        }
        if (auto items = ctx.take_published_aux()) aux_out.emplace_back(h, std::move(*items));
        if (!out) continue;
        if (!out->conforms_to(schema_))
          throw RunError(id, superstep_, "neighborhood expression returned a value that does not match the schema");
        if (*out == rt_.values[h]) continue;
        if (!value_equal(*out, rt_.values[h], critical)) changed.push_back(h);
        pending.emplace_back(h, std::move(*out));
      }
      for (auto& [h, v] : pending) rt_.values[h] = std::move(v);
      for (auto& [h, items] : aux_out) rt_.aux[h] = std::move(items);

      // sync
      for (Slot h : changed)
        for (WorkerId dst : p_.guest_directory[h])
          sh_.transport->send_sync(w_, make_sync(dst, p_.local_ids[h], rt_.values[h], critical));
      for (const auto& entry : aux_out) {
        const Slot h = entry.first;
        for (WorkerId dst : p_.guest_directory[h])
          sh_.transport->send_aux(w_, AuxMessage{dst, p_.local_ids[h], rt_.aux[h]});
      }

      const ControlMessage report{ControlMessage::Kind::BarrierReport, superstep_, changed.size(),
                                  !changed.empty() || !aux_out.empty()};
      const BarrierResult result = sh_.transport->barrier(w_, report);

      std::vector<Slot> updated_guests;
      for (const Envelope& env : sh_.transport->take_inbox(w_)) {
        if (env.channel == Channel::Sync) {
          const SyncMessage m = decode_sync(env.bytes, schema_, w_);
          const Slot g = guest_slot(m.vertex);
          apply_sync(m, rt_.values[g]);
          updated_guests.push_back(g);
        } else {
          AuxMessage m = decode_aux(env.bytes, w_);
          rt_.aux[guest_slot(m.vertex)] = std::move(m.items);
        }
      }

      if (sh_.observer_barrier) {
        if (w_ == 0) {
          sh_.obs_superstep = superstep_;
          sh_.obs_critical = critical;
        }
        sh_.observer_barrier->arrive_and_wait();
      }

      const std::uint64_t n_change = result.n_change_total;
      total_changes += n_change;
      sh_.local_active[w_].push_back(active.size());
      if (w_ == 0) {
        SuperstepStats s;
        s.superstep = superstep_;
        s.plan = plan_index;
        s.plan_name = plan.name;
        s.plan_superstep = ps;
        s.n_change = n_change;
        s.activation_mode_used = mode;
        s.bytes_data_delta = result.stats.bytes_data - last_bytes_;
        s.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
        last_bytes_ = result.stats.bytes_data;
        sh_.stats.push_back(std::move(s));
      }

      const bool done = plan.iterations ? ps >= *plan.iterations : n_change == 0;
      if (done) break;
      active = activation_phase(p_, store_, changed, updated_guests, n_change, sh_.theta, cfg.activation, &mode);
    }
    return total_changes;
  }

  RunShared& sh_;
  const WorkerId w_;
  WorkerRuntime& rt_;
  const Partition& p_;
  IndexStore& store_;
  const AttributeSchema& schema_;
  std::vector<Slot> scratch_;
  std::uint32_t superstep_ = 0;
  std::uint64_t last_bytes_ = sh_.start_bytes;
};

void validate(const Program& program) {
  if (program.schema.empty()) throw SchemaError("program has an empty schema");
  auto check = [&](const IterationPlan& plan) {
    if (!plan.ne) throw ConfigError("plan '" + plan.name + "' has no neighborhood expression");
    if (plan.iterations && *plan.iterations == 0) throw ConfigError("plan '" + plan.name + "' has zero iterations");
    for (AttrPos p : plan.critical)
      if (!program.schema.valid_position(p))
        throw SchemaError("plan '" + plan.name + "' names invalid critical position " + std::to_string(p));
  };
  for (const auto& step : program.steps) {
    if (const auto* plan = std::get_if<IterationPlan>(&step)) {
      check(*plan);
    } else {
      const auto& loop = std::get<RepeatUntilStable>(step);
      if (loop.body.empty()) throw ConfigError("repeat block has an empty body");
      for (const auto& plan : loop.body) check(plan);
    }
  }
}

fs::path make_temp_dir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 16; ++attempt) {
    const std::uint64_t tag = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    fs::path dir = fs::temp_directory_path() / ("nbx-" + std::to_string(tag));
    if (fs::create_directory(dir)) return dir;
  }
  throw StorageError("could not create a temporary directory");
}

}  // namespace

Engine::Engine(const Graph& g, EngineConfig cfg, const WorkerAssigner& assign) : cfg_(std::move(cfg)) {
  if (cfg_.workers == 0) throw ConfigError("worker count must be at least 1");
  n_ = g.num_vertices();
  theta_ = cfg_.theta.value_or(default_theta(n_));
  partitions_ = build_partitions(g, cfg_.workers, assign);
  stores_.reserve(partitions_.size());
  if (cfg_.store == StoreMode::Disk) {
    fs::path dir = cfg_.work_dir;
    if (dir.empty()) {
      temp_dir_ = make_temp_dir();
      dir = temp_dir_;
    } else {
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw StorageError("cannot create '" + dir.string() + "': " + ec.message());
    }
    for (const Partition& p : partitions_)
      stores_.push_back(IndexStore::create(p, dir / ("worker-" + std::to_string(p.worker) + ".seg")));
  } else {
    for (const Partition& p : partitions_) stores_.push_back(IndexStore::in_memory(p));
  }
  for (auto& s : stores_) s.set_audit(cfg_.audit);
}

Engine::~Engine() {
  stores_.clear();
  if (!temp_dir_.empty()) {
    std::error_code ec;
    fs::remove_all(temp_dir_, ec);
  }
}

RunResult Engine::run(const Program& program) {
  InProcessTransport transport(cfg_.workers, cfg_.barrier_timeout, cfg_.shuffle_seed);
  return run(program, transport);
}

RunResult Engine::run(const Program& program, Transport& transport) {
  validate(program);
  if (transport.num_workers() != cfg_.workers)
    throw ConfigError("transport serves " + std::to_string(transport.num_workers()) + " workers, engine has " +
                      std::to_string(cfg_.workers));

  RunResult result;
  result.theta = theta_;
  if (n_ == 0) return result;

  std::vector<IndexStore::RunLock> locks;
  for (auto& s : stores_) {
    locks.push_back(s.lock_for_run());
    s.clear_access_log();
  }

  const std::size_t k = cfg_.workers;
  const CommStats start = transport.comm_stats();
  RunShared sh;
  sh.program = &program;
  sh.cfg = &cfg_;
  sh.theta = theta_;
  sh.n = n_;
  sh.transport = &transport;
  sh.start_bytes = start.bytes_data;
  sh.local_active.resize(k);
  sh.rts.resize(k);
  const VertexValue initial(program.schema);
  for (std::size_t w = 0; w < k; ++w) {
    auto& rt = sh.rts[w];
    rt.part = &partitions_[w];
    rt.store = &stores_[w];
    rt.values.assign(partitions_[w].num_local(), initial);
    rt.aux.assign(partitions_[w].num_local(), {});
  }
  for (const auto& rt : sh.rts) sh.views.push_back({rt.part, rt.values, rt.aux});
  if (observer_) {
    sh.observer_barrier = std::make_unique<CyclicBarrier>(k, cfg_.barrier_timeout, [&sh, this] {
      observer_(BarrierSnapshot{sh.obs_superstep, sh.obs_critical, sh.views});
    });
  }

  const auto t0 = Clock::now();
  {
    std::vector<std::jthread> threads;
    threads.reserve(k);
    for (std::size_t w = 0; w < k; ++w) {
      threads.emplace_back([&sh, w] {
        try {
          WorkerLoop(sh, static_cast<WorkerId>(w)).run();
        } catch (...) {
          sh.fail(std::current_exception());
        }
      });
    }
  }
  result.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0);
  if (sh.error) std::rethrow_exception(sh.error);

  for (std::size_t i = 0; i < sh.stats.size(); ++i)
    for (std::size_t w = 0; w < k; ++w) sh.stats[i].active_count += sh.local_active[w].at(i);
  result.supersteps = std::move(sh.stats);

  const CommStats end = transport.comm_stats();
  result.comm = {end.bytes_data - start.bytes_data, end.bytes_control - start.bytes_control,
                 end.messages - start.messages};

  std::vector<std::pair<VertexId, VertexValue>> all;
  all.reserve(n_);
  for (auto& rt : sh.rts)
    for (Slot h = 0; h < rt.part->num_hosts; ++h) all.emplace_back(rt.part->local_ids[h], std::move(rt.values[h]));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [id, v] : all) {
    result.ids.push_back(id);
    result.values.push_back(std::move(v));
  }
  return result;
}

}  // namespace nbx
