#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nbx/edge_store.hpp"
#include "nbx/error.hpp"
#include "nbx/graph_model.hpp"
#include "nbx/partitioner.hpp"
#include "nbx/transport.hpp"

namespace nbx {

enum class ActivationPolicy { Auto, Neighbor, All };
enum class SyncPolicy { Critical, Full };

/// How the active set of a superstep was produced. `Initial` is the all-hosts
/// activation at the start of a plan; `None` means the previous barrier saw no
/// change, so nothing was activated.
enum class ActivationMode : std::uint8_t { Initial, Neighbor, All, None };

std::string_view to_string(ActivationMode m) noexcept;
std::string_view to_string(ActivationPolicy p) noexcept;
std::string_view to_string(SyncPolicy p) noexcept;

/// The run exceeded EngineConfig::max_supersteps.
class SuperstepLimit : public Error {
 public:
  using Error::Error;
};

struct WorkerRuntime;

/// Deterministic generator for (seed, vertex, superstep).
std::mt19937_64 keyed_rng(std::uint64_t seed, VertexId v, std::uint32_t superstep);

/// Read-only view of one neighbor as seen by a neighborhood expression.
class NeighborRef {
 public:
  NeighborRef(const WorkerRuntime* rt, Slot slot) : rt_(rt), slot_(slot) {}
  VertexId id() const;
  const VertexValue& value() const;
  /// Auxiliary id list last published by this neighbor (empty if none).
  std::span<const VertexId> aux() const;

 private:
  const WorkerRuntime* rt_;
  Slot slot_;
};

class NeighborRange {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NeighborRef;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const WorkerRuntime* rt, const Slot* p) : rt_(rt), p_(p) {}
    NeighborRef operator*() const { return {rt_, *p_}; }
    iterator& operator++() {
      ++p_;
      return *this;
    }
    iterator operator++(int) {
      auto t = *this;
      ++p_;
      return t;
    }
    bool operator==(const iterator& o) const { return p_ == o.p_; }

   private:
    const WorkerRuntime* rt_ = nullptr;
    const Slot* p_ = nullptr;
  };

  NeighborRange(const WorkerRuntime* rt, std::span<const Slot> slots) : rt_(rt), slots_(slots) {}
  iterator begin() const { return {rt_, slots_.data()}; }
  iterator end() const { return {rt_, slots_.data() + slots_.size()}; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }

 private:
  const WorkerRuntime* rt_;
  std::span<const Slot> slots_;
};

/// Everything a neighborhood expression may look at: its own previous value,
/// its degrees, and its direct neighbors' previous values.
class VertexContext {
 public:
  VertexContext(const WorkerRuntime* rt, Slot host, std::span<const Slot> neighbors, std::uint32_t superstep,
                std::uint64_t seed, std::uint64_t num_vertices, const AttributeSchema* schema);

  VertexId id() const;
  const VertexValue& value() const;
  Degrees degree() const;
  std::uint64_t num_vertices() const noexcept { return n_; }
  std::uint32_t superstep() const noexcept { return superstep_; }
  const AttributeSchema& schema() const noexcept { return *schema_; }

  /// Neighbors under the plan's access mode, ascending by id, each at most once.
  NeighborRange neighbors() const { return {rt_, neighbors_}; }

  /// Generator keyed by (seed, vertex id, superstep); independent of worker count.
  std::mt19937_64 rng() const;

  std::span<const VertexId> aux() const;
  /// Replaces this vertex's auxiliary list; shipped to every guest copy at the barrier.
  void publish_aux(std::vector<VertexId> items);
  bool aux_published() const noexcept { return published_.has_value(); }
  std::optional<std::vector<VertexId>> take_published_aux() { return std::exchange(published_, std::nullopt); }

 private:
  const WorkerRuntime* rt_;
  Slot host_;
  std::span<const Slot> neighbors_;
  std::uint32_t superstep_;
  std::uint64_t seed_;
  std::uint64_t n_;
  const AttributeSchema* schema_;
  std::optional<std::vector<VertexId>> published_;
};

/// Returns the vertex's new value, or nullopt to abstain (no write). Every
/// worker calls the same object concurrently, so it must not mutate captured state.
using NeighborhoodExpression = std::function<std::optional<VertexValue>(VertexContext&)>;

struct IterationPlan {
  std::string name;
  /// nullopt runs until a barrier reports no change; otherwise exactly this many supersteps.
  std::optional<std::uint32_t> iterations;
  /// Attributes synchronized to guests and used for change detection; empty means all.
  std::vector<AttrPos> critical;
  AccessMode access = AccessMode::All;
  NeighborhoodExpression ne;

  static IterationPlan until_quiescent(std::string name, NeighborhoodExpression ne, std::vector<AttrPos> critical = {},
                                       AccessMode access = AccessMode::All);
  static IterationPlan fixed(std::string name, std::uint32_t iterations, NeighborhoodExpression ne,
                             std::vector<AttrPos> critical = {}, AccessMode access = AccessMode::All);
};

/// Runs `body` repeatedly until one full pass reports no change at any barrier.
struct RepeatUntilStable {
  std::vector<IterationPlan> body;
};

using ProgramStep = std::variant<IterationPlan, RepeatUntilStable>;

struct Program {
  AttributeSchema schema;
  std::vector<ProgramStep> steps;
};

struct EngineConfig {
  std::size_t workers = 1;
  /// Defaults to n/50.
  std::optional<std::uint64_t> theta;
  ActivationPolicy activation = ActivationPolicy::Auto;
  SyncPolicy sync = SyncPolicy::Critical;
  StoreMode store = StoreMode::Memory;
  std::uint64_t seed = 0;
  std::optional<std::uint32_t> max_supersteps;
  bool audit = false;
  /// Directory for segment files in disk mode; a private temp dir when empty.
  std::filesystem::path work_dir;
  std::chrono::milliseconds barrier_timeout{60'000};
  /// Randomize cross-sender delivery order in the in-process transport.
  std::optional<std::uint64_t> shuffle_seed;
};

std::uint64_t default_theta(std::uint64_t n) noexcept;

struct SuperstepStats {
  std::uint32_t superstep = 0;
  std::size_t plan = 0;
  std::string plan_name;
  std::uint32_t plan_superstep = 0;
  std::uint64_t n_change = 0;
  std::uint64_t active_count = 0;
  ActivationMode activation_mode_used = ActivationMode::Initial;
  std::uint64_t bytes_data_delta = 0;
  std::chrono::nanoseconds wall_time{0};
};

struct RunResult {
  std::vector<VertexId> ids;
  std::vector<VertexValue> values;
  std::vector<SuperstepStats> supersteps;
  CommStats comm;
  std::uint64_t theta = 0;
  std::chrono::nanoseconds wall_time{0};

  const VertexValue& value_of(VertexId v) const;
  /// Supersteps executed by the plan with the given index in execution order.
  std::size_t supersteps_in_plan(std::size_t plan) const;
};

struct WorkerView {
  const Partition* partition;
  std::span<const VertexValue> values;
  std::span<const std::vector<VertexId>> aux;
};

struct BarrierSnapshot {
  std::uint32_t superstep;
  std::span<const AttrPos> critical;
  std::span<const WorkerView> workers;
};

/// Called once per superstep after every worker has applied its guest
/// updates, while all workers are parked.
using BarrierObserver = std::function<void(const BarrierSnapshot&)>;

/// Guests whose critical attributes or aux list differ from their host.
std::size_t count_guest_violations(const BarrierSnapshot& snap);

ActivationMode choose_activation(ActivationPolicy policy, std::uint64_t n_change_total, std::uint64_t theta) noexcept;

/// Next local active set (sorted host slots). In neighbor mode: changed hosts,
/// plus I(x) for every changed host and every guest updated at the barrier.
std::vector<Slot> activation_phase(const Partition& p, IndexStore& store, std::span<const Slot> changed_hosts,
                                   std::span<const Slot> updated_guests, std::uint64_t n_change_total,
                                   std::uint64_t theta, ActivationPolicy policy, ActivationMode* used = nullptr);

class Engine {
 public:
  Engine(const Graph& g, EngineConfig cfg, const WorkerAssigner& assign = assign_worker);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const noexcept { return cfg_; }
  std::uint64_t theta() const noexcept { return theta_; }
  std::uint64_t num_vertices() const noexcept { return n_; }
  std::span<const Partition> partitions() const noexcept { return partitions_; }
  IndexStore& store(WorkerId w) { return stores_.at(w); }

  void set_barrier_observer(BarrierObserver obs) { observer_ = std::move(obs); }

  RunResult run(const Program& program);
  RunResult run(const Program& program, Transport& transport);

 private:
  EngineConfig cfg_;
  std::uint64_t n_ = 0;
  std::uint64_t theta_ = 0;
  std::vector<Partition> partitions_;
  std::vector<IndexStore> stores_;
  std::filesystem::path temp_dir_;
  BarrierObserver observer_;
};

}  // namespace nbx
