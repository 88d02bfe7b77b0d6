#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "nbx/graph_model.hpp"

namespace nbx {

using Bytes = std::vector<std::byte>;

/// Host-to-guest update. Wire form: vertex u64 | count u8 | count x (position
/// u8 | value 8 bytes), little-endian; bools occupy 8 bytes. `target` is
/// routing metadata and is not part of the encoded bytes.
struct SyncMessage {
  WorkerId target = 0;
  VertexId vertex = 0;
  std::vector<std::pair<std::uint8_t, AttrValue>> payload;

  bool operator==(const SyncMessage& o) const;
};

inline constexpr std::size_t kSyncHeaderBytes = 9;
inline constexpr std::size_t kSyncEntryBytes = 9;

constexpr std::size_t sync_encoded_size(std::size_t entries) noexcept {
  return kSyncHeaderBytes + kSyncEntryBytes * entries;
}

/// Builds a message carrying `positions` of `value`; positions must be strictly ascending.
SyncMessage make_sync(WorkerId target, VertexId vertex, const VertexValue& value, std::span<const AttrPos> positions);
Bytes encode(const SyncMessage& m);
/// Kinds are recovered from `schema`. Throws SchemaError on malformed input.
SyncMessage decode_sync(std::span<const std::byte> bytes, const AttributeSchema& schema, WorkerId target);
void apply_sync(const SyncMessage& m, VertexValue& guest);

/// Auxiliary per-vertex id list. Wire form: vertex u64 | count u32 | count x id u64.
struct AuxMessage {
  WorkerId target = 0;
  VertexId vertex = 0;
  std::vector<VertexId> items;

  bool operator==(const AuxMessage&) const = default;
};

Bytes encode(const AuxMessage& m);
AuxMessage decode_aux(std::span<const std::byte> bytes, WorkerId target);

/// Wire form: kind u8 | superstep u32 | n_change u64 | activated u8 (14 bytes).
struct ControlMessage {
  enum class Kind : std::uint8_t { BarrierReport = 0, BarrierRelease = 1 };
  Kind kind = Kind::BarrierReport;
  std::uint32_t superstep = 0;
  std::uint64_t n_change_local = 0;
  bool activated_any = false;

  bool operator==(const ControlMessage&) const = default;
};

inline constexpr std::size_t kControlBytes = 14;
Bytes encode(const ControlMessage& m);
ControlMessage decode_control(std::span<const std::byte> bytes);

struct CommStats {
  /// Encoded bytes of data messages that crossed a worker boundary.
  std::uint64_t bytes_data = 0;
  std::uint64_t bytes_control = 0;
  std::uint64_t messages = 0;

  bool operator==(const CommStats&) const = default;
};

struct BarrierResult {
  std::uint64_t n_change_total = 0;
  bool any_active = false;
  /// Counters as of the moment every worker had arrived.
  CommStats stats;

  bool operator==(const BarrierResult&) const = default;
};

enum class Channel : std::uint8_t { Sync = 0, Aux = 1 };

struct Envelope {
  WorkerId from = 0;
  Channel channel = Channel::Sync;
  Bytes bytes;
};

/// Worker-to-worker messaging. Messages posted during superstep i become
/// visible to take_inbox() after the barrier closing superstep i.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual std::size_t num_workers() const noexcept = 0;
  /// Throws RoutingError for an unknown worker.
  virtual void post(WorkerId from, WorkerId to, Channel channel, Bytes bytes) = 0;
  /// Blocks until every worker has reported for this superstep.
  virtual BarrierResult barrier(WorkerId self, const ControlMessage& report) = 0;
  virtual std::vector<Envelope> take_inbox(WorkerId self) = 0;
  virtual CommStats comm_stats() const = 0;
  /// Wakes every blocked worker with Aborted.
  virtual void abort() noexcept = 0;

  void send_sync(WorkerId from, const SyncMessage& m) { post(from, m.target, Channel::Sync, encode(m)); }
  void send_aux(WorkerId from, const AuxMessage& m) { post(from, m.target, Channel::Aux, encode(m)); }
};

/// Reusable k-party barrier with a timeout and an abort switch. The completion
/// step runs once per round on the last arriving thread, before anyone is released.
class CyclicBarrier {
 public:
  CyclicBarrier(std::size_t parties, std::chrono::milliseconds timeout, std::function<void()> on_complete = {});

  /// Throws BarrierTimeout if the round does not complete in time, Aborted if
  /// abort() was called. Either way the barrier is left aborted.
  void arrive_and_wait();
  void abort() noexcept;
  bool aborted() const;

 private:
  const std::size_t parties_;
  const std::chrono::milliseconds timeout_;
  std::function<void()> on_complete_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::size_t arrived_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
};

/// In-process transport: per-(sender, receiver) outboxes swapped into
/// per-receiver inboxes at each barrier. With a shuffle seed, cross-sender
/// arrival order is randomized while each sender's own order is kept.
class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(std::size_t workers,
                              std::chrono::milliseconds barrier_timeout = std::chrono::seconds(60),
                              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

  std::size_t num_workers() const noexcept override { return k_; }
  void post(WorkerId from, WorkerId to, Channel channel, Bytes bytes) override;
  BarrierResult barrier(WorkerId self, const ControlMessage& report) override;
  std::vector<Envelope> take_inbox(WorkerId self) override;
  CommStats comm_stats() const override;
  void abort() noexcept override { barrier_.abort(); }

 private:
  void complete_round();

  const std::size_t k_;
  std::vector<std::vector<std::vector<Envelope>>> outbox_;  // [from][to]
  std::vector<std::vector<Envelope>> inbox_;                // [to]
  std::vector<ControlMessage> reports_;
  BarrierResult last_;
  std::optional<std::mt19937_64> shuffle_;
  std::atomic<std::uint64_t> bytes_data_{0};
  std::atomic<std::uint64_t> bytes_control_{0};
  std::atomic<std::uint64_t> messages_{0};
  CyclicBarrier barrier_;
};

}  // namespace nbx
