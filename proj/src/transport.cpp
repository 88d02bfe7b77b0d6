#include "nbx/transport.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "nbx/error.hpp"

namespace nbx {

namespace {

void put(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
}

std::uint64_t get(std::span<const std::byte> in, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  return v;
}

std::uint64_t value_bits(const AttrValue& v) {
  switch (kind_of(v)) {
    case AttrKind::Int64:
      return static_cast<std::uint64_t>(std::get<std::int64_t>(v));
    case AttrKind::Float64:
      return std::bit_cast<std::uint64_t>(std::get<double>(v));
    case AttrKind::Bool:
      return std::get<bool>(v) ? 1 : 0;
  }
  return 0;
}

AttrValue value_from_bits(AttrKind k, std::uint64_t bits) {
  switch (k) {
    case AttrKind::Int64:
      return static_cast<std::int64_t>(bits);
    case AttrKind::Float64:
      return std::bit_cast<double>(bits);
    case AttrKind::Bool:
      return bits != 0;
  }
  return std::int64_t{0};
}

}  // namespace

bool SyncMessage::operator==(const SyncMessage& o) const {
  if (target != o.target || vertex != o.vertex || payload.size() != o.payload.size()) return false;
  for (std::size_t i = 0; i < payload.size(); ++i)
    if (payload[i].first != o.payload[i].first || !attr_bits_equal(payload[i].second, o.payload[i].second))
      return false;
  return true;
}

SyncMessage make_sync(WorkerId target, VertexId vertex, const VertexValue& value, std::span<const AttrPos> positions) {
  SyncMessage m{target, vertex, {}};
  m.payload.reserve(positions.size());
  AttrPos prev = 0;
  for (AttrPos p : positions) {
    if (p <= prev) throw SchemaError("sync positions must be strictly ascending");
    if (p > AttributeSchema::kMaxAttributes) throw BoundsError("sync position exceeds 255");
    m.payload.emplace_back(static_cast<std::uint8_t>(p), value.get(p));
    prev = p;
  }
  return m;
}

Bytes encode(const SyncMessage& m) {
  if (m.payload.size() > AttributeSchema::kMaxAttributes) throw SchemaError("sync payload exceeds 255 entries");
  Bytes out;
  out.reserve(sync_encoded_size(m.payload.size()));
  put(out, m.vertex, 8);
  put(out, m.payload.size(), 1);
  for (const auto& [pos, value] : m.payload) {
    put(out, pos, 1);
    put(out, value_bits(value), 8);
  }
  return out;
}

SyncMessage decode_sync(std::span<const std::byte> bytes, const AttributeSchema& schema, WorkerId target) {
  if (bytes.size() < kSyncHeaderBytes) throw SchemaError("sync message too short");
  SyncMessage m{target, get(bytes, 0, 8), {}};
  const std::size_t count = get(bytes, 8, 1);
  if (bytes.size() != sync_encoded_size(count)) throw SchemaError("sync message length does not match its count");
  std::size_t at = kSyncHeaderBytes;
  AttrPos prev = 0;
  for (std::size_t i = 0; i < count; ++i, at += kSyncEntryBytes) {
    const auto pos = static_cast<AttrPos>(get(bytes, at, 1));
    if (pos <= prev || !schema.valid_position(pos)) throw SchemaError("invalid position in sync message");
    m.payload.emplace_back(static_cast<std::uint8_t>(pos), value_from_bits(schema.kind(pos), get(bytes, at + 1, 8)));
    prev = pos;
  }
  return m;
}

void apply_sync(const SyncMessage& m, VertexValue& guest) {
  for (const auto& [pos, value] : m.payload) guest.set(pos, value);
}

Bytes encode(const AuxMessage& m) {
  Bytes out;
  out.reserve(12 + 8 * m.items.size());
  put(out, m.vertex, 8);
  put(out, m.items.size(), 4);
  for (VertexId v : m.items) put(out, v, 8);
  return out;
}

AuxMessage decode_aux(std::span<const std::byte> bytes, WorkerId target) {
  if (bytes.size() < 12) throw SchemaError("aux message too short");
  AuxMessage m{target, get(bytes, 0, 8), {}};
  const std::size_t count = get(bytes, 8, 4);
  if (bytes.size() != 12 + 8 * count) throw SchemaError("aux message length does not match its count");
  m.items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) m.items.push_back(get(bytes, 12 + 8 * i, 8));
  return m;
}

Bytes encode(const ControlMessage& m) {
  Bytes out;
  out.reserve(kControlBytes);
  put(out, static_cast<std::uint8_t>(m.kind), 1);
  put(out, m.superstep, 4);
  put(out, m.n_change_local, 8);
  put(out, m.activated_any ? 1 : 0, 1);
  return out;
}

ControlMessage decode_control(std::span<const std::byte> bytes) {
  if (bytes.size() != kControlBytes) throw SchemaError("control message must be 14 bytes");
  const auto kind = get(bytes, 0, 1);
  if (kind > 1) throw SchemaError("unknown control message kind");
  return {static_cast<ControlMessage::Kind>(kind), static_cast<std::uint32_t>(get(bytes, 1, 4)), get(bytes, 5, 8),
          get(bytes, 13, 1) != 0};
}

CyclicBarrier::CyclicBarrier(std::size_t parties, std::chrono::milliseconds timeout, std::function<void()> on_complete)
    : parties_(parties), timeout_(timeout), on_complete_(std::move(on_complete)) {
  if (parties == 0) throw ConfigError("barrier needs at least one party");
}

void CyclicBarrier::arrive_and_wait() {
  std::unique_lock lock(mu_);
  if (aborted_) throw Aborted("barrier aborted");
  if (++arrived_ == parties_) {
    if (on_complete_) {
      try {
        on_complete_();
      } catch (...) {
        aborted_ = true;
        cv_.notify_all();
        throw;
      }
    }
    arrived_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  const std::uint64_t gen = generation_;
  if (!cv_.wait_for(lock, timeout_, [&] { return generation_ != gen || aborted_; })) {
    aborted_ = true;
    cv_.notify_all();
    throw BarrierTimeout("barrier timed out after " + std::to_string(timeout_.count()) + " ms with " +
                         std::to_string(arrived_) + " of " + std::to_string(parties_) + " workers present");
  }
  if (generation_ == gen) throw Aborted("barrier aborted");
}

void CyclicBarrier::abort() noexcept {
  std::lock_guard lock(mu_);
  aborted_ = true;
  cv_.notify_all();
}

bool CyclicBarrier::aborted() const {
  std::lock_guard lock(mu_);
  return aborted_;
}

InProcessTransport::InProcessTransport(std::size_t workers, std::chrono::milliseconds barrier_timeout,
                                       std::optional<std::uint64_t> shuffle_seed)
    : k_(workers),
      outbox_(workers, std::vector<std::vector<Envelope>>(workers)),
      inbox_(workers),
      reports_(workers),
      barrier_(workers == 0 ? 1 : workers, barrier_timeout, [this] { complete_round(); }) {
  if (workers == 0) throw ConfigError("transport needs at least one worker");
  if (shuffle_seed) shuffle_.emplace(*shuffle_seed);
}

void InProcessTransport::post(WorkerId from, WorkerId to, Channel channel, Bytes bytes) {
  if (from >= k_ || to >= k_)
    throw RoutingError("no route from worker " + std::to_string(from) + " to worker " + std::to_string(to));
  if (from != to) {
    bytes_data_.fetch_add(bytes.size(), std::memory_order_relaxed);
    messages_.fetch_add(1, std::memory_order_relaxed);
  }
  outbox_[from][to].push_back({from, channel, std::move(bytes)});
}

BarrierResult InProcessTransport::barrier(WorkerId self, const ControlMessage& report) {
  if (self >= k_) throw RoutingError("unknown worker " + std::to_string(self));
  reports_[self] = report;
  barrier_.arrive_and_wait();
  return last_;
}

void InProcessTransport::complete_round() {
  BarrierResult r;
  for (const auto& rep : reports_) {
    if (rep.superstep != reports_[0].superstep)
      throw StateError("workers disagree on superstep at barrier: " + std::to_string(rep.superstep) + " vs " +
                       std::to_string(reports_[0].superstep));
    r.n_change_total += rep.n_change_local;
    r.any_active = r.any_active || rep.activated_any;
  }
  // Worker 0 coordinates: every other worker sends one report and gets one release.
  bytes_control_.fetch_add(2 * (k_ - 1) * kControlBytes, std::memory_order_relaxed);

  for (std::size_t to = 0; to < k_; ++to) {
    auto& dst = inbox_[to];
    dst.clear();
    if (!shuffle_) {
      for (std::size_t from = 0; from < k_; ++from) {
        auto& src = outbox_[from][to];
        std::move(src.begin(), src.end(), std::back_inserter(dst));
        src.clear();
      }
      continue;
    }
    std::vector<std::size_t> cursor(k_, 0);
    std::size_t remaining = 0;
    for (std::size_t from = 0; from < k_; ++from) remaining += outbox_[from][to].size();
    while (remaining > 0) {
      std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
      std::size_t r_idx = pick(*shuffle_);
      for (std::size_t from = 0; from < k_; ++from) {
        const std::size_t left = outbox_[from][to].size() - cursor[from];
        if (r_idx < left) {
          dst.push_back(std::move(outbox_[from][to][cursor[from]++]));
          break;
        }
        r_idx -= left;
      }
      --remaining;
    }
    for (std::size_t from = 0; from < k_; ++from) outbox_[from][to].clear();
  }
  r.stats = comm_stats();
  last_ = r;
}

std::vector<Envelope> InProcessTransport::take_inbox(WorkerId self) {
  if (self >= k_) throw RoutingError("unknown worker " + std::to_string(self));
  return std::exchange(inbox_[self], {});
}

CommStats InProcessTransport::comm_stats() const {
  return {bytes_data_.load(std::memory_order_relaxed), bytes_control_.load(std::memory_order_relaxed),
          messages_.load(std::memory_order_relaxed)};
}

}  // namespace nbx
