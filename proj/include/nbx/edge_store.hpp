#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nbx/error.hpp"
#include "nbx/graph_model.hpp"
#include "nbx/partitioner.hpp"

namespace nbx {

enum class StoreMode { Disk, Memory };
enum class AccessMode { In, Out, All };

/// Segment file layout, all integers little-endian:
///
///   header   "G3SI" | version u32 | flags u32 (bit 0 directed) | reserved u32
///            | num_hosts u64 | num_local u64                          (32 bytes)
///   record   vertex id u64 | flags u32 (bit 0 host) | in u32 | out u32
///            | inverse u32 | in/out/inverse slot entries, u32 each
///
/// Records are sorted by vertex id. The sidecar `<path>.off` holds sorted
/// (id u64, offset u64) pairs, one per record.
inline constexpr char kSegmentMagic[4] = {'G', '3', 'S', 'I'};
inline constexpr std::uint32_t kSegmentVersion = 1;
inline constexpr std::size_t kSegmentHeaderBytes = 32;
inline constexpr std::size_t kRecordHeaderBytes = 24;

struct SegmentFile {
  std::filesystem::path path;
  std::filesystem::path offsets_path;
  std::uint64_t bytes = 0;
  std::size_t records = 0;
};

std::filesystem::path offsets_path_for(const std::filesystem::path& segment);

/// Throws StorageError (with the path) on any I/O failure.
SegmentFile write_segments(const Partition& p, const DualNeighborIndex& idx, const std::filesystem::path& path);

struct DecodedSegments {
  bool directed = false;
  std::vector<VertexId> local_ids;
  std::size_t num_hosts = 0;
  DualNeighborIndex index;
};

/// Full decode of a segment file; reconstructs the slot table from host flags.
DecodedSegments read_segments(const std::filesystem::path& path);

struct AccessRecord {
  std::uint32_t superstep = 0;
  VertexId vertex = 0;
  std::uint64_t offset = 0;
  std::uint64_t bytes = 0;
};

/// One worker's view of its dual index. In disk mode only the offset table
/// and a single reusable read buffer stay resident; each lookup is one seek
/// plus one contiguous read of the vertex's record.
///
/// Spans returned by the read functions stay valid until the next read.
class IndexStore {
 public:
  /// Memory-only store; set_mode(Disk) fails with StateError.
  static IndexStore in_memory(const Partition& p);
  /// Opens an existing segment file in disk mode.
  static IndexStore open(const std::filesystem::path& path);
  /// Writes `p.index` to `path` and opens it in disk mode.
  static IndexStore create(const Partition& p, const std::filesystem::path& path);

  IndexStore(IndexStore&&) noexcept = default;
  IndexStore& operator=(IndexStore&&) noexcept = default;

  StoreMode mode() const noexcept { return mode_; }
  /// Throws StateError while a run holds the store.
  void set_mode(StoreMode mode);

  class RunLock {
   public:
    explicit RunLock(IndexStore& s) : store_(&s) { store_->locked_ = true; }
    RunLock(RunLock&& o) noexcept : store_(std::exchange(o.store_, nullptr)) {}
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;
    RunLock& operator=(RunLock&&) = delete;
    ~RunLock() {
      if (store_) store_->locked_ = false;
    }

   private:
    IndexStore* store_;
  };
  /// Pins the current mode for the duration of a run.
  [[nodiscard]] RunLock lock_for_run() {
    if (locked_) throw StateError("index store already in use by a run");
    return RunLock(*this);
  }
  bool locked() const noexcept { return locked_; }

  bool directed() const noexcept { return directed_; }
  std::size_t num_records() const noexcept;

  /// Mode-filtered neighbor slots of host `v`. `All` on a directed graph
  /// returns the in-list followed by the out-list as stored. Undirected
  /// stores answer every mode with the single neighbor list.
  std::span<const Slot> read_neighbors(VertexId v, AccessMode mode);
  /// Host slots to notify when local vertex `v` (host or guest) changes.
  std::span<const Slot> read_inverse(VertexId v);

  void set_audit(bool on) noexcept { audit_ = on; }
  bool audit() const noexcept { return audit_; }
  void set_superstep(std::uint32_t s) noexcept { superstep_ = s; }
  const std::vector<AccessRecord>& access_log() const noexcept { return log_; }
  void clear_access_log() noexcept { log_.clear(); }

  std::size_t offset_table_bytes() const noexcept;
  std::size_t buffer_bytes() const noexcept;
  /// Largest single record in the segment file (disk-backed stores only).
  std::size_t max_record_bytes() const noexcept { return max_record_bytes_; }
  /// Bytes of index data currently held in memory.
  std::size_t resident_index_bytes() const noexcept;
  /// Peak of resident_index_bytes() observed while in disk mode.
  std::size_t peak_disk_resident_bytes() const noexcept { return peak_disk_resident_; }

 private:
  IndexStore() = default;

  struct RecordView {
    bool host;
    std::span<const Slot> in, out, inverse;
  };
  RecordView load_record(VertexId v);
  void load_memory_from_disk();
  void drop_memory();

  bool directed_ = false;
  StoreMode mode_ = StoreMode::Memory;
  bool locked_ = false;

  // memory tier
  std::vector<VertexId> local_ids_;
  std::size_t num_hosts_ = 0;
  DualNeighborIndex index_;
  std::vector<Slot> scratch_;

  // disk tier
  std::optional<std::filesystem::path> path_;
  std::ifstream file_;
  std::uint64_t file_bytes_ = 0;
  std::vector<std::pair<VertexId, std::uint64_t>> offsets_;
  std::vector<std::uint32_t> buffer_;
  std::size_t max_record_bytes_ = 0;
  std::size_t peak_disk_resident_ = 0;

  bool audit_ = false;
  std::uint32_t superstep_ = 0;
  std::vector<AccessRecord> log_;
};

}  // namespace nbx
