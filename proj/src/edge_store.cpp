#include "nbx/edge_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <string>

#include "nbx/error.hpp"

namespace nbx {

static_assert(std::endian::native == std::endian::little,
              "segment records are read in place and assume a little-endian host");

namespace fs = std::filesystem;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StorageError("cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.flush();
  if (!f) throw StorageError("write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw StorageError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw StorageError("read failed for '" + path.string() + "'");
  return bytes;
}

struct FileHeader {
  bool directed;
  std::uint64_t num_hosts;
  std::uint64_t num_local;
};

FileHeader parse_header(const char* p, std::size_t size, const fs::path& path) {
  if (size < kSegmentHeaderBytes || std::memcmp(p, kSegmentMagic, 4) != 0)
    throw StorageError("'" + path.string() + "' is not a segment file");
  if (get_u32(p + 4) != kSegmentVersion)
    throw StorageError("'" + path.string() + "' has unsupported version " + std::to_string(get_u32(p + 4)));
  return {(get_u32(p + 8) & 1u) != 0, get_u64(p + 16), get_u64(p + 24)};
}

std::optional<Slot> find_local(std::span<const VertexId> ids, std::size_t num_hosts, VertexId v) {
  auto hosts = ids.first(num_hosts);
  auto it = std::lower_bound(hosts.begin(), hosts.end(), v);
  if (it != hosts.end() && *it == v) return static_cast<Slot>(it - hosts.begin());
  auto guests = ids.subspan(num_hosts);
  auto jt = std::lower_bound(guests.begin(), guests.end(), v);
  if (jt != guests.end() && *jt == v) return static_cast<Slot>(num_hosts + (jt - guests.begin()));
  return std::nullopt;
}

}  // namespace

fs::path offsets_path_for(const fs::path& segment) {
  fs::path p = segment;
  p += ".off";
  return p;
}

SegmentFile write_segments(const Partition& p, const DualNeighborIndex& idx, const fs::path& path) {
  check_dual_index(p, idx);

  std::vector<Slot> order(p.num_local());
  for (Slot s = 0; s < order.size(); ++s) order[s] = s;
  std::sort(order.begin(), order.end(), [&](Slot a, Slot b) { return p.local_ids[a] < p.local_ids[b]; });

  std::string bytes;
  bytes.append(kSegmentMagic, 4);
  put_u32(bytes, kSegmentVersion);
  put_u32(bytes, idx.directed ? 1u : 0u);
  put_u32(bytes, 0);
  put_u64(bytes, p.num_hosts);
  put_u64(bytes, p.num_local());

  std::string offsets;
  static const std::vector<Slot> kNone;
  for (Slot s : order) {
    const bool host = p.is_host(s);
    const auto& in = host && idx.directed ? idx.in[s] : kNone;
    const auto& out = host ? idx.out[s] : kNone;
    const auto& inv = idx.inverse[s];
    put_u64(offsets, p.local_ids[s]);
    put_u64(offsets, bytes.size());
    put_u64(bytes, p.local_ids[s]);
    put_u32(bytes, host ? 1u : 0u);
    put_u32(bytes, static_cast<std::uint32_t>(in.size()));
    put_u32(bytes, static_cast<std::uint32_t>(out.size()));
    put_u32(bytes, static_cast<std::uint32_t>(inv.size()));
    for (Slot x : in) put_u32(bytes, x);
    for (Slot x : out) put_u32(bytes, x);
    for (Slot x : inv) put_u32(bytes, x);
  }

  SegmentFile sf{path, offsets_path_for(path), bytes.size(), order.size()};
  write_file(sf.path, bytes);
  write_file(sf.offsets_path, offsets);
  return sf;
}

DecodedSegments read_segments(const fs::path& path) {
  const std::string bytes = read_file(path);
  const FileHeader h = parse_header(bytes.data(), bytes.size(), path);

  struct Raw {
    VertexId id;
    bool host;
    std::vector<Slot> in, out, inv;
  };
  std::vector<Raw> raws;
  std::size_t pos = kSegmentHeaderBytes;
  while (pos < bytes.size()) {
    if (pos + kRecordHeaderBytes > bytes.size()) throw StorageError("truncated record in '" + path.string() + "'");
    const char* r = bytes.data() + pos;
    Raw raw{get_u64(r), (get_u32(r + 8) & 1u) != 0, {}, {}, {}};
    std::uint32_t counts[3] = {get_u32(r + 12), get_u32(r + 16), get_u32(r + 20)};
    pos += kRecordHeaderBytes;
    std::vector<Slot>* lists[3] = {&raw.in, &raw.out, &raw.inv};
    for (int l = 0; l < 3; ++l) {
      if (pos + 4ull * counts[l] > bytes.size()) throw StorageError("truncated record in '" + path.string() + "'");
      for (std::uint32_t i = 0; i < counts[l]; ++i, pos += 4) lists[l]->push_back(get_u32(bytes.data() + pos));
    }
    raws.push_back(std::move(raw));
  }
  if (raws.size() != h.num_local) throw StorageError("record count mismatch in '" + path.string() + "'");

  DecodedSegments out;
  out.directed = h.directed;
  std::vector<const Raw*> hosts, guests;
  for (const auto& r : raws) (r.host ? hosts : guests).push_back(&r);
  if (hosts.size() != h.num_hosts) throw StorageError("host count mismatch in '" + path.string() + "'");
  out.num_hosts = hosts.size();
  out.index.directed = h.directed;
  out.index.out.resize(hosts.size());
  if (h.directed) out.index.in.resize(hosts.size());
  out.index.inverse.resize(raws.size());
  Slot s = 0;
  for (const Raw* r : hosts) {
    out.local_ids.push_back(r->id);
    out.index.out[s] = r->out;
    if (h.directed) out.index.in[s] = r->in;
    out.index.inverse[s] = r->inv;
    ++s;
  }
  for (const Raw* r : guests) {
    out.local_ids.push_back(r->id);
    out.index.inverse[s] = r->inv;
    ++s;
  }
  return out;
}

IndexStore IndexStore::in_memory(const Partition& p) {
  check_dual_index(p, p.index);
  IndexStore s;
  s.directed_ = p.directed;
  s.mode_ = StoreMode::Memory;
  s.local_ids_ = p.local_ids;
  s.num_hosts_ = p.num_hosts;
  s.index_ = p.index;
  return s;
}

IndexStore IndexStore::open(const fs::path& path) {
  IndexStore s;
  s.path_ = path;
  s.file_.open(path, std::ios::binary);
  if (!s.file_) throw StorageError("cannot open '" + path.string() + "'");
  char head[kSegmentHeaderBytes];
  s.file_.read(head, kSegmentHeaderBytes);
  if (!s.file_) throw StorageError("cannot read header of '" + path.string() + "'");
  s.directed_ = parse_header(head, kSegmentHeaderBytes, path).directed;
  s.file_bytes_ = fs::file_size(path);

  const std::string off = read_file(offsets_path_for(path));
  if (off.size() % 16 != 0) throw StorageError("malformed offset table for '" + path.string() + "'");
  s.offsets_.reserve(off.size() / 16);
  for (std::size_t i = 0; i < off.size(); i += 16) s.offsets_.emplace_back(get_u64(off.data() + i), get_u64(off.data() + i + 8));
  for (std::size_t i = 0; i < s.offsets_.size(); ++i) {
    const std::uint64_t end = i + 1 < s.offsets_.size() ? s.offsets_[i + 1].second : s.file_bytes_;
    if (end < s.offsets_[i].second + kRecordHeaderBytes || (i > 0 && s.offsets_[i - 1].first >= s.offsets_[i].first))
      throw StorageError("inconsistent offset table for '" + path.string() + "'");
    s.max_record_bytes_ = std::max<std::size_t>(s.max_record_bytes_, end - s.offsets_[i].second);
  }
  s.buffer_.reserve(s.max_record_bytes_ / 4);
  s.mode_ = StoreMode::Disk;
  s.peak_disk_resident_ = s.resident_index_bytes();
  return s;
}

IndexStore IndexStore::create(const Partition& p, const fs::path& path) {
  write_segments(p, p.index, path);
  return open(path);
}

void IndexStore::set_mode(StoreMode mode) {
  if (locked_) throw StateError("cannot change store mode during a run");
  if (mode == mode_) return;
  if (mode == StoreMode::Disk) {
    if (!path_) throw StateError("store has no segment file; disk mode unavailable");
    drop_memory();
  } else {
    load_memory_from_disk();
  }
  mode_ = mode;
}

void IndexStore::load_memory_from_disk() {
  DecodedSegments d = read_segments(*path_);
  local_ids_ = std::move(d.local_ids);
  num_hosts_ = d.num_hosts;
  index_ = std::move(d.index);
}

void IndexStore::drop_memory() {
  local_ids_ = {};
  index_ = {};
  scratch_ = {};
  num_hosts_ = 0;
}

std::size_t IndexStore::num_records() const noexcept {
  return mode_ == StoreMode::Disk ? offsets_.size() : local_ids_.size();
}

IndexStore::RecordView IndexStore::load_record(VertexId v) {
  auto it = std::lower_bound(offsets_.begin(), offsets_.end(), v,
                             [](const auto& e, VertexId id) { return e.first < id; });
  if (it == offsets_.end() || it->first != v) throw LookupError("vertex " + std::to_string(v) + " has no index record");
  const std::uint64_t offset = it->second;
  const std::uint64_t end = std::next(it) != offsets_.end() ? std::next(it)->second : file_bytes_;
  const std::size_t len = end - offset;

  buffer_.resize((len + 3) / 4);
  file_.clear();
  file_.seekg(static_cast<std::streamoff>(offset));
  file_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(len));
  if (!file_) throw StorageError("read of vertex " + std::to_string(v) + " failed in '" + path_->string() + "'");
  if (audit_) log_.push_back({superstep_, v, offset, len});
  peak_disk_resident_ = std::max(peak_disk_resident_, resident_index_bytes());

  const std::uint32_t* w = buffer_.data();
  const std::uint64_t id = static_cast<std::uint64_t>(w[0]) | (static_cast<std::uint64_t>(w[1]) << 32);
  const std::size_t n_in = w[3], n_out = w[4], n_inv = w[5];
  if (id != v || kRecordHeaderBytes + 4 * (n_in + n_out + n_inv) != len)
    throw StorageError("corrupt record for vertex " + std::to_string(v) + " in '" + path_->string() + "'");
  const Slot* e = w + kRecordHeaderBytes / 4;
  return {(w[2] & 1u) != 0, {e, n_in}, {e + n_in, n_out}, {e + n_in + n_out, n_inv}};
}

std::span<const Slot> IndexStore::read_neighbors(VertexId v, AccessMode mode) {
  if (mode_ == StoreMode::Disk) {
    RecordView r = load_record(v);
    if (!r.host) throw LookupError("vertex " + std::to_string(v) + " is not a host on this worker");
    if (!directed_) return r.out;
    switch (mode) {
      case AccessMode::In:
        return r.in;
      case AccessMode::Out:
        return r.out;
      case AccessMode::All:
        return {r.in.data(), r.in.size() + r.out.size()};
    }
    return {};
  }

  auto s = find_local(local_ids_, num_hosts_, v);
  if (!s || *s >= num_hosts_) throw LookupError("vertex " + std::to_string(v) + " is not a host on this worker");
  if (!directed_) return index_.out[*s];
  switch (mode) {
    case AccessMode::In:
      return index_.in[*s];
    case AccessMode::Out:
      return index_.out[*s];
    case AccessMode::All:
      scratch_.assign(index_.in[*s].begin(), index_.in[*s].end());
      scratch_.insert(scratch_.end(), index_.out[*s].begin(), index_.out[*s].end());
      return scratch_;
  }
  return {};
}

std::span<const Slot> IndexStore::read_inverse(VertexId v) {
  if (mode_ == StoreMode::Disk) return load_record(v).inverse;
  auto s = find_local(local_ids_, num_hosts_, v);
  if (!s) throw LookupError("vertex " + std::to_string(v) + " is not local to this worker");
  return index_.inverse[*s];
}

std::size_t IndexStore::offset_table_bytes() const noexcept {
  return offsets_.capacity() * sizeof(offsets_[0]);
}

std::size_t IndexStore::buffer_bytes() const noexcept { return buffer_.capacity() * sizeof(std::uint32_t); }

std::size_t IndexStore::resident_index_bytes() const noexcept {
  std::size_t total = offset_table_bytes() + buffer_bytes();
  if (mode_ == StoreMode::Memory) {
    total += local_ids_.capacity() * sizeof(VertexId) + scratch_.capacity() * sizeof(Slot);
    for (const auto* lists : {&index_.in, &index_.out, &index_.inverse})
      for (const auto& l : *lists) total += l.capacity() * sizeof(Slot);
  }
  return total;
}

}  // namespace nbx
