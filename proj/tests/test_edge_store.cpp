#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "nbx/edge_store.hpp"
#include "nbx/error.hpp"
#include "support.hpp"

using namespace nbx;
using namespace nbx::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("nbx-store-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::vector<Partition> paper_parts() {
  return build_partitions(to_graph({{1, 2, 3, 4, 5}, {{1, 2}, {1, 4}, {2, 3}, {2, 5}}, false}), 3);
}

std::vector<VertexId> ids(const Partition& p, std::span<const Slot> slots) {
  std::vector<VertexId> out;
  for (Slot s : slots) out.push_back(p.local_ids[s]);
  return out;
}

}  // namespace

TEST_CASE("paper graph segments decode to the example index") {
  TempDir dir;
  const auto parts = paper_parts();
  const Partition& w2 = parts[2];
  const auto file = write_segments(w2, w2.index, dir.path / "w2.seg");
  CHECK(file.records == w2.num_local());
  CHECK(fs::file_size(file.path) == file.bytes);
  CHECK(fs::file_size(file.offsets_path) == 16 * file.records);

  const auto dec = read_segments(file.path);
  CHECK(dec.local_ids == w2.local_ids);
  CHECK(dec.num_hosts == w2.num_hosts);
  CHECK(dec.index == w2.index);

  auto store = IndexStore::open(file.path);
  CHECK(store.mode() == StoreMode::Disk);
  CHECK(ids(w2, store.read_neighbors(2, AccessMode::All)) == std::vector<VertexId>{1, 3, 5});
  CHECK(ids(w2, store.read_inverse(2)) == std::vector<VertexId>{5});
  CHECK(ids(w2, store.read_inverse(1)) == std::vector<VertexId>{2});
  CHECK_THROWS_AS(store.read_neighbors(1, AccessMode::All), LookupError);
  CHECK_THROWS_AS(store.read_inverse(4), LookupError);
}

TEST_CASE("segment header") {
  TempDir dir;
  const auto parts = paper_parts();
  const auto file = write_segments(parts[0], parts[0].index, dir.path / "w0.seg");
  std::ifstream in(file.path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  CHECK(std::string(magic, 4) == "G3SI");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  CHECK(version == kSegmentVersion);
}

TEST_CASE("empty partition gives a valid empty segment file") {
  TempDir dir;
  const auto parts = build_partitions(to_graph({{0, 2}, {{0, 2}}, false}), 2);
  REQUIRE(parts[1].num_local() == 0);
  const auto file = write_segments(parts[1], parts[1].index, dir.path / "empty.seg");
  CHECK(file.records == 0);
  CHECK(file.bytes == kSegmentHeaderBytes);
  const auto dec = read_segments(file.path);
  CHECK(dec.local_ids.empty());
  auto store = IndexStore::open(file.path);
  CHECK(store.num_records() == 0);
}

TEST_CASE("round trip on random partitions") {
  TempDir dir;
  for (bool directed : {false, true}) {
    const auto g = to_graph(random_graph(21, 200, 0.05, directed).raw);
    const auto parts = build_partitions(g, 4);
    for (const auto& p : parts) {
      const auto path = dir.path / ("r" + std::to_string(directed) + std::to_string(p.worker) + ".seg");
      write_segments(p, p.index, path);
      const auto dec = read_segments(path);
      CHECK(dec.index == p.index);
      CHECK(dec.local_ids == p.local_ids);
      CHECK(dec.directed == directed);

      auto disk = IndexStore::open(path);
      auto mem = IndexStore::in_memory(p);
      for (Slot h = 0; h < p.num_hosts; ++h) {
        const VertexId v = p.local_ids[h];
        for (AccessMode m : {AccessMode::In, AccessMode::Out, AccessMode::All}) {
          auto a = disk.read_neighbors(v, m);
          const std::vector<Slot> first(a.begin(), a.end());
          auto b = mem.read_neighbors(v, m);
          CHECK(first == std::vector<Slot>(b.begin(), b.end()));
          auto again = disk.read_neighbors(v, m);
          CHECK(first == std::vector<Slot>(again.begin(), again.end()));
        }
      }
      for (VertexId v : p.local_ids) {
        auto a = disk.read_inverse(v);
        const std::vector<Slot> da(a.begin(), a.end());
        auto b = mem.read_inverse(v);
        CHECK(da == std::vector<Slot>(b.begin(), b.end()));
      }
    }
  }
}

TEST_CASE("directed access modes") {
  const auto g = to_graph({{}, {{1, 2}, {3, 1}, {1, 5}}, true});
  const auto parts = build_partitions(g, 1);
  auto store = IndexStore::in_memory(parts[0]);
  const auto& p = parts[0];
  CHECK(ids(p, store.read_neighbors(1, AccessMode::In)) == std::vector<VertexId>{3});
  CHECK(ids(p, store.read_neighbors(1, AccessMode::Out)) == std::vector<VertexId>{2, 5});
  CHECK(ids(p, store.read_neighbors(1, AccessMode::All)) == std::vector<VertexId>{3, 2, 5});
  CHECK(store.read_neighbors(2, AccessMode::Out).empty());
}

TEST_CASE("isolated vertex and unreferenced vertex") {
  const auto parts = build_partitions(to_graph({{7}, {{1, 2}}, false}), 1);
  auto store = IndexStore::in_memory(parts[0]);
  CHECK(store.read_neighbors(7, AccessMode::All).empty());
  CHECK(store.read_inverse(7).empty());
}

TEST_CASE("audit log records one contiguous region per read") {
  TempDir dir;
  const auto parts = build_partitions(to_graph(random_graph(4, 120, 0.1, false).raw), 2);
  auto store = IndexStore::create(parts[0], dir.path / "a.seg");
  store.set_audit(true);
  store.set_superstep(3);
  std::size_t reads = 0;
  for (VertexId v : parts[0].host_ids()) {
    store.read_neighbors(v, AccessMode::All);
    ++reads;
  }
  REQUIRE(store.access_log().size() == reads);
  const auto file_size = fs::file_size(dir.path / "a.seg");
  std::uint64_t prev_end = kSegmentHeaderBytes;
  for (const auto& rec : store.access_log()) {
    CHECK(rec.superstep == 3);
    CHECK(rec.offset >= prev_end);  // ascending ids, ascending offsets
    CHECK(rec.offset + rec.bytes <= file_size);
    CHECK(rec.bytes >= kRecordHeaderBytes);
    prev_end = rec.offset + rec.bytes;
  }
  CHECK(store.peak_disk_resident_bytes() <= store.offset_table_bytes() + store.max_record_bytes());
}

TEST_CASE("memory mode has no access log") {
  const auto parts = paper_parts();
  auto store = IndexStore::in_memory(parts[2]);
  store.set_audit(true);
  store.read_neighbors(2, AccessMode::All);
  CHECK(store.access_log().empty());
}

TEST_CASE("set_mode rules") {
  TempDir dir;
  const auto parts = paper_parts();
  auto mem = IndexStore::in_memory(parts[2]);
  CHECK_THROWS_AS(mem.set_mode(StoreMode::Disk), StateError);

  auto disk = IndexStore::create(parts[2], dir.path / "m.seg");
  const auto before = ids(parts[2], disk.read_neighbors(2, AccessMode::All));
  disk.set_mode(StoreMode::Memory);
  CHECK(disk.mode() == StoreMode::Memory);
  CHECK(ids(parts[2], disk.read_neighbors(2, AccessMode::All)) == before);
  disk.set_mode(StoreMode::Disk);
  {
    auto lock = disk.lock_for_run();
    CHECK_THROWS_AS(disk.set_mode(StoreMode::Memory), StateError);
    CHECK_THROWS_AS(disk.lock_for_run(), StateError);
  }
  CHECK_NOTHROW(disk.set_mode(StoreMode::Memory));
}

TEST_CASE("storage errors carry the path") {
  const auto parts = paper_parts();
  try {
    write_segments(parts[0], parts[0].index, "/nonexistent-dir/x.seg");
    FAIL("expected StorageError");
  } catch (const StorageError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.seg") != std::string::npos);
  }
  CHECK_THROWS_AS(IndexStore::open("/nonexistent-dir/x.seg"), StorageError);
}
