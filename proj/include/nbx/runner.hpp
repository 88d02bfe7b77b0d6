#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "nbx/algorithms.hpp"
#include "nbx/engine.hpp"
#include "nbx/oracle.hpp"

namespace nbx {

struct RunConfig {
  std::filesystem::path input;
  std::string algo;
  bool undirected = false;
  std::size_t workers = 1;
  /// Absolute threshold; wins over theta_frac when both are set.
  std::optional<std::uint64_t> theta;
  /// theta = n / theta_frac.
  std::uint64_t theta_frac = 50;
  ActivationPolicy activation = ActivationPolicy::Auto;
  SyncPolicy sync = SyncPolicy::Critical;
  StoreMode store = StoreMode::Disk;
  std::uint64_t seed = 0;
  std::optional<VertexId> source;
  double damping = 0.85;
  std::uint32_t iterations = 10;
  std::filesystem::path results;
  std::filesystem::path metrics;
  bool audit = false;
  std::optional<std::uint32_t> max_supersteps;
  std::filesystem::path work_dir;
};

struct Execution {
  GraphMeta meta;
  algo::AlgorithmSpec spec;
  RunResult result;
  /// Raw edges as read, for the oracle.
  oracle::RawGraph raw;
};

/// ingest -> partition -> index -> store -> engine. Throws IngestError,
/// ParameterError/ConfigError, or the engine's errors.
Execution execute(const RunConfig& cfg);

/// `id<TAB>v1[ v2...]` per vertex in ascending id order over the spec's output positions.
void write_results(const Execution& ex, std::ostream& out);

/// One JSON object per superstep, then a summary object.
void write_metrics(const Execution& ex, const RunConfig& cfg, std::ostream& out);

/// nullopt when `result` matches the oracle (exactly, or within 1e-9 relative
/// for pr/ppr) or passes the mis/mm validator; otherwise the first divergence.
std::optional<std::string> check_result(const algo::AlgorithmSpec& spec, const RunResult& result,
                                        const oracle::RawGraph& raw, const oracle::OracleParams& params);

bool relative_close(double a, double b, double tol = 1e-9) noexcept;

}  // namespace nbx
