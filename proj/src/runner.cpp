#include "nbx/runner.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "nbx/error.hpp"
#include "nbx/ingest.hpp"

namespace nbx {

namespace {

std::string format_attr(const AttrValue& v) {
  switch (kind_of(v)) {
    case AttrKind::Int64:
      return std::to_string(std::get<std::int64_t>(v));
    case AttrKind::Float64: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, std::get<double>(v));
      return std::string(buf, end);
    }
    case AttrKind::Bool:
      return std::get<bool>(v) ? "1" : "0";
  }
  return {};
}

}  // namespace

bool relative_close(double a, double b, double tol) noexcept {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

Execution execute(const RunConfig& cfg) {
  if (cfg.workers == 0) throw ConfigError("--workers must be at least 1");
  if (cfg.theta_frac == 0) throw ConfigError("--theta-frac must be at least 1");

  std::ifstream in(cfg.input);
  if (!in) throw IngestError(0, "cannot open " + cfg.input.string());
  const RawInput raw = parse_edges(in, cfg.undirected);
  const Graph g(normalize(raw));

  algo::AlgorithmParams params;
  params.source = cfg.source;
  params.damping = cfg.damping;
  params.iterations = cfg.iterations;
  params.seed = cfg.seed;
  auto spec = algo::make_algorithm(cfg.algo, params, g);

  EngineConfig ec;
  ec.workers = cfg.workers;
  ec.theta = cfg.theta.value_or(g.num_vertices() / cfg.theta_frac);
  ec.activation = cfg.activation;
  ec.sync = cfg.sync;
  ec.store = cfg.store;
  ec.seed = cfg.seed;
  ec.max_supersteps = cfg.max_supersteps;
  ec.audit = cfg.audit;
  ec.work_dir = cfg.work_dir;

  Engine engine(g, ec);
  RunResult result = engine.run(spec.program);
  return {g.meta(), std::move(spec), std::move(result), raw.graph};
}

void write_results(const Execution& ex, std::ostream& out) {
  for (std::size_t i = 0; i < ex.result.ids.size(); ++i) {
    out << ex.result.ids[i] << '\t';
    bool first = true;
    for (AttrPos p : ex.spec.output) {
      out << (first ? "" : " ") << format_attr(ex.result.values[i].get(p));
      first = false;
    }
    out << '\n';
  }
}

void write_metrics(const Execution& ex, const RunConfig& cfg, std::ostream& out) {
  using nlohmann::json;
  std::chrono::nanoseconds step_time{0};
  for (const auto& s : ex.result.supersteps) {
    step_time += s.wall_time;
    json rec{{"type", "superstep"},
             {"superstep", s.superstep},
             {"plan", s.plan},
             {"plan_name", s.plan_name},
             {"plan_superstep", s.plan_superstep},
             {"n_change", s.n_change},
             {"active_count", s.active_count},
             {"activation_mode", std::string(to_string(s.activation_mode_used))},
             {"bytes_data_delta", s.bytes_data_delta},
             {"wall_time_ns", s.wall_time.count()}};
    out << rec.dump() << '\n';
  }
  json summary{{"type", "summary"},
               {"algo", ex.spec.name},
               {"n", ex.meta.n},
               {"m", ex.meta.m},
               {"directed", ex.meta.directed},
               {"workers", cfg.workers},
               {"theta", ex.result.theta},
               {"activation", std::string(to_string(cfg.activation))},
               {"sync", std::string(to_string(cfg.sync))},
               {"store", cfg.store == StoreMode::Disk ? "disk" : "memory"},
               {"supersteps", ex.result.supersteps.size()},
               {"bytes_data", ex.result.comm.bytes_data},
               {"bytes_control", ex.result.comm.bytes_control},
               {"messages", ex.result.comm.messages},
               {"superstep_time_ns", step_time.count()},
               {"wall_time_ns", ex.result.wall_time.count()}};
  if (ex.spec.name == "tc") summary["triangles"] = algo::triangle_total(ex.result);
  out << summary.dump() << '\n';
}

std::optional<std::string> check_result(const algo::AlgorithmSpec& spec, const RunResult& result,
                                        const oracle::RawGraph& raw, const oracle::OracleParams& params) {
  const AttrPos pos = spec.output.front();
  if (spec.name == "mis") {
    std::map<VertexId, bool> in_set;
    for (std::size_t i = 0; i < result.ids.size(); ++i) in_set[result.ids[i]] = result.values[i].get_int(pos) == algo::kInSet;
    return oracle::validate_mis(raw, in_set);
  }
  if (spec.name == "mm") {
    std::map<VertexId, std::int64_t> partner;
    for (std::size_t i = 0; i < result.ids.size(); ++i) partner[result.ids[i]] = result.values[i].get_int(pos);
    return oracle::validate_mm(raw, partner);
  }

  const auto expected = oracle::run(spec.name, raw, params);
  if (expected.values.size() != result.ids.size())
    return "oracle has " + std::to_string(expected.values.size()) + " vertices, engine has " +
           std::to_string(result.ids.size());
  std::size_t i = 0;
  for (const auto& [id, want] : expected.values) {
    const VertexId got_id = result.ids[i];
    if (got_id != id) return "vertex " + std::to_string(id) + " missing from engine output";
    const AttrValue& got = result.values[i].get(pos);
    const bool ok = kind_of(want) == AttrKind::Float64 && kind_of(got) == AttrKind::Float64
                        ? relative_close(std::get<double>(got), std::get<double>(want))
                        : kind_of(got) == kind_of(want) && attr_bits_equal(got, want);
    if (!ok)
      return "vertex " + std::to_string(id) + ": expected " + format_attr(want) + ", got " + format_attr(got);
    ++i;
  }
  if (expected.total && *expected.total != algo::triangle_total(result))
    return "triangle total: expected " + std::to_string(*expected.total) + ", got " +
           std::to_string(algo::triangle_total(result));
  return std::nullopt;
}

}  // namespace nbx
