#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nbx {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

/// Internal inconsistency found while building partitions or indexes.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

/// A worker did not reach the barrier within the configured timeout.
class BarrierTimeout : public Error {
 public:
  using Error::Error;
};

/// Raised on workers blocked in a barrier when another worker failed.
class Aborted : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  IngestError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A neighborhood expression failed while evaluating one vertex.
class RunError : public Error {
 public:
  RunError(std::uint64_t vertex, std::uint32_t superstep, const std::string& what)
      : Error("vertex " + std::to_string(vertex) + ", superstep " +
              std::to_string(superstep) + ": " + what),
        vertex_(vertex),
        superstep_(superstep) {}

  std::uint64_t vertex() const noexcept { return vertex_; }
  std::uint32_t superstep() const noexcept { return superstep_; }

 private:
  std::uint64_t vertex_;
  std::uint32_t superstep_;
};

}  // namespace nbx
