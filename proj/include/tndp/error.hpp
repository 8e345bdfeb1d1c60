#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "tndp/ids.hpp"

namespace tndp {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kData = 3,
  kInfeasible = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_{code} {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ExitCode::kData, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(ExitCode::kInfeasible, what) {}
};

class UnknownRouteError : public DataError {
 public:
  explicit UnknownRouteError(RouteId id)
      : DataError("unknown route id " + std::to_string(id.v)), id_{id} {}
  RouteId route() const { return id_; }

 private:
  RouteId id_;
};

class UnreachableError : public DataError {
 public:
  UnreachableError(NodeId from, NodeId to)
      : DataError("no road path from node " + std::to_string(from.v) + " to node " +
                  std::to_string(to.v)),
        pair_{from, to} {}
  std::pair<NodeId, NodeId> pair() const { return pair_; }

 private:
  std::pair<NodeId, NodeId> pair_;
};

// Missing artifact produced by an upstream pipeline stage.
class MissingArtifactError : public ConfigError {
 public:
  MissingArtifactError(const std::string& stage, const std::string& path)
      : ConfigError("missing artifact '" + path + "'; rerun stage '" + stage + "'"),
        stage_{stage} {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tndp
