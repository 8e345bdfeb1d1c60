#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tndp/io.hpp"
#include "tndp/road_graph.hpp"
#include "tndp/transit_graph.hpp"
#include "tndp/weightfit.hpp"

namespace tndp {

struct ServerData {
  std::vector<io::ParetoEntry> archive;  // crowding order
  RoutePool pool;
  RoadGraph road;
  BusNetwork baseline;
  std::optional<ObjectiveVector> baseline_objectives;
  std::filesystem::path ratings_path;
  RatingScale scale{};
  std::size_t default_sample{9};
  std::optional<std::filesystem::path> static_dir;
};

// JSON API for the rating session. The only mutable state is the append-only
// ratings file; writes are serialized.
class ApiServer {
 public:
  explicit ApiServer(ServerData data);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws ConfigError on failure.
  int bind(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until stop().
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tndp
