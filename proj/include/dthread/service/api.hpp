#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "dthread/service/workspace.hpp"

namespace dthread::service {

struct Upload {
  std::string name;
  std::string filename;
  std::string content;
};

/// Transport-neutral request; header names are lowercase.
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;
  std::string body;
  std::vector<Upload> uploads;
};

struct ApiResponse {
  int status = 200;
  nlohmann::ordered_json body;
  std::map<std::string, std::string> headers;
};

struct ServiceConfig {
  std::string cors_origin = "http://localhost:5173";
  std::optional<std::filesystem::path> replay_fixture;
  verify::VerifyPolicy policy;
  std::string author = "service";
};

/// One open project. Reads run concurrently; mutations are serialized,
/// journaled, saved, and bump the revision.
class ApiSession {
 public:
  ApiSession(Workspace workspace, ServiceConfig config = {});

  ApiResponse handle(const ApiRequest& request);
  std::uint64_t revision() const;

 private:
  ApiResponse dispatch(const ApiRequest& request);

  template <typename Fn>
  ApiResponse mutate(const ApiRequest& request, Fn&& fn);

  ApiResponse get_project() const;
  ApiResponse get_requirement(const std::string& uid) const;
  ApiResponse get_dsm() const;
  ApiResponse get_impact(const ApiRequest& request) const;
  ApiResponse get_aabb(const std::string& uid) const;

  mutable std::shared_mutex mutex_;
  Workspace workspace_;
  ServiceConfig config_;
  std::uint64_t revision_ = 0;
  std::optional<nlohmann::ordered_json> latest_report_;
};

/// Serves `session` on host:port until `stop` is called from another
/// thread or the process ends. Throws Errc::kIo when the bind fails.
class Server {
 public:
  explicit Server(ApiSession& session);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and returns the bound port (useful with port 0).
  int bind(const std::string& host, int port);
  void listen();  // blocks
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port" or ":port"; defaults to 127.0.0.1:8080.
std::pair<std::string, int> parse_bind(const std::string& text);

}  // namespace dthread::service
