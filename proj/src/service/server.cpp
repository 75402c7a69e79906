#include <algorithm>
#include <cctype>

#include "dthread/core/error.hpp"
#include "dthread/service/api.hpp"

#include "httplib.h"

namespace dthread::service {

struct Server::Impl {
  ApiSession& session;
  httplib::Server http;

  explicit Impl(ApiSession& s) : session(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) { forward(req, res); };
    const std::string pattern = R"(/api/.*)";
    http.Get(pattern, route);
    http.Post(pattern, route);
    http.Patch(pattern, route);
    http.Options(pattern, route);
  }

  void forward(const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      api.headers.emplace(key, v);
    }
    if (req.is_multipart_form_data()) {
      for (const auto& [name, file] : req.files) api.uploads.push_back({name, file.filename, file.content});
    } else {
      api.body = req.body;
    }
    const ApiResponse out = session.handle(api);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (out.status != 204) res.set_content(out.body.dump(), "application/json; charset=utf-8");
  }
};

Server::Server(ApiSession& session) : impl_(std::make_unique<Impl>(session)) {}
Server::~Server() = default;

int Server::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

}  // namespace dthread::service
