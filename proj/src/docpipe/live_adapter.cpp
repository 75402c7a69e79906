#include "httplib.h"

#include <cstdlib>
#include <fstream>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/extract.hpp"

namespace dthread::docpipe {

using nlohmann::json;

LiveAdapter::LiveAdapter(std::string url, std::string api_key, std::optional<std::filesystem::path> record)
    : url_(std::move(url)), key_(std::move(api_key)), record_(std::move(record)) {}

LiveAdapter LiveAdapter::from_environment() {
  const char* url = std::getenv("DTHREAD_EXTRACTOR_URL");
  const char* key = std::getenv("DTHREAD_EXTRACTOR_KEY");
  const char* record = std::getenv("DTHREAD_EXTRACTOR_RECORD");
  if (url == nullptr || *url == '\0') throw Error(Errc::kAdapterFailure, "DTHREAD_EXTRACTOR_URL is not set");
  std::optional<std::filesystem::path> rec;
  if (record != nullptr && *record != '\0') rec = record;
  return LiveAdapter(url, key == nullptr ? "" : key, rec);
}

std::vector<CandidateSpan> LiveAdapter::propose(const core::DocumentArtifact& doc) {
  // split "scheme://host[:port]/path"
  const auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::kAdapterFailure, "bad extractor url " + url_);
  const auto path_start = url_.find('/', scheme_end + 3);
  const std::string origin = url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  const json request = adapter_request(doc);
  httplib::Client client(origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!key_.empty()) headers.emplace("Authorization", "Bearer " + key_);
  auto res = client.Post(path, headers, request.dump(), "application/json");
  if (!res) throw Error(Errc::kAdapterFailure, "extractor request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(Errc::kAdapterFailure, "extractor returned HTTP " + std::to_string(res->status));
  }
  json response;
  try {
    response = json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(Errc::kAdapterFailure, std::string("extractor response is not JSON: ") + e.what());
  }
  auto candidates = parse_adapter_response(doc.uid, response);
  if (record_) {
    std::ofstream out(*record_, std::ios::app | std::ios::binary);
    out << json{{"request_digest", request_digest(request)}, {"response", response}}.dump() << '\n';
  }
  return candidates;
}

}  // namespace dthread::docpipe
