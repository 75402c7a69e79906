#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "dthread/core/decimal.hpp"
#include "dthread/core/model.hpp"
#include "dthread/core/types.hpp"

namespace dthread::docpipe {

enum class AdapterMode { kBaseline, kExternalReplay, kExternalLive };

std::string_view to_string(AdapterMode mode);
/// "baseline", "replay" or "live" (also the long enumerator names).
AdapterMode parse_adapter_mode(std::string_view text);

struct CandidateSpan {
  core::Uid doc;
  core::Span span;
  std::string trigger;  // lowercase modal
  Decimal confidence = Decimal::from_int(1);
  friend bool operator==(const CandidateSpan&, const CandidateSpan&) = default;
};

/// First whole-word modal of `sentence`, lowercased.
std::optional<std::string> find_modal(std::string_view sentence);

/// Canonical request sent to external extractors for one document.
nlohmann::json adapter_request(const core::DocumentArtifact& doc);
/// Content digest keying replay fixtures: sha256 of the request's compact
/// canonical JSON.
std::string request_digest(const nlohmann::json& request);

class ExtractorAdapter {
 public:
  virtual ~ExtractorAdapter() = default;
  virtual std::string name() const = 0;
  virtual AdapterMode mode() const = 0;
  /// Raw proposals; annotate_candidates validates them.
  virtual std::vector<CandidateSpan> propose(const core::DocumentArtifact& doc) = 0;
};

class BaselineAdapter final : public ExtractorAdapter {
 public:
  std::string name() const override { return "baseline"; }
  AdapterMode mode() const override { return AdapterMode::kBaseline; }
  std::vector<CandidateSpan> propose(const core::DocumentArtifact& doc) override;
};

/// Serves recorded responses from a JSON-lines file of
/// `{"request_digest": ..., "response": {...}}` records.
class ReplayAdapter final : public ExtractorAdapter {
 public:
  explicit ReplayAdapter(const std::filesystem::path& fixture);
  explicit ReplayAdapter(std::map<std::string, nlohmann::json> responses) : responses_(std::move(responses)) {}
  std::string name() const override { return "replay"; }
  AdapterMode mode() const override { return AdapterMode::kExternalReplay; }
  std::vector<CandidateSpan> propose(const core::DocumentArtifact& doc) override;

 private:
  std::map<std::string, nlohmann::json> responses_;
};

/// POSTs the request JSON to an HTTP(S) endpoint. When `record` is set,
/// every exchange is appended there in replay format.
class LiveAdapter final : public ExtractorAdapter {
 public:
  LiveAdapter(std::string url, std::string api_key, std::optional<std::filesystem::path> record = std::nullopt);
  /// Reads DTHREAD_EXTRACTOR_URL, DTHREAD_EXTRACTOR_KEY and the optional
  /// DTHREAD_EXTRACTOR_RECORD. Throws Errc::kAdapterFailure when unset.
  static LiveAdapter from_environment();
  std::string name() const override { return "live"; }
  AdapterMode mode() const override { return AdapterMode::kExternalLive; }
  std::vector<CandidateSpan> propose(const core::DocumentArtifact& doc) override;

 private:
  std::string url_;
  std::string key_;
  std::optional<std::filesystem::path> record_;
};

/// Parses an extractor response body `{"candidates": [{"start", "end",
/// "trigger", "confidence"}]}`. Throws Errc::kAdapterFailure.
std::vector<CandidateSpan> parse_adapter_response(const core::Uid& doc, const nlohmann::json& response);

/// Adapter factory for the CLI and service. `replay_fixture` is required for
/// replay mode.
std::unique_ptr<ExtractorAdapter> make_adapter(AdapterMode mode,
                                               const std::optional<std::filesystem::path>& replay_fixture);

/// Stage one. Output is sorted by span start, one candidate per sentence.
/// Any proposal outside the sentence list, with a trigger absent from its
/// sentence or with confidence outside [0, 1] fails the whole call with
/// Errc::kAdapterFailure.
std::vector<CandidateSpan> annotate_candidates(const core::DocumentArtifact& doc, ExtractorAdapter& adapter);

/// Keyword classification, first match wins: Interface, Constraint,
/// Performance, else Functional.
core::ReqType classify_requirement(std::string_view sentence);
/// shall/must -> High, will -> Med, should -> Low.
core::Priority priority_for_trigger(std::string_view trigger);

/// Stage two, without registration: one Proposed requirement per candidate,
/// text sliced from the document. Uids are left default. Throws
/// Errc::kUnresolvedReference for unknown documents.
std::vector<core::Requirement> convert_to_requirements(const core::Model& model,
                                                       const std::vector<CandidateSpan>& candidates);

/// Registers converted requirements with a Document binding on their span
/// and a DerivedFrom trace to their document. A candidate whose (doc, span)
/// already backs a live requirement is skipped. Returns the new uids in
/// candidate order.
std::vector<core::Uid> extract_requirements(core::Model& model, const std::vector<CandidateSpan>& candidates);

}  // namespace dthread::docpipe
