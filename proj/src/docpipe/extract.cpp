#include "dthread/docpipe/extract.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "dthread/core/digest.hpp"
#include "dthread/core/error.hpp"
#include "dthread/core/units.hpp"
#include "dthread/docpipe/text.hpp"

namespace dthread::docpipe {

using nlohmann::json;

std::string_view to_string(AdapterMode mode) {
  switch (mode) {
    case AdapterMode::kBaseline: return "baseline";
    case AdapterMode::kExternalReplay: return "replay";
    case AdapterMode::kExternalLive: return "live";
  }
  return "baseline";
}

AdapterMode parse_adapter_mode(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "baseline") return AdapterMode::kBaseline;
  if (t == "replay" || t == "externalreplay" || t == "external-replay") return AdapterMode::kExternalReplay;
  if (t == "live" || t == "externallive" || t == "external-live") return AdapterMode::kExternalLive;
  throw Error(Errc::kInvalidArgument, "unknown adapter '" + std::string(text) + "'");
}

std::optional<std::string> find_modal(std::string_view sentence) {
  for (const Token& t : tokenize(sentence)) {
    if (t.cls != TokenClass::kWord) continue;
    std::string lw = to_lower(t.text);
    if (is_modal(lw)) return lw;
  }
  return std::nullopt;
}

json adapter_request(const core::DocumentArtifact& doc) {
  json sentences = json::array();
  for (const auto& s : doc.sentences) sentences.push_back({s.start, s.end});
  return json{{"task", "annotate-requirements"},
              {"document", doc.uid.str()},
              {"title", doc.title},
              {"text", doc.text},
              {"sentences", std::move(sentences)}};
}

std::string request_digest(const json& request) { return sha256_hex(request.dump()); }

std::vector<CandidateSpan> BaselineAdapter::propose(const core::DocumentArtifact& doc) {
  std::vector<CandidateSpan> out;
  for (const auto& span : doc.sentences) {
    if (auto modal = find_modal(doc.slice(span))) out.push_back({doc.uid, span, *modal, Decimal::from_int(1)});
  }
  return out;
}

std::vector<CandidateSpan> parse_adapter_response(const core::Uid& doc, const json& response) {
  try {
    std::vector<CandidateSpan> out;
    for (const auto& c : response.at("candidates")) {
      CandidateSpan cand;
      cand.doc = doc;
      cand.span = {c.at("start").get<std::size_t>(), c.at("end").get<std::size_t>()};
      cand.trigger = to_lower(c.at("trigger").get<std::string>());
      if (c.contains("confidence")) {
        const auto& conf = c.at("confidence");
        cand.confidence = Decimal::parse(conf.is_string() ? conf.get<std::string>() : conf.dump());
      }
      out.push_back(std::move(cand));
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::kAdapterFailure, std::string("malformed extractor response: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::kAdapterFailure, std::string("malformed extractor response: ") + e.what());
  }
}

ReplayAdapter::ReplayAdapter(const std::filesystem::path& fixture) {
  std::ifstream in(fixture, std::ios::binary);
  if (!in) throw Error(Errc::kAdapterFailure, "cannot open replay fixture " + fixture.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json record = json::parse(line);
      responses_[record.at("request_digest").get<std::string>()] = record.at("response");
    } catch (const json::exception& e) {
      throw Error(Errc::kAdapterFailure,
                  fixture.string() + ":" + std::to_string(lineno) + ": bad replay record: " + e.what());
    }
  }
}

std::vector<CandidateSpan> ReplayAdapter::propose(const core::DocumentArtifact& doc) {
  const std::string digest = request_digest(adapter_request(doc));
  auto it = responses_.find(digest);
  if (it == responses_.end()) {
    throw Error(Errc::kAdapterFailure, "no recorded response for " + doc.uid.str() + " (digest " + digest + ")");
  }
  return parse_adapter_response(doc.uid, it->second);
}

std::unique_ptr<ExtractorAdapter> make_adapter(AdapterMode mode,
                                               const std::optional<std::filesystem::path>& replay_fixture) {
  switch (mode) {
    case AdapterMode::kBaseline: return std::make_unique<BaselineAdapter>();
    case AdapterMode::kExternalReplay:
      if (!replay_fixture) throw Error(Errc::kInvalidArgument, "replay adapter needs a fixture file");
      return std::make_unique<ReplayAdapter>(*replay_fixture);
    case AdapterMode::kExternalLive: return std::make_unique<LiveAdapter>(LiveAdapter::from_environment());
  }
  throw Error(Errc::kInvalidArgument, "unknown adapter mode");
}

std::vector<CandidateSpan> annotate_candidates(const core::DocumentArtifact& doc, ExtractorAdapter& adapter) {
  std::vector<CandidateSpan> proposals = adapter.propose(doc);
  const std::set<core::Span> sentences(doc.sentences.begin(), doc.sentences.end());
  std::map<core::Span, CandidateSpan> by_span;
  for (auto& c : proposals) {
    if (c.doc != doc.uid) throw Error(Errc::kAdapterFailure, "candidate names document " + c.doc.str());
    if (!sentences.contains(c.span)) {
      throw Error(Errc::kAdapterFailure, "candidate span " + std::to_string(c.span.start) + "-" +
                                             std::to_string(c.span.end) + " is not a sentence of " + doc.uid.str());
    }
    if (!is_modal(c.trigger)) throw Error(Errc::kAdapterFailure, "trigger '" + c.trigger + "' is not a modal");
    bool present = false;
    for (const Token& t : tokenize(doc.slice(c.span))) {
      present = present || (t.cls == TokenClass::kWord && to_lower(t.text) == c.trigger);
    }
    if (!present) throw Error(Errc::kAdapterFailure, "trigger '" + c.trigger + "' does not occur in its sentence");
    if (c.confidence < Decimal::from_int(0) || c.confidence > Decimal::from_int(1)) {
      throw Error(Errc::kAdapterFailure, "confidence " + c.confidence.to_string() + " outside [0, 1]");
    }
    auto [it, inserted] = by_span.emplace(c.span, c);
    if (!inserted && c.confidence > it->second.confidence) it->second = c;
  }
  std::vector<CandidateSpan> out;
  out.reserve(by_span.size());
  for (auto& [span, c] : by_span) out.push_back(std::move(c));
  return out;
}

namespace {

bool starts_with_any(std::string_view word, std::initializer_list<std::string_view> stems) {
  return std::any_of(stems.begin(), stems.end(), [&](std::string_view s) { return word.starts_with(s); });
}

bool unit_word(std::string_view lw) {
  static const std::set<std::string, std::less<>> words = {
      "kg", "g", "w", "mw", "v", "mm", "m", "s", "cm", "km", "ms", "min", "h", "hz", "khz", "mhz", "ghz",
      "kbps", "mbps", "bps", "wh", "mah", "a", "ma", "c", "k", "deg", "degree", "degrees", "arcsec",
      "second", "seconds", "minute", "minutes", "hour", "hours", "day", "days", "year", "years",
      "percent", "kilogram", "kilograms", "gram", "grams", "watt", "watts", "volt", "volts", "meter",
      "meters", "millimeter", "millimeters", "metre", "metres", "orbits", "orbit", "krad", "gy"};
  return words.contains(lw);
}

bool glued_quantity(std::string_view lw) {
  std::size_t i = 0;
  while (i < lw.size() && (std::isdigit(static_cast<unsigned char>(lw[i])) != 0)) ++i;
  return i > 0 && i < lw.size() && unit_word(lw.substr(i));
}

const std::vector<std::string>& comparison_phrases() {
  static const std::vector<std::string> phrases = {
      "not exceed", "no more than", "no less than", "no greater than", "no fewer than", "at least", "at most",
      "less than",  "greater than", "more than",    "fewer than",      "lower than",    "higher than",
      "maximum of", "minimum of",   "not be less",  "not be greater",  "not be more",   "exceed"};
  return phrases;
}

}  // namespace

core::ReqType classify_requirement(std::string_view sentence) {
  const auto tokens = tokenize(sentence);
  std::vector<std::string> words;
  for (const auto& t : tokens) {
    if (t.cls == TokenClass::kWord) words.push_back(to_lower(t.text));
  }
  if (std::any_of(words.begin(), words.end(),
                  [](const std::string& w) { return starts_with_any(w, {"interface", "send", "sent", "connect"}); })) {
    return core::ReqType::kInterface;
  }
  std::string joined = " ";
  for (const auto& w : words) joined += w + " ";
  for (const auto& phrase : comparison_phrases()) {
    if (joined.find(" " + phrase + " ") != std::string::npos || joined.find(" " + phrase + "s ") != std::string::npos) {
      return core::ReqType::kConstraint;
    }
  }
  if (std::find(words.begin(), words.end(), "within") != words.end()) return core::ReqType::kPerformance;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].cls == TokenClass::kWord && glued_quantity(to_lower(tokens[i].text))) return core::ReqType::kPerformance;
    if (tokens[i].cls != TokenClass::kNumber || i + 1 >= tokens.size()) continue;
    const Token& next = tokens[i + 1];
    if ((next.cls == TokenClass::kWord && unit_word(to_lower(next.text))) || next.text == "%") {
      return core::ReqType::kPerformance;
    }
  }
  return core::ReqType::kFunctional;
}

core::Priority priority_for_trigger(std::string_view trigger) {
  const std::string t = to_lower(trigger);
  if (t == "shall" || t == "must") return core::Priority::kHigh;
  if (t == "should") return core::Priority::kLow;
  return core::Priority::kMed;
}

std::vector<core::Requirement> convert_to_requirements(const core::Model& model,
                                                       const std::vector<CandidateSpan>& candidates) {
  std::vector<core::Requirement> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto it = model.documents().find(c.doc);
    if (it == model.documents().end()) {
      throw Error(Errc::kUnresolvedReference, "candidate references unknown document " + c.doc.str());
    }
    const auto& doc = it->second;
    if (c.span.start >= c.span.end || c.span.end > doc.text.size()) {
      throw Error(Errc::kInvalidArgument, "candidate span out of bounds in " + c.doc.str());
    }
    core::Requirement req;
    req.text = std::string(doc.slice(c.span));
    req.type = classify_requirement(req.text);
    req.priority = priority_for_trigger(c.trigger);
    req.status = core::ReqStatus::kProposed;
    req.source = core::SourceRef{c.doc, c.span};
    out.push_back(std::move(req));
  }
  return out;
}

std::vector<core::Uid> extract_requirements(core::Model& model, const std::vector<CandidateSpan>& candidates) {
  std::set<std::pair<core::Uid, core::Span>> existing;
  for (const auto& [uid, req] : model.requirements()) {
    if (req.source) existing.emplace(req.source->doc, req.source->span);
  }
  std::vector<CandidateSpan> fresh;
  for (const auto& c : candidates) {
    if (existing.emplace(c.doc, c.span).second) fresh.push_back(c);
  }
  std::vector<core::Requirement> reqs = convert_to_requirements(model, fresh);
  std::vector<core::Uid> uids;
  uids.reserve(reqs.size());
  for (auto& req : reqs) {
    const core::Uid doc = req.source->doc;
    const core::Uid uid = model.add_requirement(std::move(req));
    model.add_trace(uid, core::TraceKind::kDerivedFrom, doc);
    uids.push_back(uid);
  }
  return uids;
}

}  // namespace dthread::docpipe
