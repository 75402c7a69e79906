#include "dthread/synth/identify.hpp"

#include <algorithm>
#include <map>

#include "dthread/core/interaction_set.hpp"
#include "dthread/docpipe/text.hpp"

namespace dthread::synth {

using core::Uid;
using docpipe::Token;
using docpipe::TokenClass;

namespace {

std::vector<const Token*> word_tokens(const std::vector<Token>& tokens) {
  std::vector<const Token*> out;
  for (const auto& t : tokens) {
    if (t.cls == TokenClass::kWord) out.push_back(&t);
  }
  return out;
}

std::optional<std::size_t> modal_offset(std::string_view text) {
  for (const auto& t : docpipe::tokenize(text)) {
    if (t.cls == TokenClass::kWord && docpipe::is_modal(docpipe::to_lower(t.text))) return t.offset;
  }
  return std::nullopt;
}

bool usable(const core::Requirement& r) { return r.status != core::ReqStatus::kRejected; }

// Source span still matches the text, so sentence offsets map to the document.
bool verbatim(const core::Requirement& r) { return r.source && r.status != core::ReqStatus::kModified; }

struct KeyedComponent {
  Uid uid;
  std::vector<std::string> words;  // key words, head already normalized
};

struct MentionSpan {
  Uid uid;
  std::size_t first_word = 0;
  std::size_t last_word = 0;  // inclusive
};

std::vector<MentionSpan> find_mentions(const std::vector<const Token*>& words,
                                       const std::vector<KeyedComponent>& components) {
  std::vector<MentionSpan> out;
  std::size_t i = 0;
  while (i < words.size()) {
    const KeyedComponent* best = nullptr;
    for (const auto& c : components) {
      const std::size_t n = c.words.size();
      if (n == 0 || i + n > words.size()) continue;
      if (best && best->words.size() >= n) continue;
      bool ok = true;
      for (std::size_t k = 0; k + 1 < n && ok; ++k) ok = docpipe::to_lower(words[i + k]->text) == c.words[k];
      ok = ok && docpipe::head_key(words[i + n - 1]->text) == c.words[n - 1];
      if (ok) best = &c;
    }
    if (best) {
      out.push_back({best->uid, i, i + best->words.size() - 1});
      i += best->words.size();
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < key.size()) {
    auto sp = key.find(' ', pos);
    if (sp == std::string::npos) sp = key.size();
    if (sp > pos) out.push_back(key.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

}  // namespace

std::string component_key(std::string_view name) {
  const auto tokens = docpipe::tokenize(name);
  const auto words = word_tokens(tokens);
  std::string key;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!key.empty()) key += ' ';
    key += i + 1 == words.size() ? docpipe::head_key(words[i]->text) : docpipe::to_lower(words[i]->text);
  }
  return key;
}

std::vector<ComponentCandidate> identify_components(const std::vector<core::Requirement>& reqs) {
  std::vector<ComponentCandidate> out;
  std::map<std::string, std::size_t> index;
  for (const auto& req : reqs) {
    if (!usable(req)) continue;
    const auto modal = modal_offset(req.text);
    bool subject_taken = false;
    for (const auto& np : docpipe::noun_phrases(req.text)) {
      if (!np.determined || docpipe::is_abstract_head(np)) continue;
      const std::string key = component_key(np.term);
      auto [it, inserted] = index.emplace(key, out.size());
      if (inserted) {
        ComponentCandidate cand;
        cand.component.name = docpipe::display_name(np);
        cand.key = key;
        if (verbatim(req)) {
          const auto base = req.source->span.start;
          cand.first_mention = core::SourceRef{req.source->doc, {base + np.span.start, base + np.span.end}};
        }
        out.push_back(std::move(cand));
      }
      auto& cand = out[it->second];
      if (std::find(cand.requirements.begin(), cand.requirements.end(), req.uid) == cand.requirements.end()) {
        cand.requirements.push_back(req.uid);
      }
      if (!subject_taken && modal && np.span.end <= *modal) {
        subject_taken = true;
        if (std::find(cand.subject_of.begin(), cand.subject_of.end(), req.uid) == cand.subject_of.end()) {
          cand.subject_of.push_back(req.uid);
        }
      }
    }
  }
  return out;
}

std::vector<core::Interaction> infer_interactions(const std::vector<core::Requirement>& reqs,
                                                  const std::vector<core::Component>& components,
                                                  const VerbTable& verbs) {
  std::vector<KeyedComponent> keyed;
  for (const auto& c : components) keyed.push_back({c.uid, split_key(component_key(c.name))});

  std::vector<core::Interaction> out;
  for (const auto& req : reqs) {
    if (!usable(req)) continue;
    const auto tokens = docpipe::tokenize(req.text);
    const auto words = word_tokens(tokens);
    const auto mentions = find_mentions(words, keyed);
    std::vector<Uid> distinct;
    for (const auto& m : mentions) {
      if (std::find(distinct.begin(), distinct.end(), m.uid) == distinct.end()) distinct.push_back(m.uid);
    }
    if (distinct.size() < 2) continue;

    auto inside_mention = [&](std::size_t w) {
      return std::any_of(mentions.begin(), mentions.end(),
                         [&](const MentionSpan& m) { return w >= m.first_word && w <= m.last_word; });
    };
    std::optional<std::size_t> modal_word;
    for (std::size_t w = 0; w < words.size() && !modal_word; ++w) {
      if (docpipe::is_modal(docpipe::to_lower(words[w]->text))) modal_word = w;
    }
    std::optional<std::size_t> verb_word;
    std::optional<VerbRule> rule;
    for (std::size_t w = modal_word.value_or(0); w < words.size() && !verb_word; ++w) {
      if (inside_mention(w)) continue;
      if (auto hit = verbs.match(words[w]->text)) {
        verb_word = w;
        rule = hit->second;
      }
    }
    if (!verb_word) continue;

    // source: agent after "by" following the verb, else the subject before
    // the modal (or verb), else the first mention
    std::optional<Uid> source;
    for (std::size_t w = *verb_word + 1; w < words.size() && !source; ++w) {
      if (docpipe::to_lower(words[w]->text) != "by") continue;
      std::size_t next = w + 1;
      while (next < words.size() && docpipe::is_determiner(docpipe::to_lower(words[next]->text))) ++next;
      for (const auto& m : mentions) {
        if (m.first_word == next) source = m.uid;
      }
    }
    const std::size_t subject_limit = modal_word.value_or(*verb_word);
    for (const auto& m : mentions) {
      if (!source && m.last_word < subject_limit) source = m.uid;
    }
    if (!source) source = distinct.front();

    for (const Uid& other : distinct) {
      if (other == *source) continue;
      core::Interaction i;
      i.a = *source;
      i.b = other;
      i.kind = rule->kind;
      i.directed = rule->directed;
      if (!i.directed && i.b < i.a) std::swap(i.a, i.b);
      i.rationale = {req.uid};
      core::merge_interaction(out, std::move(i));
    }
  }
  return out;
}

SynthesisSummary synthesize(core::Model& model, const VerbTable& verbs) {
  std::vector<core::Requirement> reqs;
  for (const auto& [uid, r] : model.requirements()) reqs.push_back(r);

  SynthesisSummary summary;
  std::map<std::string, Uid> by_key;
  for (const auto& [uid, c] : model.components()) by_key.emplace(component_key(c.name), uid);

  for (auto& cand : identify_components(reqs)) {
    Uid uid;
    if (auto it = by_key.find(cand.key); it != by_key.end()) {
      uid = it->second;
    } else {
      uid = model.add_component(cand.component);
      by_key.emplace(cand.key, uid);
      summary.new_components.push_back(uid);
      if (cand.first_mention) {
        model.bind(uid, core::Modality::kDocument,
                   core::document_locator(cand.first_mention->doc, cand.first_mention->span));
      }
    }
    auto link = [&](core::TraceKind kind, const Uid& req) {
      const core::TraceEdge e{uid, kind, req};
      if (!model.has_trace(e) && !model.flagged_traces().contains(e)) {
        model.add_trace(uid, kind, req);
        ++summary.traces_added;
      }
    };
    for (const auto& r : cand.requirements) link(core::TraceKind::kDerivedFrom, r);
    for (const auto& r : cand.subject_of) link(core::TraceKind::kSatisfies, r);
  }

  std::vector<core::Component> components;
  for (const auto& [uid, c] : model.components()) components.push_back(c);
  for (auto& i : infer_interactions(reqs, components, verbs)) {
    model.add_interaction(std::move(i));
    ++summary.interactions;
  }
  return summary;
}

}  // namespace dthread::synth
