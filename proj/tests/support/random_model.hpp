#pragma once

// Random projects built only through public operations, so every result is
// a state the tools can actually reach.

#include <random>
#include <string>
#include <vector>

#include "dthread/core/error.hpp"
#include "dthread/docpipe/document.hpp"
#include "dthread/docpipe/extract.hpp"
#include "dthread/synth/edit.hpp"
#include "dthread/synth/identify.hpp"
#include "dthread/synth/project.hpp"

namespace dthread::testing {

inline synth::Project random_project(std::mt19937_64& rng, int max_components = 20) {
  using namespace core;
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  static const std::vector<std::string> nouns = {"pump",  "valve", "sensor", "motor",  "battery", "radio",
                                                 "frame", "panel", "camera", "heater", "antenna", "tank"};
  static const std::vector<std::string> verbs = {"power", "send", "feed", "support", "command", "house"};
  static const std::vector<std::string> units = {"kg", "g", "W", "mW", "V", "mm", "m", "s"};
  static const std::vector<std::string> attrs = {"mass", "mass", "power", "voltage", "length", "period"};

  synth::Project p;
  std::int64_t clock = 1'700'000'000;
  auto edit = [&](synth::EditPayload payload) { p.apply({std::move(payload), "gen", clock++}); };

  if (rng() % 4 != 0) {
    std::string text;
    const std::size_t sentences = 1 + pick(6);
    for (std::size_t s = 0; s < sentences; ++s) {
      text += "The " + nouns[pick(nouns.size())] + " shall " + verbs[pick(verbs.size())] + " the " +
              nouns[pick(nouns.size())] + ". ";
    }
    p.run_stage("ingest", [&](Model& m) {
      docpipe::ingest_document(m, "doc " + std::to_string(rng() % 100), text, DocFormat::kPlainText);
    });
    p.run_stage("extract", [&](Model& m) {
      docpipe::BaselineAdapter base;
      const auto docs = m.documents();
      for (const auto& [uid, d] : docs) {
        docpipe::extract_requirements(m, docpipe::annotate_candidates(d, base));
      }
    });
    p.run_stage("synthesize", [&](Model& m) { synth::synthesize(m, synth::VerbTable::defaults()); });
  }

  const int extra = static_cast<int>(pick(static_cast<std::size_t>(max_components) + 1));
  for (int i = 0; i < extra && static_cast<int>(p.model().components().size()) < max_components; ++i) {
    std::optional<Uid> parent;
    if (!p.model().components().empty() && rng() % 3 == 0) {
      auto it = p.model().components().begin();
      std::advance(it, static_cast<long>(pick(p.model().components().size())));
      parent = it->first;
    }
    std::set<std::string> tags;
    if (rng() % 2) tags.insert(rng() % 2 ? "electronics" : "structure");
    try {
      edit(synth::op::AddComponent{"part " + std::to_string(rng() % 1000), parent, tags});
    } catch (const Error&) {
    }
  }
  std::vector<Uid> comps;
  for (const auto& [uid, _] : p.model().components()) comps.push_back(uid);
  std::vector<Uid> reqs;
  for (const auto& [uid, _] : p.model().requirements()) reqs.push_back(uid);

  for (const auto& c : comps) {
    if (rng() % 2) {
      const std::string name = attrs[pick(attrs.size())];
      const std::string unit = name == "mass" ? (rng() % 2 ? "kg" : "g")
                               : name == "power" ? "W"
                               : name == "voltage" ? "V"
                               : name == "length" ? "mm"
                                                  : "s";
      edit(synth::op::SetAttribute{
          c, name, Quantity{Decimal::from_raw(static_cast<std::int64_t>(rng() % 5'000'000'000ULL)), unit}});
    }
  }
  if (comps.size() >= 2) {
    const std::size_t cells = pick(comps.size() * 2 + 1);
    for (std::size_t i = 0; i < cells; ++i) {
      const Uid a = comps[pick(comps.size())], b = comps[pick(comps.size())];
      if (a == b) continue;
      std::vector<Uid> rationale;
      if (!reqs.empty() && rng() % 2) rationale.push_back(reqs[pick(reqs.size())]);
      try {
        edit(synth::op::SetCell{b, a, static_cast<InteractionKind>(pick(4)), rationale});
      } catch (const Error&) {
      }
    }
  }
  for (const auto& r : reqs) {
    switch (rng() % 4) {
      case 0: edit(synth::op::AcceptRequirement{r}); break;
      case 1: edit(synth::op::RejectRequirement{r}); break;
      case 2: edit(synth::op::EditRequirementText{r, "Edited \"text\" \xC3\xA9 " + std::to_string(rng() % 10)}); break;
      default: break;
    }
  }
  if (rng() % 3 == 0) edit(synth::op::AddConstraint{"sum(*, mass) <= 4 kg", std::nullopt});
  if (!comps.empty() && rng() % 3 == 0) {
    StateMachineDef sm;
    sm.owner = comps[pick(comps.size())];
    sm.name = "mode";
    sm.states = {"Off", "On"};
    sm.initial = "Off";
    sm.variables = {{"n", 0, 0, 3}};
    sm.transitions = {{"Off", "start", "n < 3", {{"n", "n + 1"}}, "On"}, {"On", "stop", "", {}, "Off"}};
    sm.invariants = {{"*", "n <= 3"}};
    edit(synth::op::AddStateMachine{sm});
  }
  if (comps.size() > 2 && rng() % 3 == 0) {
    try {
      edit(synth::op::RemoveComponent{comps.back()});
    } catch (const Error&) {
    }
  }
  return p;
}

}  // namespace dthread::testing
