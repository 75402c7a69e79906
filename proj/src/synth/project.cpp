#include "dthread/synth/project.hpp"

namespace dthread::synth {

std::vector<RefinementEdit> Journal::pending_edits() const {
  std::vector<RefinementEdit> out;
  for (const auto& entry : entries) {
    if (std::holds_alternative<Checkpoint>(entry)) {
      out.clear();
    } else {
      out.push_back(std::get<RefinementEdit>(entry));
    }
  }
  return out;
}

core::Model replay(const Journal& journal) {
  core::Model m = journal.snapshot;
  for (const auto& edit : journal.pending_edits()) apply_edit_in_place(m, edit);
  return m;
}

void Project::apply(const RefinementEdit& edit) {
  apply_edit_in_place(model_, edit);
  journal_.entries.emplace_back(edit);
}

void Project::commit_stage(std::string stage, core::Model next) {
  model_ = std::move(next);
  journal_.snapshot = model_;
  journal_.entries.emplace_back(Checkpoint{std::move(stage)});
}

}  // namespace dthread::synth
