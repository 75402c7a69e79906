#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dthread/core/model.hpp"
#include "dthread/synth/edit.hpp"

namespace dthread::synth {

/// Marks a non-edit workflow stage (ingest, extract, synthesize, link,
/// import). The model right after it becomes the replay snapshot.
struct Checkpoint {
  std::string stage;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

using JournalEntry = std::variant<Checkpoint, RefinementEdit>;

struct Journal {
  std::vector<JournalEntry> entries;
  core::Model snapshot;  // model at the last checkpoint
  friend bool operator==(const Journal&, const Journal&) = default;

  /// Edits recorded after the last checkpoint.
  std::vector<RefinementEdit> pending_edits() const;
};

/// Snapshot plus every edit after it.
core::Model replay(const Journal& journal);

/// Model and journal kept in step: every mutation goes through here.
class Project {
 public:
  Project() = default;
  Project(core::Model model, Journal journal) : model_(std::move(model)), journal_(std::move(journal)) {}

  const core::Model& model() const { return model_; }
  const Journal& journal() const { return journal_; }

  /// Applies and journals one edit; nothing changes if it throws.
  void apply(const RefinementEdit& edit);

  /// Runs `stage_fn` on a copy of the model and, if it succeeds, commits the
  /// result and records a checkpoint.
  template <typename Fn>
  auto run_stage(std::string stage, Fn&& stage_fn) {
    core::Model next = model_;
    if constexpr (std::is_void_v<decltype(stage_fn(next))>) {
      stage_fn(next);
      commit_stage(std::move(stage), std::move(next));
    } else {
      auto result = stage_fn(next);
      commit_stage(std::move(stage), std::move(next));
      return result;
    }
  }

  friend bool operator==(const Project&, const Project&) = default;

 private:
  void commit_stage(std::string stage, core::Model next);

  core::Model model_;
  Journal journal_;
};

}  // namespace dthread::synth
