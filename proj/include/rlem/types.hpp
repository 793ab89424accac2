#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rlem {

/// Goal handed to the agent. `pattern` is the coarse category label used by
/// the lookup-table similarity.
struct TaskInfo {
  std::string id;
  std::string text;
  std::string pattern;

  friend bool operator==(const TaskInfo&, const TaskInfo&) = default;
};

/// Textual environment state. `elements` is the line decomposition of `text`,
/// kept alongside so sequence similarity does not re-split on every
/// comparison.
struct Observation {
  std::string text;
  std::vector<std::string> elements;
  std::string pattern;

  static Observation from_text(std::string text, std::string pattern = {});

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Action {
  std::string text;

  friend auto operator<=>(const Action&, const Action&) = default;
};

/// Q estimate for one action plus the number of targets averaged into it.
struct ActionValue {
  double q = 0.0;
  int n_updates = 0;
  std::optional<std::string> extra_info;

  friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

/// One memory row: everything known about (task, observation).
struct ExperienceRecord {
  TaskInfo task;
  Observation observation;
  std::map<std::string, ActionValue> actions;  // keyed by action text
  double history_reward = 0.0;                 // reward accumulated before this observation
  std::uint64_t insertion_index = 0;

  /// Highest recorded Q (no zero floor); requires a non-empty action map.
  double max_q() const;
  /// Action text with the highest Q; ties go to the lexicographically first.
  const std::string& argmax_action() const;

  friend bool operator==(const ExperienceRecord&, const ExperienceRecord&) = default;
};

struct Transition {
  Observation observation;
  Action action;
  double reward = 0.0;
  Observation next_observation;
  bool done = false;
};

struct Trajectory {
  TaskInfo task;
  std::vector<Transition> transitions;
  bool succeeded = false;

  double total_reward() const;
  /// Undiscounted reward accumulated strictly before step t.
  double reward_before(std::size_t t) const;
  /// Throws std::invalid_argument if empty or if a done flag appears
  /// anywhere but the last step.
  void validate() const;
};

}  // namespace rlem
