#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>

#include "rlem/types.hpp"

namespace rlem {

struct MemoryFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discounted return of the trajectory suffix starting at step t
/// (Monte-Carlo target, no bootstrap term).
double full_trajectory_return(const Trajectory& trajectory, std::size_t t,
                              double gamma);

/// Tabular experience store with Q values maintained as exact running means
/// of the targets applied to each (task, observation, action) key.
///
/// Concurrency: single writer, multiple readers. Reads take a shared lock,
/// upserts an exclusive one. Read callbacks must not call back into upsert.
class ExperienceMemory {
 public:
  explicit ExperienceMemory(double gamma = 1.0, bool double_q = false);

  ExperienceMemory(const ExperienceMemory& other);
  ExperienceMemory& operator=(const ExperienceMemory& other);

  double gamma() const { return gamma_; }
  bool double_q() const { return double_q_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  /// Max over {0} and every recorded Q at (task, observation); 0 when the
  /// record is absent. Double-Q memories expose the published (two-table
  /// mean) values here.
  double max_recorded_q(const TaskInfo& task, const Observation& obs) const;

  /// One-step target: r + gamma * max_recorded_q at the next observation;
  /// the bootstrap term is 0 on terminal transitions.
  double one_step_target(const TaskInfo& task, const Transition& tr) const;

  /// n-step target: discounted rewards from step t plus a bootstrapped tail.
  /// If the trajectory ends before t+n the sum truncates at the terminal
  /// step and the bootstrap term is dropped.
  double n_step_target(const Trajectory& trajectory, std::size_t t, int n) const;

  /// Full-trajectory Monte-Carlo target using this memory's gamma.
  double full_trajectory_target(const Trajectory& trajectory, std::size_t t) const;

  /// Inserts or running-mean-updates one action value. A new record's
  /// history_reward is fixed at first insertion and never rewritten.
  /// Rejects non-finite targets.
  ActionValue upsert(const TaskInfo& task, const Observation& obs,
                     const Action& action, double target, double history_reward,
                     std::optional<std::string> extra_info = std::nullopt);

  /// Double-Q update: a coin flip picks the table to update; its bootstrap
  /// value is read from the other table at the updated table's argmax
  /// action. Returns the published (mean-of-tables) value. Throws
  /// std::logic_error on a single-table memory.
  ActionValue double_q_upsert(const TaskInfo& task, const Observation& obs,
                              const Action& action, double reward,
                              const Observation& next_obs, bool done,
                              double history_reward, std::mt19937_64& rng);

  /// Mean over all records of (history_reward + max recorded Q). Throws
  /// std::runtime_error on an empty memory.
  double average_reward_estimation() const;

  /// Iterates records in key order. Double-Q memories yield merged records
  /// carrying published values (per-action mean of the two tables, with a
  /// missing side counted as 0).
  void for_each(const std::function<void(const ExperienceRecord&)>& fn) const;

  /// Published record at (task, observation), if any.
  std::optional<ExperienceRecord> find(const TaskInfo& task,
                                       const Observation& obs) const;

  /// Published value of one action, if recorded.
  std::optional<ActionValue> find_action(const TaskInfo& task,
                                         const Observation& obs,
                                         const Action& action) const;

  /// JSON Lines: a version header followed by one record per line, actions
  /// sorted by text. load(save(m)) reproduces m exactly.
  void save(const std::filesystem::path& path) const;
  static ExperienceMemory load(const std::filesystem::path& path);

  bool operator==(const ExperienceMemory& other) const;

 private:
  struct Key {
    std::string task_id;
    std::string observation_text;
    friend auto operator<=>(const Key&, const Key&) = default;
  };
  using RecordMap = std::map<Key, ExperienceRecord>;

  static Key key_of(const TaskInfo& task, const Observation& obs) {
    return Key{task.id, obs.text};
  }

  ActionValue upsert_into(RecordMap& table, const TaskInfo& task,
                          const Observation& obs, const Action& action,
                          double target, double history_reward,
                          std::optional<std::string> extra_info);

  ExperienceRecord published(const ExperienceRecord* main,
                             const ExperienceRecord* shadow) const;
  std::optional<ExperienceRecord> published_at(const Key& key) const;
  double max_recorded_q_unlocked(const TaskInfo& task,
                                 const Observation& obs) const;

  double gamma_ = 1.0;
  bool double_q_ = false;
  RecordMap records_;
  RecordMap shadow_;  // populated only when double_q_
  std::uint64_t next_index_ = 0;
  mutable std::shared_mutex mutex_;
};

}  // namespace rlem
