#include "rlem/memory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "json.hpp"

namespace rlem {

using nlohmann::json;

double full_trajectory_return(const Trajectory& trajectory, std::size_t t,
                              double gamma) {
  const auto& steps = trajectory.transitions;
  if (t >= steps.size())
    throw std::out_of_range("full_trajectory_return: step index out of range");
  double sum = 0.0;
  double scale = 1.0;
  for (std::size_t i = t; i < steps.size(); ++i) {
    sum += scale * steps[i].reward;
    scale *= gamma;
  }
  return sum;
}

ExperienceMemory::ExperienceMemory(double gamma, bool double_q)
    : gamma_(gamma), double_q_(double_q) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw std::invalid_argument("gamma must lie in (0, 1]");
}

ExperienceMemory::ExperienceMemory(const ExperienceMemory& other) {
  std::shared_lock lock(other.mutex_);
  gamma_ = other.gamma_;
  double_q_ = other.double_q_;
  records_ = other.records_;
  shadow_ = other.shadow_;
  next_index_ = other.next_index_;
}

ExperienceMemory& ExperienceMemory::operator=(const ExperienceMemory& other) {
  if (this == &other) return *this;
  ExperienceMemory copy(other);
  std::unique_lock lock(mutex_);
  gamma_ = copy.gamma_;
  double_q_ = copy.double_q_;
  records_ = std::move(copy.records_);
  shadow_ = std::move(copy.shadow_);
  next_index_ = copy.next_index_;
  return *this;
}

std::size_t ExperienceMemory::size() const {
  std::shared_lock lock(mutex_);
  if (!double_q_) return records_.size();
  std::size_t n = records_.size();
  for (const auto& [key, rec] : shadow_)
    if (!records_.count(key)) ++n;
  return n;
}

ExperienceRecord ExperienceMemory::published(
    const ExperienceRecord* main, const ExperienceRecord* shadow) const {
  if (!double_q_) return *main;
  if (!main || !shadow) {
    // Only one table holds the record; the missing side contributes 0.
    ExperienceRecord out = main ? *main : *shadow;
    for (auto& [text, value] : out.actions) value.q /= 2.0;
    return out;
  }
  ExperienceRecord out = *main;
  out.insertion_index = std::min(main->insertion_index, shadow->insertion_index);
  for (auto& [text, value] : out.actions) {
    auto it = shadow->actions.find(text);
    double other_q = it == shadow->actions.end() ? 0.0 : it->second.q;
    value.q = (value.q + other_q) / 2.0;
    if (it != shadow->actions.end()) {
      value.n_updates += it->second.n_updates;
      if (!value.extra_info) value.extra_info = it->second.extra_info;
    }
  }
  for (const auto& [text, value] : shadow->actions) {
    if (out.actions.count(text)) continue;
    ActionValue merged = value;
    merged.q /= 2.0;
    out.actions.emplace(text, std::move(merged));
  }
  return out;
}

std::optional<ExperienceRecord> ExperienceMemory::published_at(
    const Key& key) const {
  auto mit = records_.find(key);
  const ExperienceRecord* main = mit == records_.end() ? nullptr : &mit->second;
  const ExperienceRecord* shadow = nullptr;
  if (double_q_) {
    auto sit = shadow_.find(key);
    if (sit != shadow_.end()) shadow = &sit->second;
  }
  if (!main && !shadow) return std::nullopt;
  return published(main, shadow);
}

double ExperienceMemory::max_recorded_q_unlocked(const TaskInfo& task,
                                                 const Observation& obs) const {
  auto rec = published_at(key_of(task, obs));
  double best = 0.0;  // unrecorded actions are valued 0
  if (rec)
    for (const auto& [text, value] : rec->actions) best = std::max(best, value.q);
  return best;
}

double ExperienceMemory::max_recorded_q(const TaskInfo& task,
                                        const Observation& obs) const {
  std::shared_lock lock(mutex_);
  return max_recorded_q_unlocked(task, obs);
}

double ExperienceMemory::one_step_target(const TaskInfo& task,
                                         const Transition& tr) const {
  std::shared_lock lock(mutex_);
  double sum = tr.reward;
  if (!tr.done)
    sum += gamma_ * max_recorded_q_unlocked(task, tr.next_observation);
  return sum;
}

double ExperienceMemory::n_step_target(const Trajectory& trajectory,
                                       std::size_t t, int n) const {
  const auto& steps = trajectory.transitions;
  if (t >= steps.size())
    throw std::out_of_range("n_step_target: step index out of range");
  if (n < 1) throw std::invalid_argument("n_step_target: n must be >= 1");

  std::shared_lock lock(mutex_);
  const std::size_t take = std::min<std::size_t>(n, steps.size() - t);
  double sum = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < take; ++i) {
    sum += scale * steps[t + i].reward;
    scale *= gamma_;
  }
  if (take == static_cast<std::size_t>(n)) {
    const Transition& last = steps[t + take - 1];
    if (!last.done)
      sum += scale *
             max_recorded_q_unlocked(trajectory.task, last.next_observation);
  }
  return sum;
}

double ExperienceMemory::full_trajectory_target(const Trajectory& trajectory,
                                                std::size_t t) const {
  return full_trajectory_return(trajectory, t, gamma_);
}

ActionValue ExperienceMemory::upsert_into(RecordMap& table, const TaskInfo& task,
                                          const Observation& obs,
                                          const Action& action, double target,
                                          double history_reward,
                                          std::optional<std::string> extra_info) {
  if (!std::isfinite(target))
    throw std::invalid_argument("upsert: non-finite Q target rejected");
  auto key = key_of(task, obs);
  auto it = table.find(key);
  if (it == table.end()) {
    ExperienceRecord rec;
    rec.task = task;
    rec.observation = obs;
    rec.history_reward = std::max(0.0, history_reward);
    rec.insertion_index = next_index_++;
    it = table.emplace(std::move(key), std::move(rec)).first;
  }
  ActionValue& value = it->second.actions[action.text];
  if (value.n_updates == 0) {
    value.q = target;
    value.n_updates = 1;
  } else {
    // Running mean: equivalent to alpha = 1/N with N counted post-update.
    value.n_updates += 1;
    value.q += (target - value.q) / value.n_updates;
  }
  if (extra_info) value.extra_info = std::move(extra_info);
  return value;
}

ActionValue ExperienceMemory::upsert(const TaskInfo& task, const Observation& obs,
                                     const Action& action, double target,
                                     double history_reward,
                                     std::optional<std::string> extra_info) {
  std::unique_lock lock(mutex_);
  return upsert_into(records_, task, obs, action, target, history_reward,
                     std::move(extra_info));
}

ActionValue ExperienceMemory::double_q_upsert(const TaskInfo& task,
                                              const Observation& obs,
                                              const Action& action, double reward,
                                              const Observation& next_obs,
                                              bool done, double history_reward,
                                              std::mt19937_64& rng) {
  if (!double_q_)
    throw std::logic_error("double_q_upsert called on a single-table memory");
  std::unique_lock lock(mutex_);
  const bool update_main = (rng() & 1ull) == 0;
  RecordMap& update_table = update_main ? records_ : shadow_;
  RecordMap& other_table = update_main ? shadow_ : records_;

  double bootstrap = 0.0;
  if (!done) {
    auto it = update_table.find(key_of(task, next_obs));
    if (it != update_table.end() && !it->second.actions.empty()) {
      // Select the argmax in the updated table (unrecorded actions count as
      // 0), then evaluate it with the other table.
      const std::string& best = it->second.argmax_action();
      if (it->second.actions.at(best).q > 0.0) {
        auto oit = other_table.find(key_of(task, next_obs));
        if (oit != other_table.end()) {
          auto ait = oit->second.actions.find(best);
          if (ait != oit->second.actions.end()) bootstrap = ait->second.q;
        }
      }
    }
  }
  const double target = reward + gamma_ * bootstrap;
  upsert_into(update_table, task, obs, action, target, history_reward,
              std::nullopt);

  auto rec = published_at(key_of(task, obs));
  return rec->actions.at(action.text);
}

double ExperienceMemory::average_reward_estimation() const {
  std::shared_lock lock(mutex_);
  double sum = 0.0;
  std::size_t count = 0;
  auto add = [&](const Key& key) {
    auto rec = published_at(key);
    sum += rec->history_reward + rec->max_q();
    ++count;
  };
  for (const auto& [key, rec] : records_) add(key);
  if (double_q_)
    for (const auto& [key, rec] : shadow_)
      if (!records_.count(key)) add(key);
  if (count == 0)
    throw std::runtime_error("average_reward_estimation: empty memory");
  return sum / static_cast<double>(count);
}

void ExperienceMemory::for_each(
    const std::function<void(const ExperienceRecord&)>& fn) const {
  std::shared_lock lock(mutex_);
  if (!double_q_) {
    for (const auto& [key, rec] : records_) fn(rec);
    return;
  }
  auto mit = records_.begin();
  auto sit = shadow_.begin();
  while (mit != records_.end() || sit != shadow_.end()) {
    if (sit == shadow_.end() || (mit != records_.end() && mit->first < sit->first)) {
      fn(published(&mit->second, nullptr));
      ++mit;
    } else if (mit == records_.end() || sit->first < mit->first) {
      fn(published(nullptr, &sit->second));
      ++sit;
    } else {
      fn(published(&mit->second, &sit->second));
      ++mit;
      ++sit;
    }
  }
}

std::optional<ExperienceRecord> ExperienceMemory::find(
    const TaskInfo& task, const Observation& obs) const {
  std::shared_lock lock(mutex_);
  return published_at(key_of(task, obs));
}

std::optional<ActionValue> ExperienceMemory::find_action(
    const TaskInfo& task, const Observation& obs, const Action& action) const {
  std::shared_lock lock(mutex_);
  auto rec = published_at(key_of(task, obs));
  if (!rec) return std::nullopt;
  auto it = rec->actions.find(action.text);
  if (it == rec->actions.end()) return std::nullopt;
  return it->second;
}

namespace {

json record_to_json(const ExperienceRecord& rec, const char* table_tag) {
  json actions = json::array();
  for (const auto& [text, value] : rec.actions) {  // map order = sorted by text
    json a{{"action", text}, {"q", value.q}, {"n_updates", value.n_updates}};
    if (value.extra_info) a["extra_info"] = *value.extra_info;
    actions.push_back(std::move(a));
  }
  json j{{"task",
          {{"id", rec.task.id}, {"text", rec.task.text}, {"pattern", rec.task.pattern}}},
         {"observation",
          {{"text", rec.observation.text},
           {"elements", rec.observation.elements},
           {"pattern", rec.observation.pattern}}},
         {"actions", std::move(actions)},
         {"history_reward", rec.history_reward},
         {"insertion_index", rec.insertion_index}};
  if (table_tag) j["table"] = table_tag;
  return j;
}

ExperienceRecord record_from_json(const json& j) {
  ExperienceRecord rec;
  rec.task.id = j.at("task").at("id").get<std::string>();
  rec.task.text = j.at("task").at("text").get<std::string>();
  rec.task.pattern = j.at("task").at("pattern").get<std::string>();
  rec.observation.text = j.at("observation").at("text").get<std::string>();
  rec.observation.elements =
      j.at("observation").at("elements").get<std::vector<std::string>>();
  rec.observation.pattern = j.at("observation").at("pattern").get<std::string>();
  rec.history_reward = j.at("history_reward").get<double>();
  rec.insertion_index = j.at("insertion_index").get<std::uint64_t>();
  for (const auto& a : j.at("actions")) {
    ActionValue value;
    value.q = a.at("q").get<double>();
    value.n_updates = a.at("n_updates").get<int>();
    if (a.contains("extra_info"))
      value.extra_info = a.at("extra_info").get<std::string>();
    if (value.n_updates < 1)
      throw MemoryFormatError("action with n_updates < 1");
    rec.actions.emplace(a.at("action").get<std::string>(), std::move(value));
  }
  if (rec.actions.empty()) throw MemoryFormatError("record with no actions");
  return rec;
}

}  // namespace

void ExperienceMemory::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  std::ofstream out(path);
  if (!out)
    throw MemoryFormatError("cannot open " + path.string() + " for writing");
  out << json{{"version", 1}, {"gamma", gamma_}, {"double_q", double_q_}}.dump()
      << '\n';
  for (const auto& [key, rec] : records_)
    out << record_to_json(rec, double_q_ ? "main" : nullptr).dump() << '\n';
  if (double_q_)
    for (const auto& [key, rec] : shadow_)
      out << record_to_json(rec, "shadow").dump() << '\n';
  if (!out) throw MemoryFormatError("write failure on " + path.string());
}

ExperienceMemory ExperienceMemory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MemoryFormatError("cannot open " + path.string());

  std::string line;
  int line_no = 0;
  // Header.
  json header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!std::string_view(line).empty() &&
        line.find_first_not_of(" \t\r") != std::string::npos) {
      try {
        header = json::parse(line);
      } catch (const json::exception& e) {
        throw MemoryFormatError(path.string() + ":" + std::to_string(line_no) +
                                ": malformed header: " + e.what());
      }
      break;
    }
  }
  if (header.is_null()) throw MemoryFormatError("empty memory file");
  if (!header.contains("version") || !header.at("version").is_number_integer())
    throw MemoryFormatError("memory file header is missing a version tag");
  if (header.at("version").get<int>() != 1)
    throw MemoryFormatError(
        "memory file version mismatch: expected 1, found " +
        header.at("version").dump());

  ExperienceMemory memory(header.at("gamma").get<double>(),
                          header.at("double_q").get<bool>());
  std::uint64_t max_index = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ExperienceRecord rec;
    bool shadow = false;
    try {
      json j = json::parse(line);
      rec = record_from_json(j);
      shadow = j.value("table", "main") == std::string("shadow");
      if (shadow && !memory.double_q_)
        throw MemoryFormatError("shadow record in a single-table memory file");
    } catch (const MemoryFormatError& e) {
      throw MemoryFormatError(path.string() + ":" + std::to_string(line_no) +
                              ": " + e.what());
    } catch (const json::exception& e) {
      throw MemoryFormatError(path.string() + ":" + std::to_string(line_no) +
                              ": malformed record: " + e.what());
    }
    max_index = std::max(max_index, rec.insertion_index);
    any = true;
    Key key{rec.task.id, rec.observation.text};
    RecordMap& table = shadow ? memory.shadow_ : memory.records_;
    if (!table.emplace(std::move(key), std::move(rec)).second)
      throw MemoryFormatError(path.string() + ":" + std::to_string(line_no) +
                              ": duplicate record key");
  }
  memory.next_index_ = any ? max_index + 1 : 0;
  return memory;
}

bool ExperienceMemory::operator==(const ExperienceMemory& other) const {
  std::shared_lock lock(mutex_, std::defer_lock);
  std::shared_lock other_lock(other.mutex_, std::defer_lock);
  if (this != &other) {
    lock.lock();
    other_lock.lock();
  }
  return gamma_ == other.gamma_ && double_q_ == other.double_q_ &&
         records_ == other.records_ && shadow_ == other.shadow_ &&
         next_index_ == other.next_index_;
}

}  // namespace rlem
