#include "rlem/types.hpp"

#include <sstream>
#include <stdexcept>

namespace rlem {

Observation Observation::from_text(std::string text, std::string pattern) {
  Observation obs;
  obs.text = std::move(text);
  obs.pattern = std::move(pattern);
  std::istringstream in(obs.text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    obs.elements.push_back(line);
  }
  return obs;
}

double ExperienceRecord::max_q() const {
  if (actions.empty())
    throw std::logic_error("max_q on a record with no actions");
  double best = actions.begin()->second.q;
  for (const auto& [text, value] : actions)
    if (value.q > best) best = value.q;
  return best;
}

const std::string& ExperienceRecord::argmax_action() const {
  if (actions.empty())
    throw std::logic_error("argmax_action on a record with no actions");
  auto best = actions.begin();
  for (auto it = actions.begin(); it != actions.end(); ++it)
    if (it->second.q > best->second.q) best = it;
  return best->first;
}

double Trajectory::total_reward() const {
  double sum = 0.0;
  for (const auto& tr : transitions) sum += tr.reward;
  return sum;
}

double Trajectory::reward_before(std::size_t t) const {
  if (t > transitions.size())
    throw std::out_of_range("reward_before: step index out of range");
  double sum = 0.0;
  for (std::size_t i = 0; i < t; ++i) sum += transitions[i].reward;
  return sum;
}

void Trajectory::validate() const {
  if (transitions.empty())
    throw std::invalid_argument("trajectory must contain at least one transition");
  for (std::size_t i = 0; i + 1 < transitions.size(); ++i)
    if (transitions[i].done)
      throw std::invalid_argument(
          "done=true is only allowed at the last transition");
}

}  // namespace rlem
