#include "rlem/profile.hpp"

#include <stdexcept>

#include "rlem/toml.hpp"

namespace rlem {
namespace {

SimilarityKind parse_kind(const std::string& name, bool for_task) {
  if (name == "pattern_table") return SimilarityKind::pattern_table;
  if (name == "text") return SimilarityKind::text_adapter;
  if (name == "lcs" && !for_task) return SimilarityKind::lcs;
  throw std::invalid_argument("unknown similarity kind '" + name + "'");
}

PatternRule::Kind parse_rule_kind(const std::string& name) {
  if (name == "prefix") return PatternRule::Kind::prefix;
  if (name == "substring") return PatternRule::Kind::substring;
  if (name == "equals") return PatternRule::Kind::equals;
  throw std::invalid_argument("unknown rule kind '" + name + "'");
}

PatternProfile parse_patterns(const toml::Value& section, bool need_table) {
  PatternProfile profile;
  for (const auto& label : section.at("labels").as_array())
    profile.labels.push_back(label.as_string());
  profile.default_label = section.at("default").as_string();

  if (section.contains("rules")) {
    for (const auto& rule : section.at("rules").as_array()) {
      profile.rules.push_back(PatternRule{
          parse_rule_kind(rule.at("kind").as_string()),
          rule.at("needle").as_string(), rule.at("label").as_string()});
    }
  }
  if (section.contains("matrix")) {
    std::vector<std::vector<double>> matrix;
    for (const auto& row : section.at("matrix").as_array()) {
      std::vector<double> cells;
      for (const auto& cell : row.as_array()) cells.push_back(cell.as_float());
      matrix.push_back(std::move(cells));
    }
    profile.table = PatternTable(profile.labels, std::move(matrix));
  } else if (need_table) {
    throw std::invalid_argument(
        "pattern-table similarity requested but no matrix is defined");
  }
  profile.validate();
  return profile;
}

}  // namespace

DomainProfile DomainProfile::load(const std::filesystem::path& path) {
  auto root = toml::parse_file(path);
  DomainProfile profile;
  try {
    profile.name = root.at("name").as_string();
    profile.preamble = root.get_string("preamble");
    profile.safe_action = root.get_string("safe_action", "look");
    profile.feedback_window =
        static_cast<int>(root.get_integer("feedback_window", 5));
    profile.success_min_final_reward =
        root.get_float("success_min_final_reward", 1.0);

    const auto& similarity = root.at("similarity");
    profile.lambda = similarity.get_float("lambda", 0.5);
    profile.task_similarity_kind =
        parse_kind(similarity.get_string("task", "text"), true);
    profile.observation_similarity_kind =
        parse_kind(similarity.get_string("observation", "lcs"), false);

    profile.task_patterns = parse_patterns(
        root.at("task_patterns"),
        profile.task_similarity_kind == SimilarityKind::pattern_table);
    profile.observation_patterns = parse_patterns(
        root.at("observation_patterns"),
        profile.observation_similarity_kind == SimilarityKind::pattern_table);

    if (root.contains("prompt")) {
      const auto& prompt = root.at("prompt");
      auto& t = profile.titles;
      t.task = prompt.get_string("task_title", t.task);
      t.observation = prompt.get_string("observation_title", t.observation);
      t.recent_actions =
          prompt.get_string("recent_actions_title", t.recent_actions);
      t.last_reward = prompt.get_string("last_reward_title", t.last_reward);
      t.available_actions =
          prompt.get_string("available_actions_title", t.available_actions);
    }
  } catch (const std::exception& e) {
    throw std::invalid_argument("profile " + path.string() + ": " + e.what());
  }
  return profile;
}

SimilarityConfig DomainProfile::similarity_config() const {
  SimilarityConfig config;
  config.lambda = lambda;
  config.task_kind = task_similarity_kind;
  config.observation_kind = observation_similarity_kind;
  if (task_similarity_kind == SimilarityKind::pattern_table)
    config.task_table = &*task_patterns.table;
  else
    config.task_text = text_adapter_.get();
  if (observation_similarity_kind == SimilarityKind::pattern_table)
    config.observation_table = &*observation_patterns.table;
  else if (observation_similarity_kind == SimilarityKind::text_adapter)
    config.observation_text = text_adapter_.get();
  config.validate();
  return config;
}

}  // namespace rlem
