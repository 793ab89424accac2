#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "rlem/retrieval.hpp"

namespace rlem {

/// Input-block section titles; overridable per domain so page text never
/// collides with a title at column zero.
struct PromptTitles {
  std::string task = "Task:";
  std::string observation = "Observation:";
  std::string recent_actions = "Recent actions:";
  std::string last_reward = "Last reward:";
  std::string available_actions = "Available actions:";
};

/// Everything domain-specific the agent machinery needs, loaded from a TOML
/// profile file: pattern sets with lookup tables and classification rules,
/// the similarity composition, prompt preamble and titles, and the safe
/// fallback action.
class DomainProfile {
 public:
  static DomainProfile load(const std::filesystem::path& path);

  std::string name;
  std::string preamble;
  std::string safe_action = "look";
  int feedback_window = 5;
  double success_min_final_reward = 1.0;
  double lambda = 0.5;

  SimilarityKind task_similarity_kind = SimilarityKind::text_adapter;
  SimilarityKind observation_similarity_kind = SimilarityKind::lcs;

  PatternProfile task_patterns;
  PatternProfile observation_patterns;
  PromptTitles titles;

  /// Wires a SimilarityConfig to this profile's tables and text adapter.
  /// The profile must outlive the returned config.
  SimilarityConfig similarity_config() const;

  const TextSimilarity& text_adapter() const { return *text_adapter_; }

 private:
  std::shared_ptr<TextSimilarity> text_adapter_ =
      std::make_shared<TokenSetCosine>();
};

}  // namespace rlem
