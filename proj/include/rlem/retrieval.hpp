#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlem/memory.hpp"
#include "rlem/types.hpp"

namespace rlem {

/// Symmetric lookup table over pattern labels with unit diagonal and all
/// entries in [0, 1]. Validated on construction with cell-level messages.
class PatternTable {
 public:
  PatternTable() = default;
  PatternTable(std::vector<std::string> patterns,
               std::vector<std::vector<double>> matrix);

  const std::vector<std::string>& patterns() const { return patterns_; }

  /// Matrix entry for two labels; throws std::out_of_range on unknown ones.
  double similarity(std::string_view a, std::string_view b) const;

  bool operator==(const PatternTable&) const = default;

 private:
  std::size_t index_of(std::string_view label) const;

  std::vector<std::string> patterns_;
  std::vector<std::vector<double>> matrix_;
};

/// Pluggable text similarity in [0, 1]; slot for embedding models.
class TextSimilarity {
 public:
  virtual ~TextSimilarity() = default;
  virtual double score(std::string_view a, std::string_view b) const = 0;
};

/// Default adapter: cosine over the sets of lowercased whitespace tokens.
class TokenSetCosine final : public TextSimilarity {
 public:
  double score(std::string_view a, std::string_view b) const override;
};

/// Normalized longest-common-subsequence similarity over element sequences:
/// lcs(a, b) / max(len(a), len(b)). Both empty yields 1, exactly one empty
/// yields 0.
double lcs_similarity(std::span<const std::string> a,
                      std::span<const std::string> b);

enum class SimilarityKind { pattern_table, text_adapter, lcs };

/// How to score (task, observation) pairs. Pointers are non-owning; the
/// profile that built the config keeps the tables and adapter alive.
struct SimilarityConfig {
  double lambda = 0.5;
  bool mask_task = false;         // ablation: drop the task term
  bool mask_observation = false;  // ablation: drop the observation term
  bool exclude_same_task = false;

  SimilarityKind task_kind = SimilarityKind::text_adapter;
  const PatternTable* task_table = nullptr;
  const TextSimilarity* task_text = nullptr;

  SimilarityKind observation_kind = SimilarityKind::lcs;
  const PatternTable* observation_table = nullptr;
  const TextSimilarity* observation_text = nullptr;

  void validate() const;  // throws std::invalid_argument
};

double task_similarity(const SimilarityConfig& config, const TaskInfo& a,
                       const TaskInfo& b);
double observation_similarity(const SimilarityConfig& config,
                              const Observation& a, const Observation& b);

/// lambda * f_g + (1 - lambda) * f_o. A masked component contributes 0 and
/// its weight is not renormalized.
double combined_similarity(const SimilarityConfig& config, const TaskInfo& task_a,
                           const Observation& obs_a, const TaskInfo& task_b,
                           const Observation& obs_b);

struct ScoredRecord {
  ExperienceRecord record;
  double score = 0.0;
};

/// The m highest-scoring records, descending; ties broken by ascending
/// insertion index. Returns fewer than m only when the memory is smaller.
std::vector<ScoredRecord> retrieve_top_m(const ExperienceMemory& memory,
                                         const SimilarityConfig& config,
                                         const TaskInfo& task,
                                         const Observation& observation,
                                         std::size_t m);

/// Ordered first-match classification rules with a default label.
struct PatternRule {
  enum class Kind { prefix, substring, equals };
  Kind kind = Kind::prefix;
  std::string needle;
  std::string label;
};

struct PatternProfile {
  std::vector<std::string> labels;
  std::string default_label;
  std::vector<PatternRule> rules;
  std::optional<PatternTable> table;

  void validate() const;
};

/// First matching rule's label; the profile default when nothing matches.
const std::string& classify_pattern(const PatternProfile& profile,
                                    std::string_view text);

}  // namespace rlem
