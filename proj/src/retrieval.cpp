#include "rlem/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

namespace rlem {

PatternTable::PatternTable(std::vector<std::string> patterns,
                           std::vector<std::vector<double>> matrix)
    : patterns_(std::move(patterns)), matrix_(std::move(matrix)) {
  const std::size_t n = patterns_.size();
  if (n == 0) throw std::invalid_argument("pattern table needs at least one label");
  if (matrix_.size() != n)
    throw std::invalid_argument("pattern table matrix must have " +
                                std::to_string(n) + " rows, found " +
                                std::to_string(matrix_.size()));
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix_[i].size() != n)
      throw std::invalid_argument("pattern table row " + std::to_string(i) +
                                  " must have " + std::to_string(n) +
                                  " entries, found " +
                                  std::to_string(matrix_[i].size()));
    for (std::size_t j = 0; j < n; ++j) {
      const double v = matrix_[i][j];
      auto cell = [&] {
        return "(" + patterns_[i] + ", " + patterns_[j] + ")";
      };
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("pattern table cell " + cell() +
                                    " outside [0, 1]: " + std::to_string(v));
      if (i == j && v != 1.0)
        throw std::invalid_argument("pattern table diagonal " + cell() +
                                    " must be 1, found " + std::to_string(v));
      if (j < i && matrix_[j][i] != v)
        throw std::invalid_argument("pattern table asymmetric at " + cell());
    }
  }
}

std::size_t PatternTable::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < patterns_.size(); ++i)
    if (patterns_[i] == label) return i;
  throw std::out_of_range("unknown pattern label '" + std::string(label) + "'");
}

double PatternTable::similarity(std::string_view a, std::string_view b) const {
  return matrix_[index_of(a)][index_of(b)];
}

double TokenSetCosine::score(std::string_view a, std::string_view b) const {
  auto tokens = [](std::string_view text) {
    std::set<std::string> out;
    std::string current;
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!current.empty()) out.insert(std::move(current));
        current.clear();
      } else {
        current.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    if (!current.empty()) out.insert(std::move(current));
    return out;
  };
  auto ta = tokens(a);
  auto tb = tokens(b);
  if (ta.empty() && tb.empty()) return 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : ta) shared += tb.count(t);
  return static_cast<double>(shared) /
         std::sqrt(static_cast<double>(ta.size()) * static_cast<double>(tb.size()));
}

double lcs_similarity(std::span<const std::string> a,
                      std::span<const std::string> b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  // Rolling-row LCS.
  std::vector<std::size_t> prev(b.size() + 1, 0), curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        curr[j] = prev[j - 1] + 1;
      else
        curr[j] = std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return static_cast<double>(prev[b.size()]) /
         static_cast<double>(std::max(a.size(), b.size()));
}

void SimilarityConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must lie in [0, 1]");
  if (mask_task && mask_observation)
    throw std::invalid_argument("cannot mask both similarity components");
  if (!mask_task) {
    if (task_kind == SimilarityKind::pattern_table && !task_table)
      throw std::invalid_argument("task similarity needs a pattern table");
    if (task_kind == SimilarityKind::text_adapter && !task_text)
      throw std::invalid_argument("task similarity needs a text adapter");
    if (task_kind == SimilarityKind::lcs)
      throw std::invalid_argument("lcs task similarity is not supported");
  }
  if (!mask_observation) {
    if (observation_kind == SimilarityKind::pattern_table && !observation_table)
      throw std::invalid_argument("observation similarity needs a pattern table");
    if (observation_kind == SimilarityKind::text_adapter && !observation_text)
      throw std::invalid_argument("observation similarity needs a text adapter");
  }
}

double task_similarity(const SimilarityConfig& config, const TaskInfo& a,
                       const TaskInfo& b) {
  switch (config.task_kind) {
    case SimilarityKind::pattern_table:
      return config.task_table->similarity(a.pattern, b.pattern);
    case SimilarityKind::text_adapter:
      return config.task_text->score(a.text, b.text);
    case SimilarityKind::lcs:
      break;
  }
  throw std::invalid_argument("lcs task similarity is not supported");
}

double observation_similarity(const SimilarityConfig& config,
                              const Observation& a, const Observation& b) {
  switch (config.observation_kind) {
    case SimilarityKind::pattern_table:
      return config.observation_table->similarity(a.pattern, b.pattern);
    case SimilarityKind::text_adapter:
      return config.observation_text->score(a.text, b.text);
    case SimilarityKind::lcs:
      return lcs_similarity(a.elements, b.elements);
  }
  return 0.0;
}

double combined_similarity(const SimilarityConfig& config, const TaskInfo& task_a,
                           const Observation& obs_a, const TaskInfo& task_b,
                           const Observation& obs_b) {
  double score = 0.0;
  if (!config.mask_task)
    score += config.lambda * task_similarity(config, task_a, task_b);
  if (!config.mask_observation)
    score += (1.0 - config.lambda) * observation_similarity(config, obs_a, obs_b);
  return score;
}

std::vector<ScoredRecord> retrieve_top_m(const ExperienceMemory& memory,
                                         const SimilarityConfig& config,
                                         const TaskInfo& task,
                                         const Observation& observation,
                                         std::size_t m) {
  if (m < 1) throw std::invalid_argument("retrieve_top_m: m must be >= 1");
  config.validate();

  struct Entry {
    double score;
    std::uint64_t insertion_index;
    ExperienceRecord record;
  };
  std::vector<Entry> entries;
  memory.for_each([&](const ExperienceRecord& record) {
    if (config.exclude_same_task && record.task.id == task.id) return;
    double score =
        combined_similarity(config, task, observation, record.task,
                            record.observation);
    entries.push_back({score, record.insertion_index, record});
  });

  auto better = [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.insertion_index < b.insertion_index;
  };
  const std::size_t keep = std::min(m, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                    better);

  std::vector<ScoredRecord> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i)
    out.push_back({std::move(entries[i].record), entries[i].score});
  return out;
}

void PatternProfile::validate() const {
  auto known = [&](const std::string& label) {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
  };
  if (labels.empty())
    throw std::invalid_argument("pattern profile needs at least one label");
  if (!known(default_label))
    throw std::invalid_argument("default pattern label '" + default_label +
                                "' is not in the label set");
  for (const auto& rule : rules)
    if (!known(rule.label))
      throw std::invalid_argument("rule label '" + rule.label +
                                  "' is not in the label set");
  if (table && table->patterns() != labels)
    throw std::invalid_argument("pattern table labels do not match the profile");
}

const std::string& classify_pattern(const PatternProfile& profile,
                                    std::string_view text) {
  for (const auto& rule : profile.rules) {
    switch (rule.kind) {
      case PatternRule::Kind::prefix:
        if (text.substr(0, rule.needle.size()) == rule.needle) return rule.label;
        break;
      case PatternRule::Kind::substring:
        if (text.find(rule.needle) != std::string_view::npos) return rule.label;
        break;
      case PatternRule::Kind::equals:
        if (text == rule.needle) return rule.label;
        break;
    }
  }
  return profile.default_label;
}

}  // namespace rlem
