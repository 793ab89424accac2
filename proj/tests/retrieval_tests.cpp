#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "rlem/profile.hpp"
#include "rlem/retrieval.hpp"

using namespace rlem;

namespace {

const char* kRepoDir = RLEM_REPO_DIR;

// Independent full-table LCS, kept deliberately naive.
std::size_t lcs_oracle(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1,
                                           std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1]
                     ? dp[i - 1][j - 1] + 1
                     : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

std::vector<std::string> random_elements(std::mt19937_64& rng, std::size_t max_len,
                                         int alphabet) {
  std::vector<std::string> out(rng() % (max_len + 1));
  for (auto& e : out) e = std::string(1, static_cast<char>('a' + rng() % alphabet));
  return out;
}

PatternTable toy_table() {
  return PatternTable({"search", "itemlisting", "item", "others"},
                      {{1.0, 0.0, 0.0, 0.0},
                       {0.0, 1.0, 0.0, 0.0},
                       {0.0, 0.0, 1.0, 0.3},
                       {0.0, 0.0, 0.3, 1.0}});
}

}  // namespace

TEST_CASE("pattern table validation") {
  CHECK_THROWS_AS(PatternTable({"a", "b"}, {{1.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(PatternTable({"a", "b"}, {{1.0, 0.5}, {0.4, 1.0}}),
                  std::invalid_argument);  // asymmetric
  CHECK_THROWS_AS(PatternTable({"a", "b"}, {{1.0, 1.2}, {1.2, 1.0}}),
                  std::invalid_argument);  // out of range
  CHECK_THROWS_AS(PatternTable({"a", "b"}, {{0.9, 0.5}, {0.5, 1.0}}),
                  std::invalid_argument);  // diagonal
  try {
    PatternTable({"item", "others"}, {{1.0, 0.5}, {0.4, 1.0}});
    FAIL("expected validation failure");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("(item, others)") != std::string::npos);
  }
}

TEST_CASE("shipped lookup tables reproduce the reference cells") {
  auto webshop =
      DomainProfile::load(std::string(kRepoDir) + "/profiles/webshop.toml");
  const auto& pages = *webshop.observation_patterns.table;
  CHECK(pages.similarity("item", "others") == 0.3);
  CHECK(pages.similarity("others", "item") == 0.3);
  CHECK(pages.similarity("search", "search") == 1.0);
  CHECK(pages.similarity("search", "itemlisting") == 0.0);

  auto wikihow =
      DomainProfile::load(std::string(kRepoDir) + "/profiles/wikihow.toml");
  const auto& instructions = *wikihow.task_patterns.table;
  CHECK(instructions.similarity("author", "category") == 0.8);
  CHECK(instructions.similarity("search", "article") == 0.1);
  CHECK(instructions.similarity("reference", "about") == 0.8);
  for (const auto& label : instructions.patterns())
    CHECK(instructions.similarity(label, label) == 1.0);

  CHECK_THROWS_AS(pages.similarity("search", "no-such-pattern"),
                  std::out_of_range);
}

TEST_CASE("lcs similarity") {
  std::vector<std::string> abc{"A", "B", "C"};
  std::vector<std::string> acd{"A", "C", "D"};
  std::vector<std::string> xyz{"X", "Y", "Z"};
  std::vector<std::string> empty;

  CHECK(lcs_similarity(abc, abc) == 1.0);
  CHECK(lcs_similarity(abc, xyz) == 0.0);
  CHECK(lcs_similarity(abc, acd) == doctest::Approx(2.0 / 3.0));
  CHECK(lcs_similarity(empty, empty) == 1.0);
  CHECK(lcs_similarity(abc, empty) == 0.0);

  SUBCASE("matches the quadratic DP oracle on random pairs") {
    std::mt19937_64 rng(23);
    for (int round = 0; round < 1000; ++round) {
      auto a = random_elements(rng, 50, 4);
      auto b = random_elements(rng, 50, 4);
      double expected =
          a.empty() && b.empty()
              ? 1.0
              : (a.empty() || b.empty()
                     ? 0.0
                     : static_cast<double>(lcs_oracle(a, b)) /
                           static_cast<double>(std::max(a.size(), b.size())));
      double got = lcs_similarity(a, b);
      CHECK(got == doctest::Approx(expected));
      CHECK(got == lcs_similarity(b, a));  // symmetry
      CHECK(got >= 0.0);
      CHECK(got <= 1.0);
      CHECK(lcs_similarity(a, a) == 1.0);  // identity
    }
  }
}

TEST_CASE("token-set cosine") {
  TokenSetCosine cosine;
  CHECK(cosine.score("buy a red hat", "buy a red hat") == doctest::Approx(1.0));
  CHECK(cosine.score("alpha beta", "gamma delta") == 0.0);
  CHECK(cosine.score("Alpha Beta", "alpha beta") == doctest::Approx(1.0));
  CHECK(cosine.score("", "") == 1.0);
  CHECK(cosine.score("a", "") == 0.0);
  double s = cosine.score("a b c d", "a b c x");
  CHECK(s == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("combined similarity") {
  auto table = toy_table();
  TokenSetCosine cosine;
  SimilarityConfig config;
  config.task_kind = SimilarityKind::text_adapter;
  config.task_text = &cosine;
  config.observation_kind = SimilarityKind::pattern_table;
  config.observation_table = &table;

  TaskInfo g1{"t1", "red hat", "request"};
  TaskInfo g2{"t2", "red hat", "request"};
  Observation item = Observation::from_text("Item: x", "item");
  Observation search = Observation::from_text("Search:", "search");

  SUBCASE("weighted blend") {
    // f_g = 1 (identical text), f_o = 0 (search vs item).
    CHECK(combined_similarity(config, g1, search, g2, item) == doctest::Approx(0.5));
  }

  SUBCASE("lambda 0 degenerates to observation similarity") {
    config.lambda = 0.0;
    TaskInfo other{"t3", "completely different words", "request"};
    Observation others = Observation::from_text("About: x", "others");
    CHECK(combined_similarity(config, g1, item, other, others) ==
          doctest::Approx(0.3));
  }

  SUBCASE("hand-evaluated blend") {
    // lambda=0.5, f_g=0.8, f_o=2/3 -> 0.73333...
    struct Fixed : TextSimilarity {
      double score(std::string_view, std::string_view) const override {
        return 0.8;
      }
    } fixed;
    config.task_text = &fixed;
    config.observation_kind = SimilarityKind::lcs;
    Observation a = Observation::from_text("A\nB\nC");
    Observation b = Observation::from_text("A\nC\nD");
    CHECK(combined_similarity(config, g1, a, g2, b) ==
          doctest::Approx(0.5 * 0.8 + 0.5 * (2.0 / 3.0)));
  }

  SUBCASE("masked components drop their term without renormalizing") {
    config.mask_task = true;
    CHECK(combined_similarity(config, g1, item, g2, item) == doctest::Approx(0.5));
    config.mask_task = false;
    config.mask_observation = true;
    CHECK(combined_similarity(config, g1, search, g2, item) ==
          doctest::Approx(0.5));
    config.mask_task = true;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  }

  SUBCASE("bounded and symmetric") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 200; ++round) {
      config.lambda = (rng() % 11) / 10.0;
      Observation oa = Observation::from_text("Item: a", "item");
      Observation ob = Observation::from_text("About: b", "others");
      TaskInfo ta{"x", "one two three", "request"};
      TaskInfo tb{"y", "one two four", "request"};
      double ab = combined_similarity(config, ta, oa, tb, ob);
      double ba = combined_similarity(config, tb, ob, ta, oa);
      CHECK(ab == doctest::Approx(ba));
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
    }
  }
}

TEST_CASE("retrieve_top_m") {
  TokenSetCosine cosine;
  auto table = toy_table();

  auto make_config = [&](double lambda, bool mask_task, bool mask_obs) {
    SimilarityConfig config;
    config.lambda = lambda;
    config.mask_task = mask_task;
    config.mask_observation = mask_obs;
    config.task_kind = SimilarityKind::text_adapter;
    config.task_text = &cosine;
    config.observation_kind = SimilarityKind::lcs;
    return config;
  };

  SUBCASE("m covering the whole memory returns all records, score-sorted") {
    ExperienceMemory memory;
    for (int i = 0; i < 5; ++i) {
      TaskInfo g{"t" + std::to_string(i), "goal word" + std::to_string(i), "request"};
      memory.upsert(g, Observation::from_text("line\nrow " + std::to_string(i)),
                    Action{"a"}, 1.0, 0.0);
    }
    auto config = make_config(0.5, false, false);
    TaskInfo probe{"probe", "goal word1", "request"};
    auto got = retrieve_top_m(memory, config, probe,
                              Observation::from_text("line\nrow 1"), 50);
    REQUIRE(got.size() == 5);
    for (std::size_t i = 1; i < got.size(); ++i)
      CHECK(got[i - 1].score >= got[i].score);
    CHECK(got[0].record.task.id == "t1");
  }

  SUBCASE("equal scores fall back to insertion order") {
    ExperienceMemory memory;
    TaskInfo g1{"t1", "same words", "request"};
    TaskInfo g2{"t2", "same words", "request"};
    auto obs = Observation::from_text("identical page");
    memory.upsert(g1, obs, Action{"a"}, 1.0, 0.0);
    memory.upsert(g2, obs, Action{"a"}, 1.0, 0.0);
    auto config = make_config(0.5, false, false);
    auto got = retrieve_top_m(memory, config, TaskInfo{"p", "same words", "request"},
                              obs, 2);
    REQUIRE(got.size() == 2);
    CHECK(got[0].record.insertion_index < got[1].record.insertion_index);
    CHECK(got[0].record.task.id == "t1");
  }

  SUBCASE("empty memory yields an empty list") {
    ExperienceMemory memory;
    auto config = make_config(0.5, false, false);
    CHECK(retrieve_top_m(memory, config, TaskInfo{"p", "x", "request"},
                         Observation::from_text("y"), 3)
              .empty());
  }

  SUBCASE("same-task exclusion flag") {
    ExperienceMemory memory;
    TaskInfo g1{"t1", "alpha beta", "request"};
    TaskInfo g2{"t2", "alpha beta", "request"};
    auto obs = Observation::from_text("page");
    memory.upsert(g1, obs, Action{"a"}, 1.0, 0.0);
    memory.upsert(g2, obs, Action{"a"}, 1.0, 0.0);
    auto config = make_config(0.5, false, false);
    config.exclude_same_task = true;
    auto got = retrieve_top_m(memory, config, g1, obs, 5);
    REQUIRE(got.size() == 1);
    CHECK(got[0].record.task.id == "t2");
  }

  SUBCASE("matches the exhaustive scan-and-sort oracle") {
    std::mt19937_64 rng(31);
    const char* words[] = {"wireless", "corded",     "portable", "bulky",
                           "gadget",   "rechargeable", "disposable", "buy"};
    for (int round = 0; round < 30; ++round) {
      ExperienceMemory memory;
      const std::size_t records = 1 + rng() % 120;
      for (std::size_t i = 0; i < records; ++i) {
        std::string text;
        for (int w = 0; w < 4; ++w)
          text += std::string(words[rng() % 8]) + " ";
        TaskInfo g{"t" + std::to_string(rng() % 20), text, "request"};
        std::string page;
        for (std::size_t l = 0, lines = rng() % 8; l < lines; ++l)
          page += std::string(1, static_cast<char>('a' + rng() % 5)) + "\n";
        memory.upsert(g, Observation::from_text(page), Action{"a"}, 1.0, 0.0);
      }
      for (double lambda : {0.0, 0.5, 1.0}) {
        for (int mask = 0; mask < 3; ++mask) {
          auto config = make_config(lambda, mask == 1, mask == 2);
          TaskInfo probe{"probe", "wireless gadget buy now", "request"};
          auto probe_obs = Observation::from_text("a\nb\nc");
          std::size_t m = 1 + rng() % 12;

          auto got = retrieve_top_m(memory, config, probe, probe_obs, m);

          // Oracle: score every record, stable-sort the whole list.
          struct Row {
            double score;
            std::uint64_t index;
            std::string task_id;
            std::string obs_text;
          };
          std::vector<Row> rows;
          memory.for_each([&](const ExperienceRecord& rec) {
            rows.push_back({combined_similarity(config, probe, probe_obs,
                                                rec.task, rec.observation),
                            rec.insertion_index, rec.task.id,
                            rec.observation.text});
          });
          std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.score != b.score ? a.score > b.score : a.index < b.index;
          });
          rows.resize(std::min(m, rows.size()));

          REQUIRE(got.size() == rows.size());
          for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].record.insertion_index == rows[i].index);
            CHECK(got[i].score == rows[i].score);
          }
        }
      }
    }
  }
}

TEST_CASE("pattern classification") {
  auto toyshop =
      DomainProfile::load(std::string(kRepoDir) + "/profiles/toyshop.toml");
  const auto& pages = toyshop.observation_patterns;
  CHECK(classify_pattern(pages, "Search:\ngoal: buy a thing") == "search");
  CHECK(classify_pattern(pages, "Results:\n1. x") == "itemlisting");
  CHECK(classify_pattern(pages, "Item: camp lantern") == "item");
  CHECK(classify_pattern(pages, "some unmatched text") == "others");

  auto wikihow =
      DomainProfile::load(std::string(kRepoDir) + "/profiles/wikihow.toml");
  CHECK(classify_pattern(wikihow.task_patterns,
                         "Access the article How to Tie a Tie") == "article");
  CHECK(classify_pattern(wikihow.task_patterns,
                         "Check the reference list.") == "reference");
}

TEST_CASE("profile wiring") {
  auto toyshop =
      DomainProfile::load(std::string(kRepoDir) + "/profiles/toyshop.toml");
  CHECK(toyshop.name == "toyshop");
  CHECK(toyshop.lambda == 0.5);
  CHECK(toyshop.safe_action == "look");
  CHECK(toyshop.feedback_window == 5);
  auto config = toyshop.similarity_config();
  CHECK(config.observation_kind == SimilarityKind::lcs);
  CHECK(config.task_kind == SimilarityKind::text_adapter);
  config.validate();
}
