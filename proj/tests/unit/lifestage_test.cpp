#include <doctest.h>

#include "convodiv/errors.hpp"
#include "convodiv/lifestage.hpp"
#include "helpers.hpp"

using namespace convodiv;
using namespace convodiv::testing;

namespace {

Individual individual_with(int n_convs) {
  std::vector<Conversation> convs;
  for (int i = 0; i < n_convs; ++i) convs.push_back(uniform_conv("x", i, 2, "word"));
  return corpus_of(std::move(convs)).individuals.at("x");
}

}  // namespace

TEST_CASE("partition yields complete stages, remainder dropped") {
  {
    const auto stages = partition(individual_with(120), 20);
    REQUIRE(stages.size() == 6);
    for (int k = 0; k < 6; ++k) {
      CHECK(stages[k].stage_index == k);
      CHECK(stages[k].conversations.size() == 20);
      CHECK(stages[k].conversations.front().order_index == k * 20);
      CHECK(stages[k].conversations.back().order_index == k * 20 + 19);
    }
  }
  CHECK(partition(individual_with(119), 20).size() == 5);
  CHECK(partition(individual_with(20), 20).size() == 1);
  CHECK(partition(individual_with(19), 20).empty());
  CHECK_THROWS_AS(partition(individual_with(40), 1), ParameterError);
}

TEST_CASE("stages are disjoint and cover the first floor(n/width)*width conversations") {
  const auto ind = individual_with(119);
  const auto stages = partition(ind, 20);
  int expected = 0;
  for (const auto& s : stages) {
    for (const auto& c : s.conversations) CHECK(c.order_index == expected++);
  }
  CHECK(expected == 100);
}

TEST_CASE("tenured stage is fixed at conversations 100..119") {
  CHECK(tenured_stage_index(20) == 5);
  {
    const auto ind = individual_with(120);
    const auto s = tenured_stage(ind);
    CHECK(s.stage_index == 5);
    CHECK(s.conversations.front().order_index == 100);
    CHECK(s.conversations.back().order_index == 119);
  }
  CHECK_THROWS_AS(tenured_stage(individual_with(99)), EligibilityError);
  {
    // Longer careers still use the same reference stage.
    const auto s = tenured_stage(individual_with(140));
    CHECK(s.stage_index == 5);
    CHECK(s.conversations.back().order_index == 119);
  }
}

TEST_CASE("stage_at handles gaps from filtered conversations") {
  // Conversations 0..39 with 20..24 missing: stage 1 exists but is short.
  std::vector<Conversation> convs;
  for (int i = 0; i < 40; ++i) {
    if (i >= 20 && i < 25) continue;
    convs.push_back(uniform_conv("x", i, 2, "word"));
  }
  const auto ind = corpus_of(std::move(convs)).individuals.at("x");
  const auto s1 = stage_at(ind, 1, 20);
  REQUIRE(s1.has_value());
  CHECK(s1->conversations.size() == 15);
  CHECK(stage_at(ind, 2, 20) == std::nullopt);
}
