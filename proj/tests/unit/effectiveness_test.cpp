#include <doctest.h>

#include <cmath>

#include "convodiv/effectiveness.hpp"
#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"
#include "convodiv/synthgen.hpp"
#include "helpers.hpp"

using namespace convodiv;
using namespace convodiv::testing;

namespace {

Individual individual_with_ratings(const std::vector<Rating>& ratings, int window_start = 0) {
  std::vector<Conversation> convs;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    auto c = make_conv("x", window_start + static_cast<int>(i),
                       {msg(SpeakerRole::counselor, "hello")}, ratings[i]);
    convs.push_back(std::move(c));
  }
  return corpus_of(std::move(convs)).individuals.at("x");
}

}  // namespace

TEST_CASE("window effectiveness over rated conversations only") {
  const auto ind = individual_with_ratings({Rating::helpful, Rating::helpful, Rating::none,
                                            Rating::helpful, Rating::not_helpful, Rating::none});
  const auto r = window_effectiveness(ind, {0, 6});
  CHECK(r.n_ratings == 4);
  CHECK(r.frac_positive == doctest::Approx(0.75));
}

TEST_CASE("fewer than four ratings is ineligible") {
  const auto ind = individual_with_ratings({Rating::helpful, Rating::helpful, Rating::not_helpful,
                                            Rating::none});
  CHECK_THROWS_AS(window_effectiveness(ind, {0, 4}), EligibilityError);
  CHECK(try_window_effectiveness(ind, {0, 4}) == std::nullopt);
}

TEST_CASE("all positive ratings give fraction one") {
  const auto ind = individual_with_ratings(std::vector<Rating>(10, Rating::helpful));
  CHECK(window_effectiveness(ind, {0, 10}).frac_positive == doctest::Approx(1.0));
}

TEST_CASE("effectiveness is invariant under permutation within the window") {
  std::vector<Rating> ratings{Rating::helpful,    Rating::none,       Rating::not_helpful,
                              Rating::helpful,    Rating::helpful,    Rating::none,
                              Rating::not_helpful, Rating::helpful};
  const auto before = window_effectiveness(individual_with_ratings(ratings), {0, 8});
  auto gen = rng::substream(3, "perm");
  rng::shuffle(ratings, gen);
  const auto after = window_effectiveness(individual_with_ratings(ratings), {0, 8});
  CHECK(before.frac_positive == after.frac_positive);
  CHECK(before.n_ratings == after.n_ratings);
}

TEST_CASE("tercile comparison ranks by diversity and compares effectiveness") {
  std::vector<std::pair<std::string, double>> diversity, effectiveness;
  for (int i = 0; i < 9; ++i) {
    const std::string id = "i" + std::to_string(i);
    diversity.emplace_back(id, static_cast<double>(i));
    effectiveness.emplace_back(id, 0.5 + 0.05 * i);
  }
  const auto cmp = tercile_compare(diversity, effectiveness);
  CHECK(cmp.n == 9);
  CHECK(cmp.tercile_size == 3);
  CHECK(cmp.mean_bottom == doctest::Approx(0.55));
  CHECK(cmp.mean_top == doctest::Approx(0.85));
  CHECK(cmp.mwu.p_value < 0.2);

  // Monotone-invariance: any strictly increasing transform of the diversity
  // values yields identical terciles and identical U.
  auto transformed = diversity;
  for (auto& [id, v] : transformed) v = std::exp(v) + 100.0;
  const auto cmp2 = tercile_compare(transformed, effectiveness);
  CHECK(cmp2.mean_top == cmp.mean_top);
  CHECK(cmp2.mean_bottom == cmp.mean_bottom);
  CHECK(cmp2.mwu.statistic == cmp.mwu.statistic);
  CHECK(cmp2.mwu.p_value == cmp.mwu.p_value);
}

TEST_CASE("tercile comparison needs three individuals") {
  std::vector<std::pair<std::string, double>> two{{"a", 1.0}, {"b", 2.0}};
  CHECK_THROWS_AS(tercile_compare(two, two), EligibilityError);
}

TEST_CASE("identical effectiveness everywhere degenerates to p = 1") {
  std::vector<std::pair<std::string, double>> diversity, effectiveness;
  for (int i = 0; i < 9; ++i) {
    const std::string id = "i" + std::to_string(i);
    diversity.emplace_back(id, static_cast<double>(i));
    effectiveness.emplace_back(id, 0.8);
  }
  const auto cmp = tercile_compare(diversity, effectiveness);
  CHECK(cmp.mwu.p_value == doctest::Approx(1.0));
  CHECK(cmp.mean_top == cmp.mean_bottom);
}

TEST_CASE("window diversity values and planted skill link surface in terciles") {
  GenConfig config;
  config.n_agents = 9;
  config.convs_per_agent = 120;
  config.vocab_size = 600;
  config.rating_rate = 0.6;  // plenty of ratings at unit scale
  config.rating_skill_gain = 8.0;
  config.seed = 5;
  const auto profiles = make_preset_profiles(config, "effectiveness");
  const auto generated = generate(config, profiles);

  DiversityConfig cfg;
  cfg.sampling.train_budget = 400;
  cfg.sampling.eval_budget = 80;
  cfg.sampling.n_samples = 6;

  const auto wd = window_diversity(generated.corpus, kExperiencedWindow, cfg, 7);
  CHECK(wd.values.size() == 9 * 3);

  const auto cmp = compare_diversity_effectiveness(generated.corpus, Measure::within,
                                                   kExperiencedWindow, kExperiencedWindow, cfg, 7);
  CHECK(cmp.n >= 6);
  CHECK(cmp.mean_top > cmp.mean_bottom);
}
