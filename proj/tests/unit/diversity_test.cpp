#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "convodiv/diversity.hpp"
#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"
#include "convodiv/synthgen.hpp"
#include "helpers.hpp"

using namespace convodiv;
using namespace convodiv::testing;

namespace {

// Cheap budgets for unit-scale corpora.
DiversityConfig small_config() {
  DiversityConfig cfg;
  cfg.sampling.train_budget = 300;
  cfg.sampling.eval_budget = 60;
  cfg.sampling.n_samples = 8;
  return cfg;
}

GenConfig small_gen(std::uint64_t seed) {
  GenConfig config;
  config.n_agents = 4;
  config.convs_per_agent = 120;
  config.vocab_size = 800;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("interleaved_split alternates train and test") {
  std::vector<Conversation> convs;
  for (int i = 0; i < 6; ++i) convs.push_back(uniform_conv("x", i, 2, "w"));
  const auto ind = corpus_of(std::move(convs)).individuals.at("x");
  LifeStage stage{"x", 0, 6, std::span<const Conversation>(ind.conversations)};
  const auto [train, test] = interleaved_split(stage);
  REQUIRE(train.size() == 3);
  REQUIRE(test.size() == 3);
  CHECK(train[0]->order_index == 0);
  CHECK(train[1]->order_index == 2);
  CHECK(train[2]->order_index == 4);
  CHECK(test[0]->order_index == 1);
  CHECK(test[2]->order_index == 5);
}

TEST_CASE("interleaved_split of a width-20 stage gives 10 and 10") {
  std::vector<Conversation> convs;
  for (int i = 0; i < 20; ++i) convs.push_back(uniform_conv("x", i, 2, "w"));
  const auto ind = corpus_of(std::move(convs)).individuals.at("x");
  const auto stages = partition(ind, 20);
  const auto [train, test] = interleaved_split(stages[0]);
  CHECK(train.size() == 10);
  CHECK(test.size() == 10);
}

TEST_CASE("interleaved_split of a 3-conversation stage") {
  std::vector<Conversation> convs;
  for (int i = 0; i < 3; ++i) convs.push_back(uniform_conv("x", i, 2, "w"));
  const auto ind = corpus_of(std::move(convs)).individuals.at("x");
  LifeStage stage{"x", 0, 20, std::span<const Conversation>(ind.conversations)};
  const auto [train, test] = interleaved_split(stage);
  CHECK(train.size() == 2);
  CHECK(test.size() == 1);

  LifeStage tiny{"x", 0, 20, stage.conversations.subspan(0, 1)};
  CHECK_THROWS_AS(interleaved_split(tiny), ParameterError);
}

TEST_CASE("compute_all emits three measures per eligible cell") {
  const auto generated = generate(small_gen(11), base_profiles(small_gen(11), 2, Dynamics::steady));
  const auto result = compute_all(generated.corpus, small_config(), 1);
  // 2 individuals x 6 stages x 3 measures
  CHECK(result.records.size() == 36);
  CHECK(result.skipped.empty());
  for (const auto& r : result.records) {
    CHECK(r.n_test_convs >= 1);
    CHECK(r.n_samples_used == 8);
    if (r.measure != Measure::relative) CHECK(r.value_bits > 0.0);
    if (r.measure != Measure::relative)
      CHECK(r.value_bits <= std::log2(300.0) + 1e-9);  // smoothing floor bound
  }
}

TEST_CASE("a lone individual gets within records only") {
  const auto generated = generate(small_gen(13), base_profiles(small_gen(13), 1, Dynamics::steady));
  const auto result = compute_all(generated.corpus, small_config(), 1);
  CHECK(result.records.size() == 6);
  for (const auto& r : result.records) CHECK(r.measure == Measure::within);
  CHECK(result.skipped.size() == 6);
  for (const auto& s : result.skipped) CHECK(s.reason == "no_eligible_peers");
}

TEST_CASE("relative equals between minus within exactly under joint sampling") {
  const auto generated = generate(small_gen(17), base_profiles(small_gen(17), 3, Dynamics::steady));
  const auto result = compute_all(generated.corpus, small_config(), 5);
  std::map<std::pair<std::string, int>, std::map<Measure, double>> cells;
  for (const auto& r : result.records)
    cells[{r.individual_id, r.stage_index}][r.measure] = r.value_bits;
  for (const auto& [key, by_measure] : cells) {
    REQUIRE(by_measure.size() == 3);
    CHECK(by_measure.at(Measure::relative) ==
          by_measure.at(Measure::between) - by_measure.at(Measure::within));
  }
}

TEST_CASE("compute_all is deterministic across runs and thread counts") {
  const auto generated = generate(small_gen(19), base_profiles(small_gen(19), 3, Dynamics::steady));
  const auto r1 = compute_all(generated.corpus, small_config(), 99, /*threads=*/1);
  const auto r2 = compute_all(generated.corpus, small_config(), 99, /*threads=*/1);
  const auto r4 = compute_all(generated.corpus, small_config(), 99, /*threads=*/4);
  REQUIRE(r1.records.size() == r2.records.size());
  REQUIRE(r1.records.size() == r4.records.size());
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    CHECK(r1.records[i].value_bits == r2.records[i].value_bits);
    CHECK(r1.records[i].value_bits == r4.records[i].value_bits);
    CHECK(r1.records[i].individual_id == r4.records[i].individual_id);
  }
}

TEST_CASE("peer policy same_cohort restricts peers") {
  auto config = small_gen(23);
  config.n_cohorts = 3;  // 3 agents -> all different cohorts
  const auto generated = generate(config, base_profiles(config, 3, Dynamics::steady));
  DiversityConfig cfg = small_config();
  cfg.peer_policy = PeerPolicy::same_cohort;
  const auto same = compute_all(generated.corpus, cfg, 1);
  for (const auto& r : same.records) CHECK(r.measure == Measure::within);
  cfg.peer_policy = PeerPolicy::any;
  const auto any = compute_all(generated.corpus, cfg, 1);
  CHECK(any.records.size() == 3 * same.records.size());
}

TEST_CASE("within diversity tracks the generator's entropy for an i.i.d. agent") {
  // Near-uniform 60-word vocabulary, no topic structure: every conversation is
  // an i.i.d. draw, so within-cross-entropy approaches the source entropy.
  GenConfig config;
  config.n_agents = 1;
  config.convs_per_agent = 20;
  config.vocab_size = 60;
  config.zipf_exponent = 0.01;
  config.seed = 31;
  auto profiles = base_profiles(config, 1, Dynamics::steady);
  profiles[0].topic_spread = Schedule::constant(0.0);

  const auto generated = generate(config, profiles);
  DiversityConfig cfg;
  cfg.sampling.train_budget = 2000;
  cfg.sampling.eval_budget = 200;
  cfg.sampling.n_samples = 20;

  auto gen = rng::substream(7, "iid");
  const auto record =
      within_diversity(generated.corpus.individuals.at("a0000"), 0, cfg, gen);

  // Analytic entropy of the Zipf source (independent oracle).
  double norm = 0.0;
  for (int r = 1; r <= config.vocab_size; ++r) norm += std::pow(r, -config.zipf_exponent);
  double entropy = 0.0;
  for (int r = 1; r <= config.vocab_size; ++r) {
    const double p = std::pow(r, -config.zipf_exponent) / norm;
    entropy -= p * std::log2(p);
  }
  CHECK(record.value_bits == doctest::Approx(entropy).epsilon(0.03));
}

TEST_CASE("per-conversation topic swings raise within diversity") {
  GenConfig config;
  config.n_agents = 1;
  config.convs_per_agent = 20;
  config.vocab_size = 800;
  config.n_topics = 8;
  config.seed = 37;

  auto narrow = base_profiles(config, 1, Dynamics::steady);
  narrow[0].topic_spread = Schedule::constant(0.0);
  auto swinging = base_profiles(config, 1, Dynamics::steady);
  swinging[0].topic_spread = Schedule::constant(0.7);

  DiversityConfig cfg;
  cfg.sampling.train_budget = 1500;
  cfg.sampling.eval_budget = 150;
  cfg.sampling.n_samples = 10;

  auto g1 = rng::substream(7, "narrow");
  auto g2 = rng::substream(7, "swing");
  const double h_narrow =
      within_diversity(generate(config, narrow).corpus.individuals.at("a0000"), 0, cfg, g1)
          .value_bits;
  const double h_swing =
      within_diversity(generate(config, swinging).corpus.individuals.at("a0000"), 0, cfg, g2)
          .value_bits;
  CHECK(h_swing > h_narrow);
}

TEST_CASE("a private idiolect pushes relative diversity positive") {
  GenConfig config;
  config.n_agents = 3;
  config.convs_per_agent = 20;
  config.vocab_size = 800;
  config.seed = 41;
  auto profiles = base_profiles(config, 3, Dynamics::steady);
  profiles[0].idiolect_weight = Schedule::constant(0.3);
  profiles[0].idiolect_size = 20;

  const auto generated = generate(config, profiles);
  std::vector<const Individual*> peers;
  for (const auto& [id, ind] : generated.corpus.individuals) peers.push_back(&ind);

  // The idiolect gain alpha*log2(alpha*W/V_idio) needs a realistic train
  // budget to clear the base-coverage penalty (1-alpha)*log2(1/(1-alpha)).
  DiversityConfig cfg;
  cfg.sampling.train_budget = 1500;
  cfg.sampling.eval_budget = 150;
  cfg.sampling.n_samples = 8;

  auto gen = rng::substream(7, "idio");
  const auto record =
      relative_diversity(generated.corpus.individuals.at("a0000"), 0, peers, cfg, gen);
  CHECK(record.value_bits > 0.3);
}

TEST_CASE("a disjoint vocabulary hits the smoothing floor exactly") {
  // Agent a0000 speaks only its private idiolect; every test token is unseen
  // in any peer model, so between-cross-entropy is exactly log2(W).
  GenConfig config;
  config.n_agents = 2;
  config.convs_per_agent = 20;
  config.vocab_size = 500;
  config.seed = 47;
  auto profiles = base_profiles(config, 2, Dynamics::steady);
  profiles[0].idiolect_weight = Schedule::constant(1.0);
  const auto generated = generate(config, profiles);

  std::vector<const Individual*> peers;
  for (const auto& [id, ind] : generated.corpus.individuals) peers.push_back(&ind);
  auto gen = rng::substream(7, "floor");
  const auto record = between_diversity(generated.corpus.individuals.at("a0000"), 0, peers,
                                        small_config(), gen);
  CHECK(record.value_bits == doctest::Approx(std::log2(300.0)).epsilon(1e-12));
}

TEST_CASE("eligibility errors surface for missing stages and short budgets") {
  const auto generated = generate(small_gen(43), base_profiles(small_gen(43), 1, Dynamics::steady));
  const auto& ind = generated.corpus.individuals.at("a0000");
  auto gen = rng::substream(7, "elig");
  CHECK_THROWS_AS(within_diversity(ind, 40, small_config(), gen), EligibilityError);

  DiversityConfig huge = small_config();
  huge.sampling.train_budget = 1000000;
  huge.sampling.eval_budget = 10;
  CHECK_THROWS_AS(within_diversity(ind, 0, huge, gen), EligibilityError);

  DiversityConfig bad;
  bad.sampling.eval_budget = 0;
  CHECK_THROWS_AS(within_diversity(ind, 0, bad, gen), ParameterError);

  std::vector<const Individual*> no_peers;
  CHECK_THROWS_AS(
      between_diversity(ind, 0, no_peers, small_config(), gen), EligibilityError);
}
