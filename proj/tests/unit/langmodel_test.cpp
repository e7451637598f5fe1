#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "convodiv/langmodel.hpp"
#include "convodiv/rng.hpp"

using namespace convodiv;

namespace {

using Tokens = std::vector<std::string>;

// Independent oracle: per-token probability via explicit multiset counting,
// summed in long double.
double oracle_cross_entropy(const Tokens& train, const Tokens& scored) {
  std::map<std::string, long long> counts;
  for (const auto& t : train) ++counts[t];
  long double sum = 0.0L;
  for (const auto& t : scored) {
    const auto it = counts.find(t);
    const long double c = it == counts.end() ? 1.0L : static_cast<long double>(it->second);
    sum += -std::log2(c / static_cast<long double>(train.size()));
  }
  return static_cast<double>(sum / static_cast<long double>(scored.size()));
}

}  // namespace

TEST_CASE("fit_unigram counts tokens") {
  const auto lm = fit_unigram(Tokens{"a", "a", "b"});
  CHECK(lm.total == 3);
  CHECK(lm.counts.at("a") == 2);
  CHECK(lm.counts.at("b") == 1);
  const auto single = fit_unigram(Tokens{"a"});
  CHECK(single.total == 1);
  CHECK_THROWS_AS(fit_unigram(Tokens{}), ParameterError);
}

TEST_CASE("probability uses the unseen-frequency-1 convention") {
  const auto lm = fit_unigram(Tokens{"a", "a", "b"});
  CHECK(probability(lm, std::string("a")) == doctest::Approx(2.0 / 3.0));
  CHECK(probability(lm, std::string("z")) == doctest::Approx(1.0 / 3.0));
  const auto one = fit_unigram(Tokens{"a"});
  CHECK(probability(one, std::string("a")) == doctest::Approx(1.0));
}

TEST_CASE("probabilities of seen types form a distribution") {
  auto gen = rng::substream(3, "lm");
  for (int rep = 0; rep < 20; ++rep) {
    Tokens tokens;
    const int n = 1 + static_cast<int>(rng::uniform_below(gen, 200));
    for (int i = 0; i < n; ++i)
      tokens.push_back("t" + std::to_string(rng::uniform_below(gen, 30)));
    const auto lm = fit_unigram(tokens);
    double sum = 0.0;
    for (const auto& [t, c] : lm.counts) {
      const double p = probability(lm, t);
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("cross_entropy matches hand-computed values") {
  CHECK(cross_entropy(fit_unigram(Tokens{"a", "b"}), Tokens{"a", "b"}) == doctest::Approx(1.0));
  // -(1/2)(log2(3/4) + log2(1/4))
  CHECK(cross_entropy(fit_unigram(Tokens{"a", "a", "a", "b"}), Tokens{"a", "a", "b", "b"}) ==
        doctest::Approx(1.2075187496394219).epsilon(1e-12));
  // every unseen token scores 1/N
  CHECK(cross_entropy(fit_unigram(Tokens{"a", "a"}), Tokens{"z", "z"}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(cross_entropy(fit_unigram(Tokens{"a"}), Tokens{}), ParameterError);
}

TEST_CASE("cross_entropy agrees with the direct-summation oracle") {
  auto gen = rng::substream(5, "ce-oracle");
  for (int rep = 0; rep < 200; ++rep) {
    Tokens train, scored;
    const int vocab = 1 + static_cast<int>(rng::uniform_below(gen, 50));
    const int n_train = 1 + static_cast<int>(rng::uniform_below(gen, 300));
    const int n_score = 1 + static_cast<int>(rng::uniform_below(gen, 100));
    for (int i = 0; i < n_train; ++i)
      train.push_back("v" + std::to_string(rng::uniform_below(gen, vocab)));
    for (int i = 0; i < n_score; ++i)
      scored.push_back("v" + std::to_string(rng::uniform_below(gen, vocab + 5)));
    const auto lm = fit_unigram(train);
    const double got = cross_entropy(lm, scored);
    const double want = oracle_cross_entropy(train, scored);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got <= std::log2(static_cast<double>(train.size())) + 1e-12);
  }
}

TEST_CASE("the id-token instantiation matches the string instantiation") {
  auto gen = rng::substream(6, "id-vs-string");
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::uint32_t> train_ids, score_ids;
    Tokens train, scored;
    const int n_train = 1 + static_cast<int>(rng::uniform_below(gen, 200));
    const int n_score = 1 + static_cast<int>(rng::uniform_below(gen, 80));
    for (int i = 0; i < n_train; ++i) {
      const auto v = static_cast<std::uint32_t>(rng::uniform_below(gen, 40));
      train_ids.push_back(v);
      train.push_back(std::to_string(v));
    }
    for (int i = 0; i < n_score; ++i) {
      const auto v = static_cast<std::uint32_t>(rng::uniform_below(gen, 45));
      score_ids.push_back(v);
      scored.push_back(std::to_string(v));
    }
    const double via_ids = cross_entropy(fit_unigram(train_ids), score_ids);
    const double via_strings = cross_entropy(fit_unigram(train), scored);
    CHECK(via_ids == doctest::Approx(via_strings).epsilon(1e-12));
  }
}

TEST_CASE("sample_tokens draws a sub-multiset without replacement") {
  auto gen = rng::substream(7, "sample");
  Tokens pool;
  for (int i = 0; i < 300; ++i) pool.push_back("t" + std::to_string(i % 40));
  const auto sampled = sample_tokens(pool, 200, gen);
  REQUIRE(sampled.size() == 200);
  std::map<std::string, int> pool_counts, sample_counts;
  for (const auto& t : pool) ++pool_counts[t];
  for (const auto& t : sampled) ++sample_counts[t];
  for (const auto& [t, c] : sample_counts) CHECK(c <= pool_counts[t]);

  // k == n is a permutation of the input multiset
  const auto all = sample_tokens(pool, 300, gen);
  std::multiset<std::string> a(pool.begin(), pool.end()), b(all.begin(), all.end());
  CHECK(a == b);

  CHECK_THROWS_AS(sample_tokens(pool, 301, gen), InsufficientDataError);
}

TEST_CASE("sample_tokens is deterministic for a fixed stream") {
  Tokens pool;
  for (int i = 0; i < 100; ++i) pool.push_back(std::to_string(i));
  auto g1 = rng::substream(1, "det");
  auto g2 = rng::substream(1, "det");
  CHECK(sample_tokens(pool, 30, g1) == sample_tokens(pool, 30, g2));
}

TEST_CASE("sampling params validate their budget ordering") {
  SamplingParams p;
  CHECK_NOTHROW(p.validate());
  p.eval_budget = 5000;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = SamplingParams{};
  p.n_samples = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}
