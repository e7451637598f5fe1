#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"

namespace convodiv {

// Unigram model with the unseen-token convention prob = 1/N: unseen words
// are scored as if they had frequency 1 in the training sample. This leaves
// the model unnormalized over unseen types on purpose; do not "fix" it to
// add-one smoothing, downstream values depend on the floor being 1/N.
//
// Templated on the token type so the public string API and the pipeline's
// interned-id instantiation share one code path.
template <class Token>
struct BasicUnigramModel {
  std::unordered_map<Token, std::int64_t> counts;
  std::int64_t total = 0;
};

using UnigramModel = BasicUnigramModel<std::string>;

// Token budgets of the sampling protocol:
// models from train_budget (W) tokens, conversations scored on eval_budget (w)
// tokens, averaged over n_samples resampling iterations.
struct SamplingParams {
  int train_budget = 2000;
  int eval_budget = 200;
  int n_samples = 50;

  void validate() const {
    if (eval_budget < 1 || train_budget < eval_budget)
      throw ParameterError("sampling budgets must satisfy W >= w >= 1");
    if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  }
};

template <class Token>
BasicUnigramModel<Token> fit_unigram(std::span<const Token> tokens) {
  if (tokens.empty()) throw ParameterError("fit_unigram: token list is empty");
  BasicUnigramModel<Token> lm;
  lm.counts.reserve(tokens.size());
  for (const Token& t : tokens) ++lm.counts[t];
  lm.total = static_cast<std::int64_t>(tokens.size());
  return lm;
}

template <class Token>
BasicUnigramModel<Token> fit_unigram(const std::vector<Token>& tokens) {
  return fit_unigram(std::span<const Token>(tokens));
}

template <class Token>
double probability(const BasicUnigramModel<Token>& lm, const Token& token) {
  auto it = lm.counts.find(token);
  const std::int64_t c = it == lm.counts.end() ? 1 : it->second;
  return static_cast<double>(c) / static_cast<double>(lm.total);
}

// Bits per token: -(1/n) sum log2 prob(lm, t).
template <class Token>
double cross_entropy(const BasicUnigramModel<Token>& lm, std::span<const Token> tokens) {
  if (tokens.empty()) throw ParameterError("cross_entropy: token list is empty");
  double sum_log2_counts = 0.0;
  for (const Token& t : tokens) {
    auto it = lm.counts.find(t);
    if (it != lm.counts.end()) sum_log2_counts += std::log2(static_cast<double>(it->second));
    // unseen: count 1, log2(1) = 0
  }
  const double n = static_cast<double>(tokens.size());
  return std::log2(static_cast<double>(lm.total)) - sum_log2_counts / n;
}

template <class Token>
double cross_entropy(const BasicUnigramModel<Token>& lm, const std::vector<Token>& tokens) {
  return cross_entropy(lm, std::span<const Token>(tokens));
}

// Uniform sample of k tokens without replacement, in draw order.
template <class Token>
std::vector<Token> sample_tokens(std::span<const Token> tokens, int k, std::mt19937_64& gen) {
  if (k < 1) throw ParameterError("sample_tokens: k must be >= 1");
  if (static_cast<std::size_t>(k) > tokens.size())
    throw InsufficientDataError("sample_tokens: requested " + std::to_string(k) + " of " +
                                std::to_string(tokens.size()) + " tokens");
  std::vector<Token> pool(tokens.begin(), tokens.end());
  const std::size_t n = pool.size();
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng::uniform_below(gen, n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

template <class Token>
std::vector<Token> sample_tokens(const std::vector<Token>& tokens, int k, std::mt19937_64& gen) {
  return sample_tokens(std::span<const Token>(tokens), k, gen);
}

}  // namespace convodiv
