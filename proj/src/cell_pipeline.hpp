#pragma once

// Internal machinery of the diversity sampling protocol, shared between the
// stage-based pipeline (diversity.cpp) and the career-window analyses
// (effectiveness.cpp). Not part of the public API.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "convodiv/corpus.hpp"
#include "convodiv/diversity.hpp"
#include "convodiv/langmodel.hpp"
#include "convodiv/rng.hpp"

namespace convodiv::detail {

using TokenId = std::uint32_t;

class TokenInterner {
 public:
  TokenId id(const std::string& token) {
    auto [it, inserted] = ids_.try_emplace(token, static_cast<TokenId>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<std::string, TokenId> ids_;
};

// Interned token pools for one analysis cell (a stage or career window).
struct CellTokens {
  std::vector<TokenId> train_pool;               // pooled train-split tokens
  std::vector<std::vector<TokenId>> test_convs;  // test conversations with >= w tokens
  int n_cell_convs = 0;
};

// Even positions of the order-sorted conversation list feed the train pool,
// odd positions the test set; test conversations below the eval budget are
// dropped here (eligibility is the caller's call).
inline CellTokens build_cell(std::span<const Conversation> conversations,
                             const TokenExtractor& extractor, TokenInterner& vocab,
                             int eval_budget) {
  CellTokens cell;
  cell.n_cell_convs = static_cast<int>(conversations.size());
  if (cell.n_cell_convs < 2) return cell;
  for (std::size_t i = 0; i < conversations.size(); ++i) {
    const auto tokens = extractor(conversations[i]);
    if (i % 2 == 0) {
      for (const std::string& t : tokens) cell.train_pool.push_back(vocab.id(t));
    } else {
      if (static_cast<int>(tokens.size()) < eval_budget) continue;
      std::vector<TokenId> ids;
      ids.reserve(tokens.size());
      for (const std::string& t : tokens) ids.push_back(vocab.id(t));
      cell.test_convs.push_back(std::move(ids));
    }
  }
  return cell;
}

struct JointValue {
  double within = 0.0;
  double between = 0.0;
  bool has_between = false;
  int n_test_convs = 0;
  int n_samples = 0;
};

// The sampling protocol for one cell, all measures in one pass. Per
// iteration: fit the individual's model on W sampled train tokens, fit a
// uniformly drawn peer's model likewise, then score each eligible test
// conversation on a single w-token sample against both models so the
// relative measure cancels conversation-sampling variance.
inline JointValue compute_joint(const CellTokens& own, const std::vector<const CellTokens*>& peers,
                                const SamplingParams& sampling, std::mt19937_64& gen) {
  const int w = sampling.eval_budget;
  const int n_convs = static_cast<int>(own.test_convs.size());
  double sum_within = 0.0, sum_between = 0.0;
  for (int iter = 0; iter < sampling.n_samples; ++iter) {
    const auto train =
        sample_tokens(std::span<const TokenId>(own.train_pool), sampling.train_budget, gen);
    const auto own_lm = fit_unigram(std::span<const TokenId>(train));
    BasicUnigramModel<TokenId> peer_lm;
    if (!peers.empty()) {
      const std::size_t j = static_cast<std::size_t>(rng::uniform_below(gen, peers.size()));
      const auto peer_train =
          sample_tokens(std::span<const TokenId>(peers[j]->train_pool), sampling.train_budget, gen);
      peer_lm = fit_unigram(std::span<const TokenId>(peer_train));
    }
    double iter_within = 0.0, iter_between = 0.0;
    for (const auto& conv_tokens : own.test_convs) {
      const auto sample = sample_tokens(std::span<const TokenId>(conv_tokens), w, gen);
      iter_within += cross_entropy(own_lm, std::span<const TokenId>(sample));
      if (!peers.empty()) iter_between += cross_entropy(peer_lm, std::span<const TokenId>(sample));
    }
    sum_within += iter_within / n_convs;
    sum_between += iter_between / n_convs;
  }
  JointValue v;
  v.within = sum_within / sampling.n_samples;
  v.between = sum_between / sampling.n_samples;
  v.has_between = !peers.empty();
  v.n_test_convs = n_convs;
  v.n_samples = sampling.n_samples;
  return v;
}

inline std::vector<std::string> counselor_tokens(const Conversation& conv) {
  return role_tokens(conv, SpeakerRole::counselor);
}

}  // namespace convodiv::detail
