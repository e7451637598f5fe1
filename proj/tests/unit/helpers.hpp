#pragma once

#include <optional>
#include <string>
#include <vector>

#include "convodiv/corpus.hpp"

namespace convodiv::testing {

inline Message msg(SpeakerRole role, std::string text) {
  Message m;
  m.role = role;
  m.text = std::move(text);
  return m;
}

inline Conversation make_conv(std::string individual_id, int order_index,
                              std::vector<Message> messages,
                              Rating rating = Rating::none,
                              std::optional<std::int64_t> timestamp = std::nullopt) {
  Conversation c;
  c.conv_id = individual_id + "_c" + std::to_string(order_index);
  c.individual_id = individual_id;
  c.order_index = order_index;
  c.timestamp = timestamp;
  c.rating = rating;
  int seq = 0;
  for (auto& m : messages) {
    m.seq = seq++;
    c.messages.push_back(std::move(m));
  }
  return c;
}

// Directly assembled corpus (bypasses parse filters).
inline Corpus corpus_of(std::vector<Conversation> conversations,
                        const std::string& default_cohort = "unknown") {
  Corpus corpus;
  for (auto& conv : conversations) {
    auto& ind = corpus.individuals[conv.individual_id];
    ind.individual_id = conv.individual_id;
    if (ind.cohort.empty()) ind.cohort = default_cohort;
    ind.conversations.push_back(std::move(conv));
  }
  for (auto& [id, ind] : corpus.individuals) {
    std::sort(ind.conversations.begin(), ind.conversations.end(),
              [](const Conversation& a, const Conversation& b) {
                return a.order_index < b.order_index;
              });
  }
  return corpus;
}

// A conversation of n counselor messages, every message the given text.
inline Conversation uniform_conv(const std::string& individual_id, int order_index,
                                 int n_counselor, const std::string& text) {
  std::vector<Message> messages;
  for (int i = 0; i < n_counselor; ++i) messages.push_back(msg(SpeakerRole::counselor, text));
  return make_conv(individual_id, order_index, std::move(messages));
}

}  // namespace convodiv::testing
