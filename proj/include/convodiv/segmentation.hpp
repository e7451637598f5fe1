#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "convodiv/corpus.hpp"
#include "convodiv/diversity.hpp"

namespace convodiv {

// The five functional fifths of a conversation's counselor messages.
enum class Component {
  hello = 0,
  problem_exploration = 1,
  goal_identification = 2,
  problem_solving = 3,
  goodbye = 4,
};

inline constexpr int kNumComponents = 5;
inline constexpr int kMinMessagesForFifths = 20;
inline constexpr double kCharacteristicThreshold = 0.2;

const char* to_string(Component component);
Component component_from_index(int index);

struct ComponentSlice {
  std::string conv_id;
  Component component = Component::hello;
  std::vector<const Message*> counselor_messages;  // contiguous, in seq order
};

bool fifths_eligible(const Conversation& conv);

// Fifth containing counselor message `index` of `n_messages`, under the
// round(k*m/5) boundary rule. Shared with the synthetic generator so planted
// component structure lands where the analysis looks for it.
int fifth_of(int index, int n_messages);

// Counselor messages split at boundaries round(k*m/5); slices partition the
// messages and their sizes differ by at most one.
std::array<ComponentSlice, kNumComponents> split_fifths(const Conversation& conv);

// Tokens of the component's counselor messages; empty when the conversation
// has fewer than 20 counselor messages (ineligible for fifths).
std::vector<std::string> component_tokens(const Conversation& conv, Component component);

// Proportional budgets for per-component analysis: a fifth of a conversation
// carries roughly a fifth of its tokens.
DiversityConfig scaled_for_components(DiversityConfig cfg);

// The diversity pipeline restricted to one component's token pools.
DiversityResult component_diversity(const Corpus& corpus, Component component,
                                    const DiversityConfig& cfg, std::uint64_t seed,
                                    int threads = 1, int width = kDefaultStageWidth);

struct CharacteristicWord {
  std::string word;
  Component component = Component::hello;
  double log_ratio = 0.0;  // ln(p_component / p_overall)
};

// Words whose within-component message frequency exceeds their overall
// message frequency by ln >= threshold, over fifths-eligible conversations.
std::vector<CharacteristicWord> characteristic_words(const Corpus& corpus, Component component,
                                                     double threshold = kCharacteristicThreshold);

void write_component_diversity_csv(std::span<const DiversityRecord> records, Component component,
                                   std::ostream& out, bool header = true);
void write_characteristic_words_csv(std::span<const CharacteristicWord> words, std::ostream& out,
                                    bool header = true);

}  // namespace convodiv
