#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convodiv/corpus.hpp"

namespace convodiv {

inline constexpr int kDefaultStageWidth = 20;
// The tenured reference stage starts at the 100th conversation.
inline constexpr int kTenuredStartConversation = 100;

struct LifeStage {
  std::string individual_id;
  int stage_index = 0;
  int width = kDefaultStageWidth;
  // Conversations with order_index in [stage_index*width, (stage_index+1)*width),
  // a view into the owning Individual. Exactly `width` of them unless input
  // filtering removed conversations from the window.
  std::span<const Conversation> conversations;
};

// Consecutive complete stages; the trailing remainder of a career is dropped.
// width must be >= 2 (the interleaved train/test split needs both halves).
std::vector<LifeStage> partition(const Individual& individual, int width = kDefaultStageWidth);

// Index of the tenured stage for a given width (5 at the default width 20).
int tenured_stage_index(int width = kDefaultStageWidth);

// The stage covering the 100th-120th conversations. Fixed positionally even
// for longer careers; individuals short of it are ineligible.
LifeStage tenured_stage(const Individual& individual, int width = kDefaultStageWidth);

// Stage by index if the career is long enough to complete it.
std::optional<LifeStage> stage_at(const Individual& individual, int stage_index,
                                  int width = kDefaultStageWidth);

}  // namespace convodiv
