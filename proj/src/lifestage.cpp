#include "convodiv/lifestage.hpp"

#include <algorithm>

#include "convodiv/errors.hpp"

namespace convodiv {

namespace {

std::span<const Conversation> window_span(const Individual& ind, int lo, int hi) {
  auto cmp = [](const Conversation& c, int idx) { return c.order_index < idx; };
  auto first = std::lower_bound(ind.conversations.begin(), ind.conversations.end(), lo, cmp);
  auto last = std::lower_bound(first, ind.conversations.end(), hi, cmp);
  return {&*first, static_cast<std::size_t>(last - first)};
}

LifeStage make_stage(const Individual& ind, int stage_index, int width) {
  LifeStage s;
  s.individual_id = ind.individual_id;
  s.stage_index = stage_index;
  s.width = width;
  s.conversations = window_span(ind, stage_index * width, (stage_index + 1) * width);
  return s;
}

}  // namespace

std::vector<LifeStage> partition(const Individual& individual, int width) {
  if (width < 2) throw ParameterError("stage width must be >= 2");
  const int n_stages = individual.career_length() / width;
  std::vector<LifeStage> stages;
  stages.reserve(static_cast<std::size_t>(n_stages));
  for (int k = 0; k < n_stages; ++k) stages.push_back(make_stage(individual, k, width));
  return stages;
}

int tenured_stage_index(int width) {
  if (width < 2) throw ParameterError("stage width must be >= 2");
  return kTenuredStartConversation / width;
}

LifeStage tenured_stage(const Individual& individual, int width) {
  const int idx = tenured_stage_index(width);
  auto stage = stage_at(individual, idx, width);
  if (!stage)
    throw EligibilityError("individual '" + individual.individual_id + "' has only " +
                           std::to_string(individual.career_length()) +
                           " conversations; tenured stage needs " +
                           std::to_string((idx + 1) * width));
  return *stage;
}

std::optional<LifeStage> stage_at(const Individual& individual, int stage_index, int width) {
  if (width < 2) throw ParameterError("stage width must be >= 2");
  if (stage_index < 0) return std::nullopt;
  if (individual.career_length() < (stage_index + 1) * width) return std::nullopt;
  return make_stage(individual, stage_index, width);
}

}  // namespace convodiv
