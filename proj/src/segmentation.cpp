#include "convodiv/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "convodiv/errors.hpp"
#include "convodiv/format.hpp"

namespace convodiv {

const char* to_string(Component component) {
  switch (component) {
    case Component::hello: return "hello";
    case Component::problem_exploration: return "problem_exploration";
    case Component::goal_identification: return "goal_identification";
    case Component::problem_solving: return "problem_solving";
    default: return "goodbye";
  }
}

Component component_from_index(int index) {
  if (index < 0 || index >= kNumComponents)
    throw ParameterError("component index must be in [0,5)");
  return static_cast<Component>(index);
}

bool fifths_eligible(const Conversation& conv) {
  return conv.count_messages(SpeakerRole::counselor) >= kMinMessagesForFifths;
}

int fifth_of(int index, int n_messages) {
  if (n_messages < 1 || index < 0 || index >= n_messages)
    throw ParameterError("fifth_of: index out of range");
  for (int k = 0; k < kNumComponents; ++k) {
    const int hi =
        static_cast<int>(std::llround(static_cast<double>(k + 1) * n_messages / kNumComponents));
    if (index < hi) return k;
  }
  return kNumComponents - 1;
}

std::array<ComponentSlice, kNumComponents> split_fifths(const Conversation& conv) {
  std::vector<const Message*> counselor;
  for (const auto& m : conv.messages)
    if (m.role == SpeakerRole::counselor) counselor.push_back(&m);
  const int m = static_cast<int>(counselor.size());
  if (m < kMinMessagesForFifths)
    throw EligibilityError("conversation '" + conv.conv_id + "' has " + std::to_string(m) +
                           " counselor messages; fifths need >= " +
                           std::to_string(kMinMessagesForFifths));
  std::array<ComponentSlice, kNumComponents> slices;
  std::array<int, kNumComponents + 1> bounds;
  for (int k = 0; k <= kNumComponents; ++k)
    bounds[k] = static_cast<int>(std::llround(static_cast<double>(k) * m / kNumComponents));
  for (int k = 0; k < kNumComponents; ++k) {
    slices[k].conv_id = conv.conv_id;
    slices[k].component = static_cast<Component>(k);
    slices[k].counselor_messages.assign(counselor.begin() + bounds[k],
                                        counselor.begin() + bounds[k + 1]);
  }
  return slices;
}

std::vector<std::string> component_tokens(const Conversation& conv, Component component) {
  if (!fifths_eligible(conv)) return {};
  const auto slices = split_fifths(conv);
  std::vector<std::string> out;
  for (const Message* m : slices[static_cast<int>(component)].counselor_messages) {
    auto toks = tokenize(m->text);
    out.insert(out.end(), std::make_move_iterator(toks.begin()),
               std::make_move_iterator(toks.end()));
  }
  return out;
}

DiversityConfig scaled_for_components(DiversityConfig cfg) {
  cfg.sampling.train_budget = std::max(1, cfg.sampling.train_budget / kNumComponents);
  cfg.sampling.eval_budget = std::max(1, cfg.sampling.eval_budget / kNumComponents);
  if (cfg.sampling.train_budget < cfg.sampling.eval_budget)
    cfg.sampling.train_budget = cfg.sampling.eval_budget;
  return cfg;
}

DiversityResult component_diversity(const Corpus& corpus, Component component,
                                    const DiversityConfig& cfg, std::uint64_t seed, int threads,
                                    int width) {
  const std::string tag = std::string("component:") + to_string(component);
  TokenExtractor extractor = [component](const Conversation& conv) {
    return component_tokens(conv, component);
  };
  return compute_all_with_extractor(corpus, cfg, seed, extractor, tag, threads, width);
}

std::vector<CharacteristicWord> characteristic_words(const Corpus& corpus, Component component,
                                                     double threshold) {
  const int comp = static_cast<int>(component);
  std::int64_t total_messages = 0;
  std::array<std::int64_t, kNumComponents> component_messages{};
  // word -> (messages containing it overall, messages containing it in `component`)
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> contains;

  bool any_eligible = false;
  for (const auto& [id, ind] : corpus.individuals) {
    for (const auto& conv : ind.conversations) {
      if (!fifths_eligible(conv)) continue;
      any_eligible = true;
      const auto slices = split_fifths(conv);
      for (int k = 0; k < kNumComponents; ++k) {
        for (const Message* m : slices[k].counselor_messages) {
          ++total_messages;
          ++component_messages[k];
          std::unordered_set<std::string> seen;
          for (auto& tok : tokenize(m->text)) seen.insert(std::move(tok));
          for (const auto& w : seen) {
            auto& counts = contains[w];
            ++counts.first;
            if (k == comp) ++counts.second;
          }
        }
      }
    }
  }
  if (!any_eligible)
    throw EligibilityError("no conversation with >= 20 counselor messages in the corpus");

  std::vector<CharacteristicWord> out;
  const double n_comp = static_cast<double>(component_messages[comp]);
  const double n_all = static_cast<double>(total_messages);
  for (const auto& [word, counts] : contains) {
    if (counts.second == 0) continue;
    const double p_k = static_cast<double>(counts.second) / n_comp;
    const double p = static_cast<double>(counts.first) / n_all;
    const double ratio = std::log(p_k / p);
    if (ratio >= threshold) out.push_back({word, component, ratio});
  }
  std::sort(out.begin(), out.end(), [](const CharacteristicWord& a, const CharacteristicWord& b) {
    if (a.log_ratio != b.log_ratio) return a.log_ratio > b.log_ratio;
    return a.word < b.word;
  });
  return out;
}

void write_component_diversity_csv(std::span<const DiversityRecord> records, Component component,
                                   std::ostream& out, bool header) {
  if (header)
    out << "individual_id,stage_index,component,measure,value_bits,n_test_convs,n_samples_used\n";
  for (const auto& r : records) {
    out << r.individual_id << ',' << r.stage_index << ',' << to_string(component) << ','
        << to_string(r.measure) << ',' << format_double(r.value_bits) << ',' << r.n_test_convs
        << ',' << r.n_samples_used << '\n';
  }
}

void write_characteristic_words_csv(std::span<const CharacteristicWord> words, std::ostream& out,
                                    bool header) {
  if (header) out << "word,component,log_ratio\n";
  for (const auto& w : words) {
    out << w.word << ',' << to_string(w.component) << ',' << format_double(w.log_ratio) << '\n';
  }
}

}  // namespace convodiv
