#include "convodiv/usage_shift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_set>

#include "convodiv/errors.hpp"
#include "convodiv/format.hpp"

namespace convodiv {

namespace {

// Individuals contributing to population-level lexical measures: those with a
// full 120-conversation career, restricted to their first 120 conversations.
constexpr int kEligibleCareer = 120;

bool eligible(const Individual& ind) { return ind.career_length() >= kEligibleCareer; }

std::unordered_set<std::string> conversation_word_set(const Conversation& conv) {
  std::unordered_set<std::string> words;
  for (const auto& m : conv.messages) {
    if (m.role != SpeakerRole::counselor) continue;
    for (auto& tok : tokenize(m.text)) words.insert(std::move(tok));
  }
  return words;
}

struct WindowCounts {
  std::int64_t n_from = 0;
  std::int64_t n_to = 0;
  // word -> (containing conversations in `from`, in `to`)
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> contains;
  bool observed_anywhere(const std::string& word) const {
    return observed.count(word) > 0;
  }
  std::unordered_set<std::string> observed;  // across the first 120 conversations
};

WindowCounts count_windows(const Corpus& corpus, StageWindow from, StageWindow to,
                           bool track_all_words, const std::set<std::string>* vocab) {
  WindowCounts counts;
  for (const auto& [id, ind] : corpus.individuals) {
    if (!eligible(ind)) continue;
    for (const auto& conv : ind.conversations) {
      if (conv.order_index >= kEligibleCareer) continue;
      const bool in_from = conv.order_index >= from.start && conv.order_index < from.end;
      const bool in_to = conv.order_index >= to.start && conv.order_index < to.end;
      if (!in_from && !in_to && !track_all_words) continue;
      const auto words = conversation_word_set(conv);
      if (track_all_words)
        for (const auto& w : words) counts.observed.insert(w);
      if (!in_from && !in_to) continue;
      if (in_from) ++counts.n_from;
      if (in_to) ++counts.n_to;
      for (const auto& w : words) {
        if (vocab && !vocab->count(w)) continue;
        auto& c = counts.contains[w];
        if (in_from) ++c.first;
        if (in_to) ++c.second;
      }
    }
  }
  return counts;
}

ShiftEntry make_entry(const std::string& word, std::int64_t k0, std::int64_t n0,
                      std::int64_t k_bar, std::int64_t n_bar) {
  ShiftEntry e;
  e.word = word;
  e.p0 = static_cast<double>(k0 + 1) / static_cast<double>(n0 + 2);
  e.pbar = static_cast<double>(k_bar + 1) / static_cast<double>(n_bar + 2);
  // log difference, not log of the quotient: swapping the stages then negates
  // the shift bit-exactly.
  e.shift = std::log(e.pbar) - std::log(e.p0);
  return e;
}

}  // namespace

double smoothed_log_ratio(std::int64_t k0, std::int64_t n0, std::int64_t k_bar,
                          std::int64_t n_bar) {
  const double p0 = static_cast<double>(k0 + 1) / static_cast<double>(n0 + 2);
  const double pbar = static_cast<double>(k_bar + 1) / static_cast<double>(n_bar + 2);
  return std::log(pbar) - std::log(p0);
}

std::set<std::string> core_vocabulary(const Corpus& corpus, double min_user_fraction) {
  if (min_user_fraction < 0.0 || min_user_fraction > 1.0)
    throw ParameterError("min_user_fraction must be in [0,1]");
  std::map<std::string, int> users;
  int n_eligible = 0;
  for (const auto& [id, ind] : corpus.individuals) {
    if (!eligible(ind)) continue;
    ++n_eligible;
    std::unordered_set<std::string> own;
    for (const auto& conv : ind.conversations) {
      if (conv.order_index >= kEligibleCareer) continue;
      for (const auto& w : conversation_word_set(conv)) own.insert(w);
    }
    for (const auto& w : own) ++users[w];
  }
  std::set<std::string> vocab;
  const double cutoff = min_user_fraction * n_eligible - 1e-9;
  for (const auto& [w, n] : users) {
    if (static_cast<double>(n) >= cutoff) vocab.insert(w);
  }
  return vocab;
}

ShiftEntry usage_shift(const Corpus& corpus, const std::string& word) {
  return usage_shift_between(corpus, word, kNoviceWindow, kTenuredWindow);
}

ShiftEntry usage_shift_between(const Corpus& corpus, const std::string& word, StageWindow from,
                               StageWindow to) {
  const WindowCounts counts = count_windows(corpus, from, to, /*track_all_words=*/true, nullptr);
  if (counts.n_from == 0 || counts.n_to == 0)
    throw EligibilityError("no eligible conversations in one of the compared stages");
  if (!counts.observed_anywhere(word))
    throw NotFoundError("word '" + word + "' never observed in eligible counselor messages");
  auto it = counts.contains.find(word);
  const std::int64_t k0 = it == counts.contains.end() ? 0 : it->second.first;
  const std::int64_t k_bar = it == counts.contains.end() ? 0 : it->second.second;
  return make_entry(word, k0, counts.n_from, k_bar, counts.n_to);
}

ShiftTable shift_table(const Corpus& corpus, const std::set<std::string>& vocab) {
  return shift_table_between(corpus, vocab, kNoviceWindow, kTenuredWindow);
}

ShiftTable shift_table_between(const Corpus& corpus, const std::set<std::string>& vocab,
                               StageWindow from, StageWindow to) {
  if (vocab.empty()) throw ParameterError("shift_table: vocabulary is empty");
  const WindowCounts counts = count_windows(corpus, from, to, /*track_all_words=*/false, &vocab);
  if (counts.n_from == 0 || counts.n_to == 0)
    throw EligibilityError("no eligible conversations in one of the compared stages");

  ShiftTable table;
  table.entries.reserve(vocab.size());
  for (const auto& w : vocab) {
    auto it = counts.contains.find(w);
    const std::int64_t k0 = it == counts.contains.end() ? 0 : it->second.first;
    const std::int64_t k_bar = it == counts.contains.end() ? 0 : it->second.second;
    table.entries.push_back(make_entry(w, k0, counts.n_from, k_bar, counts.n_to));
  }
  std::sort(table.entries.begin(), table.entries.end(),
            [](const ShiftEntry& a, const ShiftEntry& b) {
              if (a.shift != b.shift) return a.shift < b.shift;
              return a.word < b.word;
            });

  const std::size_t n = table.entries.size();
  table.median = n % 2 == 1 ? table.entries[n / 2].shift
                            : 0.5 * (table.entries[n / 2 - 1].shift + table.entries[n / 2].shift);

  const double lo_shift = table.entries.front().shift;
  const double hi_shift = table.entries.back().shift;
  const double width = table.bin_width;
  const double lo = std::floor(lo_shift / width) * width;
  const int n_bins = std::max(1, static_cast<int>(std::floor((hi_shift - lo) / width)) + 1);
  table.histogram.assign(static_cast<std::size_t>(n_bins), HistogramBin{});
  for (int b = 0; b < n_bins; ++b) table.histogram[b].bin_left = lo + b * width;
  for (const auto& e : table.entries) {
    int b = static_cast<int>(std::floor((e.shift - lo) / width));
    b = std::clamp(b, 0, n_bins - 1);
    ++table.histogram[static_cast<std::size_t>(b)].count;
  }
  return table;
}

void write_shift_table_csv(const ShiftTable& table, std::ostream& out) {
  out << "word,p0,pbar,shift\n";
  for (const auto& e : table.entries) {
    out << e.word << ',' << format_double(e.p0) << ',' << format_double(e.pbar) << ','
        << format_double(e.shift) << '\n';
  }
}

void write_shift_hist_csv(const ShiftTable& table, std::ostream& out) {
  out << "bin_left,count\n";
  for (const auto& b : table.histogram) {
    out << format_double(b.bin_left) << ',' << b.count << '\n';
  }
}

}  // namespace convodiv
