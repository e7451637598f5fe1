#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "convodiv/corpus.hpp"

namespace convodiv {

// Career windows (order_index ranges, half-open) compared by usage shift.
struct StageWindow {
  int start = 0;
  int end = 0;
};
inline constexpr StageWindow kNoviceWindow{0, 20};    // S0
inline constexpr StageWindow kTenuredWindow{100, 120};  // tenured reference

struct ShiftEntry {
  std::string word;
  double p0 = 0.0;    // smoothed proportion of S0 conversations containing word
  double pbar = 0.0;  // same for the tenured stage
  double shift = 0.0; // ln(pbar / p0)
};

// Add-one smoothed log-ratio of containment proportions:
// ln(((k_bar+1)/(n_bar+2)) / ((k0+1)/(n0+2))).
double smoothed_log_ratio(std::int64_t k0, std::int64_t n0, std::int64_t k_bar,
                          std::int64_t n_bar);

// Words used (in counselor messages, first 120 conversations) by at least
// min_user_fraction of the individuals with a full 120-conversation career.
std::set<std::string> core_vocabulary(const Corpus& corpus, double min_user_fraction = 0.2);

// Population usage shift of one word between S0 and the tenured stage,
// pooling conversations over all eligible individuals so each contributes to
// both sides. Throws NotFoundError for words never observed.
ShiftEntry usage_shift(const Corpus& corpus, const std::string& word);
ShiftEntry usage_shift_between(const Corpus& corpus, const std::string& word, StageWindow from,
                               StageWindow to);

struct HistogramBin {
  double bin_left = 0.0;
  int count = 0;
};

struct ShiftTable {
  std::vector<ShiftEntry> entries;       // sorted by shift
  std::vector<HistogramBin> histogram;   // fixed 0.1-wide bins over the observed range
  double bin_width = 0.1;
  double median = 0.0;
};

ShiftTable shift_table(const Corpus& corpus, const std::set<std::string>& vocab);
ShiftTable shift_table_between(const Corpus& corpus, const std::set<std::string>& vocab,
                               StageWindow from, StageWindow to);

void write_shift_table_csv(const ShiftTable& table, std::ostream& out);
void write_shift_hist_csv(const ShiftTable& table, std::ostream& out);

}  // namespace convodiv
