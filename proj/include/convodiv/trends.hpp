#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convodiv/diversity.hpp"
#include "convodiv/segmentation.hpp"
#include "convodiv/stats.hpp"

namespace convodiv {

inline constexpr double kSignificanceLevel = 0.05;

struct TrendCell {
  Measure measure = Measure::within;
  std::optional<Component> component;  // absent = whole conversation
  int stage_index = 0;
  double frac_increase = 0.0;
  int n = 0;
  double p_value = 1.0;
  bool empty = false;  // no individual had records at both stages

  bool significant() const { return !empty && p_value < kSignificanceLevel; }
};

// Fraction of individuals whose measure at the tenured stage strictly exceeds
// its value at stage_index, over individuals with records at both; exact
// two-sided binomial p against 0.5. Ties count as non-increase.
TrendCell increase_fraction(std::span<const DiversityRecord> records, Measure measure,
                            int stage_index, int tenured_index = 5);

struct TrendHeatmap {
  std::vector<TrendCell> cells;  // rows: whole + 5 components; columns: stages
  int tenured_index = 5;
};

// Full grid per measure: the whole-conversation row uses the given budgets,
// component rows run the same pipeline at fifth-scaled budgets.
TrendHeatmap heatmap(const Corpus& corpus, const DiversityConfig& cfg, std::uint64_t seed,
                     int threads = 1, int width = kDefaultStageWidth);

struct SurfaceStageStats {
  int stage_index = 0;
  int n_individuals = 0;
  double mean_words_per_message = 0.0;
  stats::Interval words_ci;
  double mean_messages_per_conv = 0.0;
  stats::Interval messages_ci;
};

// Per-stage surface statistics of counselor language with bootstrap 95%
// intervals (resampling individuals); the null check behind "no systematic
// change in message length".
std::vector<SurfaceStageStats> surface_stats(const Corpus& corpus, std::uint64_t seed,
                                             int width = kDefaultStageWidth,
                                             int n_resamples = 1000);

struct DurationCorrelation {
  struct Entry {
    Measure measure = Measure::within;
    std::optional<double> rho;  // nullopt when ranks are degenerate
    int n = 0;
  };
  std::vector<Entry> by_measure;
  std::vector<std::string> excluded;  // individuals without usable timestamps
};

// Spearman correlation between the time an individual took to reach tenure
// and their tenured-vs-initial diversity change, per measure.
DurationCorrelation tenure_duration_correlation(const Corpus& corpus,
                                                std::span<const DiversityRecord> records,
                                                int width = kDefaultStageWidth);

void write_heatmap_csv(const TrendHeatmap& heatmap, std::ostream& out);
void write_heatmap_json(const TrendHeatmap& heatmap, std::ostream& out);
void write_surface_stats_csv(std::span<const SurfaceStageStats> rows, std::ostream& out);

}  // namespace convodiv
