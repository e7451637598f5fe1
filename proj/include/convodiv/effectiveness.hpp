#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convodiv/corpus.hpp"
#include "convodiv/diversity.hpp"
#include "convodiv/stats.hpp"

namespace convodiv {

// Career-index windows (half-open) used by the effectiveness analyses.
struct CareerWindow {
  int start = 0;
  int end = 0;
};
inline constexpr CareerWindow kExperiencedWindow{80, 120};
inline constexpr CareerWindow kEarlierWindow{40, 80};
inline constexpr int kMinRatings = 4;

struct EffectivenessRecord {
  std::string individual_id;
  CareerWindow window;
  int n_ratings = 0;
  double frac_positive = 0.0;  // over rated conversations only
};

// Fraction of helpful ratings in the window; unrated conversations are
// ignored. Fewer than 4 ratings is ineligible.
EffectivenessRecord window_effectiveness(const Individual& individual, CareerWindow window);
std::optional<EffectivenessRecord> try_window_effectiveness(const Individual& individual,
                                                            CareerWindow window);

struct WindowDiversityValue {
  std::string individual_id;
  Measure measure = Measure::within;
  double value_bits = 0.0;
};

struct WindowDiversity {
  std::vector<WindowDiversityValue> values;
  std::vector<SkippedCell> skipped;  // stage_index carries window.start
};

// The stage machinery applied to an arbitrary career window: interleaved
// even/odd split, the same budgets, peers with an eligible same-window pool.
WindowDiversity window_diversity(const Corpus& corpus, CareerWindow window,
                                 const DiversityConfig& cfg, std::uint64_t seed, int threads = 1);

struct TercileComparison {
  Measure measure = Measure::within;
  CareerWindow diversity_window;
  CareerWindow effectiveness_window;
  int n = 0;             // individuals with both values
  int tercile_size = 0;  // floor(n/3)
  double mean_top = 0.0;
  double mean_bottom = 0.0;
  stats::TestResult mwu;  // two-sided, top vs bottom effectiveness samples
};

// Core aggregation: rank by diversity (ties broken by id), compare mean
// effectiveness of the top and bottom thirds.
TercileComparison tercile_compare(
    std::span<const std::pair<std::string, double>> diversity_by_individual,
    std::span<const std::pair<std::string, double>> effectiveness_by_individual);

// Drivers pairing window diversity with window effectiveness. Same windows
// give the contemporaneous comparison; decoupled windows give the lagged one.
TercileComparison compare_diversity_effectiveness(const Corpus& corpus, Measure measure,
                                                  CareerWindow diversity_window,
                                                  CareerWindow effectiveness_window,
                                                  const DiversityConfig& cfg, std::uint64_t seed,
                                                  int threads = 1);

void write_effectiveness_csv(std::span<const EffectivenessRecord> records, std::ostream& out);

}  // namespace convodiv
