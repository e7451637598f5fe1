#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "convodiv/corpus.hpp"
#include "convodiv/langmodel.hpp"
#include "convodiv/lifestage.hpp"

namespace convodiv {

enum class Measure { within, between, relative };
const char* to_string(Measure measure);

struct DiversityRecord {
  std::string individual_id;
  int stage_index = 0;
  Measure measure = Measure::within;
  double value_bits = 0.0;  // relative may be negative
  int n_test_convs = 0;
  int n_samples_used = 0;
};

enum class PeerPolicy { same_cohort, any };

struct DiversityConfig {
  SamplingParams sampling;
  int min_test_convs = 1;
  PeerPolicy peer_policy = PeerPolicy::same_cohort;
};

// A cell that could not be computed and why; surfaced instead of biasing
// estimates by sampling with replacement.
struct SkippedCell {
  std::string individual_id;
  int stage_index = 0;
  std::string reason;
};

struct DiversityResult {
  std::vector<DiversityRecord> records;
  std::vector<SkippedCell> skipped;
};

// Even positions of the order-sorted stage go to train, odd to test.
std::pair<std::vector<const Conversation*>, std::vector<const Conversation*>> interleaved_split(
    const LifeStage& stage);

// Single-cell measures, scoring counselor tokens. Throw EligibilityError when
// the cell's data requirements are not met. Peers are candidate individuals;
// cohort and budget eligibility are applied internally.
DiversityRecord within_diversity(const Individual& individual, int stage_index,
                                 const DiversityConfig& cfg, std::mt19937_64& gen,
                                 int width = kDefaultStageWidth);
DiversityRecord between_diversity(const Individual& individual, int stage_index,
                                  std::span<const Individual* const> peers,
                                  const DiversityConfig& cfg, std::mt19937_64& gen,
                                  int width = kDefaultStageWidth);
DiversityRecord relative_diversity(const Individual& individual, int stage_index,
                                   std::span<const Individual* const> peers,
                                   const DiversityConfig& cfg, std::mt19937_64& gen,
                                   int width = kDefaultStageWidth);

// All measures for every eligible (individual, stage) cell. Deterministic for
// a fixed seed regardless of `threads`: each cell draws from its own RNG
// substream keyed by individual id and stage.
DiversityResult compute_all(const Corpus& corpus, const DiversityConfig& cfg, std::uint64_t seed,
                            int threads = 1, int width = kDefaultStageWidth);

// Token source for one conversation; lets the segmentation module run the
// same pipeline on per-component token pools.
using TokenExtractor = std::function<std::vector<std::string>(const Conversation&)>;

DiversityResult compute_all_with_extractor(const Corpus& corpus, const DiversityConfig& cfg,
                                           std::uint64_t seed, const TokenExtractor& extractor,
                                           std::string_view rng_tag, int threads = 1,
                                           int width = kDefaultStageWidth);

void write_diversity_csv(std::span<const DiversityRecord> records, std::ostream& out);
void write_coverage_csv(std::span<const SkippedCell> skipped, std::ostream& out);

}  // namespace convodiv
