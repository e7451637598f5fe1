#include "convodiv/diversity.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "cell_pipeline.hpp"
#include "convodiv/errors.hpp"
#include "convodiv/format.hpp"
#include "convodiv/parallel.hpp"
#include "convodiv/rng.hpp"

namespace convodiv {

using detail::CellTokens;
using detail::compute_joint;
using detail::JointValue;
using detail::TokenInterner;

const char* to_string(Measure measure) {
  switch (measure) {
    case Measure::within: return "within";
    case Measure::between: return "between";
    default: return "relative";
  }
}

std::pair<std::vector<const Conversation*>, std::vector<const Conversation*>> interleaved_split(
    const LifeStage& stage) {
  if (stage.conversations.size() < 2)
    throw ParameterError("interleaved_split: stage needs at least 2 conversations");
  std::vector<const Conversation*> train, test;
  for (std::size_t i = 0; i < stage.conversations.size(); ++i) {
    (i % 2 == 0 ? train : test).push_back(&stage.conversations[i]);
  }
  return {std::move(train), std::move(test)};
}

namespace {

DiversityRecord make_record(const std::string& id, int stage_index, Measure m, double value,
                            const JointValue& v) {
  return DiversityRecord{id, stage_index, m, value, v.n_test_convs, v.n_samples};
}

// Shared eligibility checks for the single-cell entry points.
CellTokens build_checked_cell(const Individual& individual, int stage_index,
                              const DiversityConfig& cfg, TokenInterner& vocab, int width) {
  auto stage = stage_at(individual, stage_index, width);
  if (!stage)
    throw EligibilityError("individual '" + individual.individual_id + "' has no stage " +
                           std::to_string(stage_index));
  CellTokens cell = detail::build_cell(stage->conversations, detail::counselor_tokens, vocab,
                                       cfg.sampling.eval_budget);
  if (cell.n_cell_convs < 2)
    throw EligibilityError("stage " + std::to_string(stage_index) + " of '" +
                           individual.individual_id + "' has fewer than 2 conversations");
  if (static_cast<int>(cell.train_pool.size()) < cfg.sampling.train_budget)
    throw EligibilityError("insufficient train tokens in stage " + std::to_string(stage_index) +
                           " of '" + individual.individual_id + "'");
  if (static_cast<int>(cell.test_convs.size()) < cfg.min_test_convs)
    throw EligibilityError("no eligible test conversations in stage " +
                           std::to_string(stage_index) + " of '" + individual.individual_id + "'");
  return cell;
}

JointValue joint_with_peers(const Individual& individual, int stage_index,
                            std::span<const Individual* const> peers, const DiversityConfig& cfg,
                            std::mt19937_64& gen, int width) {
  cfg.sampling.validate();
  TokenInterner vocab;
  CellTokens cell = build_checked_cell(individual, stage_index, cfg, vocab, width);
  std::vector<CellTokens> storage;
  storage.reserve(peers.size());
  for (const Individual* p : peers) {
    if (p->individual_id == individual.individual_id) continue;
    if (cfg.peer_policy == PeerPolicy::same_cohort && p->cohort != individual.cohort) continue;
    auto stage = stage_at(*p, stage_index, width);
    if (!stage || stage->conversations.size() < 2) continue;
    CellTokens peer_cell = detail::build_cell(stage->conversations, detail::counselor_tokens, vocab,
                                              cfg.sampling.eval_budget);
    if (static_cast<int>(peer_cell.train_pool.size()) < cfg.sampling.train_budget) continue;
    storage.push_back(std::move(peer_cell));
  }
  std::vector<const CellTokens*> peer_cells;
  peer_cells.reserve(storage.size());
  for (const auto& c : storage) peer_cells.push_back(&c);
  if (peer_cells.empty())
    throw EligibilityError("no eligible peer for '" + individual.individual_id + "' at stage " +
                           std::to_string(stage_index));
  return compute_joint(cell, peer_cells, cfg.sampling, gen);
}

}  // namespace

DiversityRecord within_diversity(const Individual& individual, int stage_index,
                                 const DiversityConfig& cfg, std::mt19937_64& gen, int width) {
  cfg.sampling.validate();
  TokenInterner vocab;
  CellTokens cell = build_checked_cell(individual, stage_index, cfg, vocab, width);
  JointValue v = compute_joint(cell, {}, cfg.sampling, gen);
  return make_record(individual.individual_id, stage_index, Measure::within, v.within, v);
}

DiversityRecord between_diversity(const Individual& individual, int stage_index,
                                  std::span<const Individual* const> peers,
                                  const DiversityConfig& cfg, std::mt19937_64& gen, int width) {
  JointValue v = joint_with_peers(individual, stage_index, peers, cfg, gen, width);
  return make_record(individual.individual_id, stage_index, Measure::between, v.between, v);
}

DiversityRecord relative_diversity(const Individual& individual, int stage_index,
                                   std::span<const Individual* const> peers,
                                   const DiversityConfig& cfg, std::mt19937_64& gen, int width) {
  JointValue v = joint_with_peers(individual, stage_index, peers, cfg, gen, width);
  return make_record(individual.individual_id, stage_index, Measure::relative,
                     v.between - v.within, v);
}

DiversityResult compute_all(const Corpus& corpus, const DiversityConfig& cfg, std::uint64_t seed,
                            int threads, int width) {
  return compute_all_with_extractor(corpus, cfg, seed, detail::counselor_tokens, "diversity",
                                    threads, width);
}

DiversityResult compute_all_with_extractor(const Corpus& corpus, const DiversityConfig& cfg,
                                           std::uint64_t seed, const TokenExtractor& extractor,
                                           std::string_view rng_tag, int threads, int width) {
  cfg.sampling.validate();
  if (width < 2) throw ParameterError("stage width must be >= 2");

  std::vector<const Individual*> individuals;
  individuals.reserve(corpus.individuals.size());
  int max_stages = 0;
  for (const auto& [id, ind] : corpus.individuals) {
    individuals.push_back(&ind);
    max_stages = std::max(max_stages, ind.career_length() / width);
  }

  DiversityResult result;
  for (int stage_index = 0; stage_index < max_stages; ++stage_index) {
    // Tokenize every cell of this stage once; cells double as peer pools.
    TokenInterner vocab;
    std::vector<CellTokens> cells(individuals.size());
    std::vector<bool> has_stage(individuals.size(), false);
    for (std::size_t i = 0; i < individuals.size(); ++i) {
      auto stage = stage_at(*individuals[i], stage_index, width);
      if (!stage) continue;
      has_stage[i] = true;
      cells[i] = detail::build_cell(stage->conversations, extractor, vocab,
                                    cfg.sampling.eval_budget);
    }

    struct CellOutcome {
      bool computed = false;
      JointValue value;
      std::string skip_reason;
    };
    std::vector<CellOutcome> outcomes(individuals.size());

    parallel_for(individuals.size(), threads, [&](std::size_t i) {
      if (!has_stage[i]) return;
      const Individual& ind = *individuals[i];
      const CellTokens& cell = cells[i];
      auto& out = outcomes[i];
      if (cell.n_cell_convs < 2) {
        out.skip_reason = "fewer_than_2_conversations";
        return;
      }
      if (static_cast<int>(cell.train_pool.size()) < cfg.sampling.train_budget) {
        out.skip_reason = "insufficient_train_tokens";
        return;
      }
      if (static_cast<int>(cell.test_convs.size()) < cfg.min_test_convs) {
        out.skip_reason = "no_eligible_test_conversations";
        return;
      }
      std::vector<const CellTokens*> peers;
      for (std::size_t j = 0; j < individuals.size(); ++j) {
        if (j == i || !has_stage[j]) continue;
        if (cfg.peer_policy == PeerPolicy::same_cohort && individuals[j]->cohort != ind.cohort)
          continue;
        if (static_cast<int>(cells[j].train_pool.size()) < cfg.sampling.train_budget) continue;
        peers.push_back(&cells[j]);
      }
      auto gen = rng::substream(seed, rng_tag, ind.individual_id, stage_index);
      out.value = compute_joint(cell, peers, cfg.sampling, gen);
      out.computed = true;
    });

    for (std::size_t i = 0; i < individuals.size(); ++i) {
      if (!has_stage[i]) continue;
      const std::string& id = individuals[i]->individual_id;
      const auto& out = outcomes[i];
      if (!out.computed) {
        result.skipped.push_back({id, stage_index, out.skip_reason});
        continue;
      }
      const JointValue& v = out.value;
      result.records.push_back(make_record(id, stage_index, Measure::within, v.within, v));
      if (v.has_between) {
        result.records.push_back(make_record(id, stage_index, Measure::between, v.between, v));
        result.records.push_back(
            make_record(id, stage_index, Measure::relative, v.between - v.within, v));
      } else {
        result.skipped.push_back({id, stage_index, "no_eligible_peers"});
      }
    }
  }

  // Stage-major order above; re-sort to individual-major for stable output.
  std::sort(result.records.begin(), result.records.end(),
            [](const DiversityRecord& a, const DiversityRecord& b) {
              if (a.individual_id != b.individual_id) return a.individual_id < b.individual_id;
              if (a.stage_index != b.stage_index) return a.stage_index < b.stage_index;
              return static_cast<int>(a.measure) < static_cast<int>(b.measure);
            });
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkippedCell& a, const SkippedCell& b) {
              if (a.individual_id != b.individual_id) return a.individual_id < b.individual_id;
              if (a.stage_index != b.stage_index) return a.stage_index < b.stage_index;
              return a.reason < b.reason;
            });
  return result;
}

void write_diversity_csv(std::span<const DiversityRecord> records, std::ostream& out) {
  out << "individual_id,stage_index,measure,value_bits,n_test_convs,n_samples_used\n";
  for (const auto& r : records) {
    out << r.individual_id << ',' << r.stage_index << ',' << to_string(r.measure) << ','
        << format_double(r.value_bits) << ',' << r.n_test_convs << ',' << r.n_samples_used << '\n';
  }
}

void write_coverage_csv(std::span<const SkippedCell> skipped, std::ostream& out) {
  out << "individual_id,stage_index,reason\n";
  for (const auto& s : skipped) {
    out << s.individual_id << ',' << s.stage_index << ',' << s.reason << '\n';
  }
}

}  // namespace convodiv
