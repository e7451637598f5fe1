#include "convodiv/effectiveness.hpp"

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

namespace {

std::span<const Conversation> window_span(const Individual& ind, CareerWindow window) {
  auto cmp = [](const Conversation& c, int idx) { return c.order_index < idx; };
  auto first =
      std::lower_bound(ind.conversations.begin(), ind.conversations.end(), window.start, cmp);
  auto last = std::lower_bound(first, ind.conversations.end(), window.end, cmp);
  return {&*first, static_cast<std::size_t>(last - first)};
}

}  // namespace

EffectivenessRecord window_effectiveness(const Individual& individual, CareerWindow window) {
  auto record = try_window_effectiveness(individual, window);
  if (!record)
    throw EligibilityError("individual '" + individual.individual_id + "' has fewer than " +
                           std::to_string(kMinRatings) + " ratings in conversations [" +
                           std::to_string(window.start) + "," + std::to_string(window.end) + ")");
  return *record;
}

std::optional<EffectivenessRecord> try_window_effectiveness(const Individual& individual,
                                                            CareerWindow window) {
  if (window.start < 0 || window.end <= window.start)
    throw ParameterError("career window must satisfy 0 <= start < end");
  int n_ratings = 0, n_positive = 0;
  for (const auto& conv : window_span(individual, window)) {
    if (conv.rating == Rating::none) continue;
    ++n_ratings;
    if (conv.rating == Rating::helpful) ++n_positive;
  }
  if (n_ratings < kMinRatings) return std::nullopt;
  EffectivenessRecord r;
  r.individual_id = individual.individual_id;
  r.window = window;
  r.n_ratings = n_ratings;
  r.frac_positive = static_cast<double>(n_positive) / static_cast<double>(n_ratings);
  return r;
}

WindowDiversity window_diversity(const Corpus& corpus, CareerWindow window,
                                 const DiversityConfig& cfg, std::uint64_t seed, int threads) {
  cfg.sampling.validate();
  if (window.start < 0 || window.end <= window.start)
    throw ParameterError("career window must satisfy 0 <= start < end");

  std::vector<const Individual*> individuals;
  individuals.reserve(corpus.individuals.size());
  for (const auto& [id, ind] : corpus.individuals) individuals.push_back(&ind);

  TokenInterner vocab;
  std::vector<CellTokens> cells(individuals.size());
  for (std::size_t i = 0; i < individuals.size(); ++i) {
    cells[i] = detail::build_cell(window_span(*individuals[i], window), detail::counselor_tokens,
                                  vocab, cfg.sampling.eval_budget);
  }

  struct CellOutcome {
    bool computed = false;
    JointValue value;
    std::string skip_reason;
  };
  std::vector<CellOutcome> outcomes(individuals.size());

  parallel_for(individuals.size(), threads, [&](std::size_t i) {
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
      if (j == i) continue;
      if (cfg.peer_policy == PeerPolicy::same_cohort && individuals[j]->cohort != ind.cohort)
        continue;
      if (static_cast<int>(cells[j].train_pool.size()) < cfg.sampling.train_budget) continue;
      peers.push_back(&cells[j]);
    }
    auto gen = rng::substream(seed, "window", window.start, window.end, ind.individual_id);
    out.value = compute_joint(cell, peers, cfg.sampling, gen);
    out.computed = true;
  });

  WindowDiversity result;
  for (std::size_t i = 0; i < individuals.size(); ++i) {
    const std::string& id = individuals[i]->individual_id;
    const auto& out = outcomes[i];
    if (!out.computed) {
      result.skipped.push_back({id, window.start, out.skip_reason});
      continue;
    }
    const JointValue& v = out.value;
    result.values.push_back({id, Measure::within, v.within});
    if (v.has_between) {
      result.values.push_back({id, Measure::between, v.between});
      result.values.push_back({id, Measure::relative, v.between - v.within});
    } else {
      result.skipped.push_back({id, window.start, "no_eligible_peers"});
    }
  }
  return result;
}

TercileComparison tercile_compare(
    std::span<const std::pair<std::string, double>> diversity_by_individual,
    std::span<const std::pair<std::string, double>> effectiveness_by_individual) {
  std::map<std::string, double> effectiveness;
  for (const auto& [id, v] : effectiveness_by_individual) effectiveness.emplace(id, v);

  // Individuals with both values, ranked by diversity (ties broken by id).
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [id, v] : diversity_by_individual) {
    if (effectiveness.count(id)) ranked.emplace_back(id, v);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });

  const int n = static_cast<int>(ranked.size());
  if (n < 3) throw EligibilityError("tercile comparison needs at least 3 eligible individuals");
  const int k = n / 3;

  std::vector<double> bottom, top;
  for (int i = 0; i < k; ++i) bottom.push_back(effectiveness.at(ranked[i].first));
  for (int i = n - k; i < n; ++i) top.push_back(effectiveness.at(ranked[i].first));

  TercileComparison cmp;
  cmp.n = n;
  cmp.tercile_size = k;
  double sum_top = 0.0, sum_bottom = 0.0;
  for (double v : top) sum_top += v;
  for (double v : bottom) sum_bottom += v;
  cmp.mean_top = sum_top / k;
  cmp.mean_bottom = sum_bottom / k;
  cmp.mwu = stats::mann_whitney_u(top, bottom);
  return cmp;
}

TercileComparison compare_diversity_effectiveness(const Corpus& corpus, Measure measure,
                                                  CareerWindow diversity_window,
                                                  CareerWindow effectiveness_window,
                                                  const DiversityConfig& cfg, std::uint64_t seed,
                                                  int threads) {
  const WindowDiversity diversity = window_diversity(corpus, diversity_window, cfg, seed, threads);
  std::vector<std::pair<std::string, double>> div_values;
  for (const auto& v : diversity.values) {
    if (v.measure == measure) div_values.emplace_back(v.individual_id, v.value_bits);
  }
  std::vector<std::pair<std::string, double>> eff_values;
  for (const auto& [id, ind] : corpus.individuals) {
    if (auto r = try_window_effectiveness(ind, effectiveness_window))
      eff_values.emplace_back(id, r->frac_positive);
  }
  TercileComparison cmp = tercile_compare(div_values, eff_values);
  cmp.measure = measure;
  cmp.diversity_window = diversity_window;
  cmp.effectiveness_window = effectiveness_window;
  return cmp;
}

void write_effectiveness_csv(std::span<const EffectivenessRecord> records, std::ostream& out) {
  out << "individual_id,window_start,window_end,n_ratings,frac_positive\n";
  for (const auto& r : records) {
    out << r.individual_id << ',' << r.window.start << ',' << r.window.end << ',' << r.n_ratings
        << ',' << format_double(r.frac_positive) << '\n';
  }
}

}  // namespace convodiv
