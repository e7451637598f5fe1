#include "convodiv/trends.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>

#include <json.hpp>

#include "convodiv/errors.hpp"
#include "convodiv/format.hpp"
#include "convodiv/rng.hpp"

namespace convodiv {

TrendCell increase_fraction(std::span<const DiversityRecord> records, Measure measure,
                            int stage_index, int tenured_index) {
  // value at stage_index and at the tenured stage, per individual
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> values;
  for (const auto& r : records) {
    if (r.measure != measure) continue;
    if (r.stage_index == stage_index) values[r.individual_id].first = r.value_bits;
    if (r.stage_index == tenured_index) values[r.individual_id].second = r.value_bits;
  }
  int n = 0, increases = 0;
  for (const auto& [id, pair] : values) {
    if (!pair.first || !pair.second) continue;
    ++n;
    if (*pair.second > *pair.first) ++increases;  // ties count as non-increase
  }
  if (n == 0)
    throw EligibilityError(std::string("no individual has ") + to_string(measure) +
                           " records at both stage " + std::to_string(stage_index) +
                           " and the tenured stage");
  TrendCell cell;
  cell.measure = measure;
  cell.stage_index = stage_index;
  cell.n = n;
  cell.frac_increase = static_cast<double>(increases) / static_cast<double>(n);
  cell.p_value = stats::binom_test_two_sided(increases, n, 0.5).p_value;
  return cell;
}

TrendHeatmap heatmap(const Corpus& corpus, const DiversityConfig& cfg, std::uint64_t seed,
                     int threads, int width) {
  TrendHeatmap grid;
  grid.tenured_index = tenured_stage_index(width);

  const DiversityResult whole = compute_all(corpus, cfg, seed, threads, width);
  const DiversityConfig comp_cfg = scaled_for_components(cfg);
  std::vector<DiversityResult> per_component;
  per_component.reserve(kNumComponents);
  for (int k = 0; k < kNumComponents; ++k) {
    per_component.push_back(
        component_diversity(corpus, component_from_index(k), comp_cfg, seed, threads, width));
  }

  auto add_row = [&](std::span<const DiversityRecord> records, std::optional<Component> component) {
    for (Measure measure : {Measure::within, Measure::between, Measure::relative}) {
      for (int stage = 0; stage < grid.tenured_index; ++stage) {
        TrendCell cell;
        try {
          cell = increase_fraction(records, measure, stage, grid.tenured_index);
        } catch (const EligibilityError&) {
          cell.measure = measure;
          cell.stage_index = stage;
          cell.empty = true;
          cell.frac_increase = std::numeric_limits<double>::quiet_NaN();
          cell.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        cell.component = component;
        grid.cells.push_back(cell);
      }
    }
  };

  add_row(whole.records, std::nullopt);
  for (int k = 0; k < kNumComponents; ++k)
    add_row(per_component[static_cast<std::size_t>(k)].records, component_from_index(k));
  return grid;
}

std::vector<SurfaceStageStats> surface_stats(const Corpus& corpus, std::uint64_t seed, int width,
                                             int n_resamples) {
  // Per individual and stage: mean words per counselor message and counselor
  // messages per conversation; stage means aggregate individuals.
  std::map<int, std::vector<double>> words_by_stage;
  std::map<int, std::vector<double>> msgs_by_stage;
  for (const auto& [id, ind] : corpus.individuals) {
    for (const auto& stage : partition(ind, width)) {
      std::int64_t n_msgs = 0, n_words = 0;
      for (const auto& conv : stage.conversations) {
        for (const auto& m : conv.messages) {
          if (m.role != SpeakerRole::counselor) continue;
          ++n_msgs;
          n_words += static_cast<std::int64_t>(tokenize(m.text).size());
        }
      }
      if (n_msgs == 0 || stage.conversations.empty()) continue;
      words_by_stage[stage.stage_index].push_back(static_cast<double>(n_words) /
                                                  static_cast<double>(n_msgs));
      msgs_by_stage[stage.stage_index].push_back(static_cast<double>(n_msgs) /
                                                 static_cast<double>(stage.conversations.size()));
    }
  }

  std::vector<SurfaceStageStats> rows;
  for (const auto& [stage_index, words] : words_by_stage) {
    const auto& msgs = msgs_by_stage[stage_index];
    SurfaceStageStats row;
    row.stage_index = stage_index;
    row.n_individuals = static_cast<int>(words.size());
    double sum_w = 0.0, sum_m = 0.0;
    for (double v : words) sum_w += v;
    for (double v : msgs) sum_m += v;
    row.mean_words_per_message = sum_w / words.size();
    row.mean_messages_per_conv = sum_m / msgs.size();
    auto gen = rng::substream(seed, "surface", stage_index);
    row.words_ci = stats::bootstrap_mean_ci(words, gen, n_resamples);
    row.messages_ci = stats::bootstrap_mean_ci(msgs, gen, n_resamples);
    rows.push_back(row);
  }
  return rows;
}

DurationCorrelation tenure_duration_correlation(const Corpus& corpus,
                                                std::span<const DiversityRecord> records,
                                                int width) {
  const int tenured = tenured_stage_index(width);
  const int last_conv = (tenured + 1) * width - 1;

  // Per-individual diversity change, tenured minus initial stage.
  std::map<std::string, std::map<Measure, std::pair<std::optional<double>, std::optional<double>>>>
      values;
  for (const auto& r : records) {
    if (r.stage_index == 0) values[r.individual_id][r.measure].first = r.value_bits;
    if (r.stage_index == tenured) values[r.individual_id][r.measure].second = r.value_bits;
  }

  DurationCorrelation result;
  std::map<std::string, double> durations;
  bool any_with_records = false;
  for (const auto& [id, by_measure] : values) {
    bool has_pair = false;
    for (const auto& [m, pair] : by_measure)
      if (pair.first && pair.second) has_pair = true;
    if (!has_pair) continue;
    any_with_records = true;
    const auto it = corpus.individuals.find(id);
    if (it == corpus.individuals.end()) continue;
    const Conversation* first = it->second.conversation_at(0);
    const Conversation* last = it->second.conversation_at(last_conv);
    if (!first || !last || !first->timestamp || !last->timestamp) {
      result.excluded.push_back(id);
      continue;
    }
    durations[id] = static_cast<double>(*last->timestamp - *first->timestamp);
  }
  if (!any_with_records)
    throw EligibilityError("no individual has both initial and tenured diversity records");
  if (durations.empty())
    throw EligibilityError("no eligible individual carries timestamps; excluded " +
                           std::to_string(result.excluded.size()));

  for (Measure measure : {Measure::within, Measure::between, Measure::relative}) {
    std::vector<double> xs, ys;
    for (const auto& [id, duration] : durations) {
      const auto& by_measure = values[id];
      auto it = by_measure.find(measure);
      if (it == by_measure.end() || !it->second.first || !it->second.second) continue;
      xs.push_back(duration);
      ys.push_back(*it->second.second - *it->second.first);
    }
    DurationCorrelation::Entry entry;
    entry.measure = measure;
    entry.n = static_cast<int>(xs.size());
    if (xs.size() >= 3) entry.rho = stats::spearman(xs, ys);
    result.by_measure.push_back(entry);
  }
  return result;
}

namespace {

std::string row_name(const std::optional<Component>& component) {
  return component ? to_string(*component) : "conversation";
}

}  // namespace

void write_heatmap_csv(const TrendHeatmap& heatmap, std::ostream& out) {
  out << "measure,row,stage_index,frac_increase,n,p_value,significant\n";
  for (const auto& cell : heatmap.cells) {
    out << to_string(cell.measure) << ',' << row_name(cell.component) << ',' << cell.stage_index
        << ',' << format_double(cell.frac_increase) << ',' << cell.n << ','
        << format_double(cell.p_value) << ',' << (cell.significant() ? 1 : 0) << '\n';
  }
}

void write_heatmap_json(const TrendHeatmap& heatmap, std::ostream& out) {
  nlohmann::ordered_json j;
  j["tenured_stage_index"] = heatmap.tenured_index;
  auto grid = nlohmann::ordered_json::object();
  for (const auto& cell : heatmap.cells) {
    nlohmann::ordered_json jc;
    jc["stage_index"] = cell.stage_index;
    jc["n"] = cell.n;
    jc["empty"] = cell.empty;
    if (!cell.empty) {
      jc["frac_increase"] = cell.frac_increase;
      jc["p_value"] = cell.p_value;
      jc["significant"] = cell.significant();
    }
    grid[to_string(cell.measure)][row_name(cell.component)].push_back(std::move(jc));
  }
  j["grid"] = std::move(grid);
  out << j.dump(2) << '\n';
}

void write_surface_stats_csv(std::span<const SurfaceStageStats> rows, std::ostream& out) {
  out << "stage_index,n_individuals,mean_words_per_counselor_message,words_ci_lo,words_ci_hi,"
         "mean_counselor_messages_per_conversation,messages_ci_lo,messages_ci_hi\n";
  for (const auto& r : rows) {
    out << r.stage_index << ',' << r.n_individuals << ',' << format_double(r.mean_words_per_message)
        << ',' << format_double(r.words_ci.lo) << ',' << format_double(r.words_ci.hi) << ','
        << format_double(r.mean_messages_per_conv) << ',' << format_double(r.messages_ci.lo) << ','
        << format_double(r.messages_ci.hi) << '\n';
  }
}

}  // namespace convodiv
