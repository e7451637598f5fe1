#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "convodiv/corpus.hpp"
#include "convodiv/diversity.hpp"
#include "convodiv/effectiveness.hpp"
#include "convodiv/errors.hpp"
#include "convodiv/probe.hpp"
#include "convodiv/rng.hpp"
#include "convodiv/segmentation.hpp"
#include "convodiv/stats.hpp"
#include "convodiv/synthgen.hpp"
#include "convodiv/trends.hpp"
#include "convodiv/usage_shift.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitEligibilityEmpty = 2;
constexpr int kExitUsage = 64;

using convodiv::Corpus;
using convodiv::CorpusFilters;
using convodiv::DiversityConfig;
using convodiv::Measure;
using nlohmann::ordered_json;

struct CommonOpts {
  std::string input;
  std::string output_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  CorpusFilters filters;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_input = true) {
  if (needs_input)
    cmd->add_option("--input", opts.input, "corpus JSONL file")->required();
  cmd->add_option("--output-dir", opts.output_dir, "directory for emitted files")->required();
  cmd->add_option("--seed", opts.seed, "root RNG seed");
  cmd->add_option("--threads", opts.threads, "worker threads (never changes values)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-counselor-messages", opts.filters.min_counselor_messages,
                  "conversation eligibility filter");
  cmd->add_option("--min-conversations", opts.filters.min_conversations,
                  "individual eligibility filter");
}

struct DiversityOpts {
  int train_budget = 2000;
  int eval_budget = 200;
  int samples = 50;
  int min_test_convs = 1;
  std::string peer_policy = "same_cohort";
  int width = 20;
};

void add_diversity_opts(CLI::App* cmd, DiversityOpts& opts, int default_train, int default_eval) {
  opts.train_budget = default_train;
  opts.eval_budget = default_eval;
  cmd->add_option("--train-budget", opts.train_budget, "tokens per language model (W)");
  cmd->add_option("--eval-budget", opts.eval_budget, "tokens scored per conversation (w)");
  cmd->add_option("--samples", opts.samples, "resampling iterations");
  cmd->add_option("--min-test-convs", opts.min_test_convs, "minimum eligible test conversations");
  cmd->add_option("--peer-policy", opts.peer_policy, "same_cohort or any")
      ->check(CLI::IsMember({"same_cohort", "any"}));
  cmd->add_option("--width", opts.width, "life-stage width in conversations");
}

DiversityConfig to_config(const DiversityOpts& opts) {
  DiversityConfig cfg;
  cfg.sampling.train_budget = opts.train_budget;
  cfg.sampling.eval_budget = opts.eval_budget;
  cfg.sampling.n_samples = opts.samples;
  cfg.min_test_convs = opts.min_test_convs;
  cfg.peer_policy = opts.peer_policy == "any" ? convodiv::PeerPolicy::any
                                              : convodiv::PeerPolicy::same_cohort;
  return cfg;
}

ordered_json config_json(const CommonOpts& common, const DiversityOpts* div) {
  ordered_json j;
  j["min_counselor_messages"] = common.filters.min_counselor_messages;
  j["min_conversations"] = common.filters.min_conversations;
  if (div) {
    j["train_budget"] = div->train_budget;
    j["eval_budget"] = div->eval_budget;
    j["samples"] = div->samples;
    j["min_test_convs"] = div->min_test_convs;
    j["peer_policy"] = div->peer_policy;
    j["width"] = div->width;
  }
  return j;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const CommonOpts& common)
      : command_(std::move(command)), common_(common), start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(common.output_dir);
  }

  void add_output(const std::string& name) { outputs_.push_back(name); }

  std::ofstream open(const std::string& name) {
    add_output(name);
    const auto path = std::filesystem::path(common_.output_dir) / name;
    std::ofstream out(path);
    if (!out) throw convodiv::Error("cannot open output file: " + path.string());
    return out;
  }

  void finish(ordered_json config) {
    const double wall = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start_).count();
    ordered_json j;
    j["command"] = command_;
    j["tool_version"] = kVersion;
    j["seed"] = common_.seed;
    j["threads"] = common_.threads;
    if (!common_.input.empty()) j["input"] = common_.input;
    j["output_dir"] = common_.output_dir;
    j["config"] = std::move(config);
    j["outputs"] = outputs_;
    j["wall_time_secs"] = wall;
    std::ofstream out(std::filesystem::path(common_.output_dir) / "manifest.json");
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  const CommonOpts& common_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

ordered_json comparison_json(const convodiv::TercileComparison& cmp) {
  ordered_json j;
  j["measure"] = to_string(cmp.measure);
  j["diversity_window"] = {cmp.diversity_window.start, cmp.diversity_window.end};
  j["effectiveness_window"] = {cmp.effectiveness_window.start, cmp.effectiveness_window.end};
  j["n"] = cmp.n;
  j["tercile_size"] = cmp.tercile_size;
  j["mean_top"] = cmp.mean_top;
  j["mean_bottom"] = cmp.mean_bottom;
  j["u_statistic"] = cmp.mwu.statistic;
  j["p_value"] = cmp.mwu.p_value;
  return j;
}

// ---- subcommands -----------------------------------------------------------

int run_simulate(const CommonOpts& common, convodiv::GenConfig config,
                 const std::string& preset) {
  ManifestWriter manifest("simulate", common);
  config.seed = common.seed;
  const auto profiles = convodiv::make_preset_profiles(config, preset);
  const auto generated = convodiv::generate(config, profiles);
  {
    auto out = manifest.open("corpus.jsonl");
    convodiv::write_corpus(generated.corpus, out);
  }
  {
    auto out = manifest.open("ground_truth.json");
    convodiv::write_ground_truth_json(generated.truth, out);
  }
  ordered_json cfg;
  cfg["preset"] = preset;
  cfg["n_agents"] = config.n_agents;
  cfg["convs_per_agent"] = config.convs_per_agent;
  cfg["messages_per_conv_mean"] = config.messages_per_conv_mean;
  cfg["messages_floor"] = config.messages_floor;
  cfg["words_per_message_mean"] = config.words_per_message_mean;
  cfg["words_floor"] = config.words_floor;
  cfg["vocab_size"] = config.vocab_size;
  cfg["zipf_exponent"] = config.zipf_exponent;
  cfg["n_topics"] = config.n_topics;
  cfg["rating_rate"] = config.rating_rate;
  cfg["rating_positivity_base"] = config.rating_positivity_base;
  cfg["rating_skill_gain"] = config.rating_skill_gain;
  cfg["n_cohorts"] = config.n_cohorts;
  manifest.finish(std::move(cfg));
  return kExitOk;
}

int run_diversity(const CommonOpts& common, const DiversityOpts& opts) {
  ManifestWriter manifest("diversity", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  const auto result =
      convodiv::compute_all(corpus, to_config(opts), common.seed, common.threads, opts.width);
  {
    auto out = manifest.open("diversity.csv");
    convodiv::write_diversity_csv(result.records, out);
  }
  {
    auto out = manifest.open("coverage.csv");
    convodiv::write_coverage_csv(result.skipped, out);
  }
  manifest.finish(config_json(common, &opts));
  return result.records.empty() ? kExitEligibilityEmpty : kExitOk;
}

int run_components(const CommonOpts& common, const DiversityOpts& opts, double threshold) {
  ManifestWriter manifest("components", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  const auto cfg = to_config(opts);

  bool any_records = false;
  {
    auto out = manifest.open("component_diversity.csv");
    auto cov = manifest.open("component_coverage.csv");
    bool header = true;
    cov << "individual_id,stage_index,component,reason\n";
    for (int k = 0; k < convodiv::kNumComponents; ++k) {
      const auto component = convodiv::component_from_index(k);
      const auto result =
          convodiv::component_diversity(corpus, component, cfg, common.seed, common.threads,
                                        opts.width);
      convodiv::write_component_diversity_csv(result.records, component, out, header);
      header = false;
      for (const auto& s : result.skipped) {
        cov << s.individual_id << ',' << s.stage_index << ',' << to_string(component) << ','
            << s.reason << '\n';
      }
      any_records = any_records || !result.records.empty();
    }
  }
  {
    auto out = manifest.open("characteristic_words.csv");
    bool header = true;
    for (int k = 0; k < convodiv::kNumComponents; ++k) {
      const auto component = convodiv::component_from_index(k);
      const auto words = convodiv::characteristic_words(corpus, component, threshold);
      convodiv::write_characteristic_words_csv(words, out, header);
      header = false;
    }
  }
  auto cfg_json = config_json(common, &opts);
  cfg_json["characteristic_threshold"] = threshold;
  manifest.finish(std::move(cfg_json));
  return any_records ? kExitOk : kExitEligibilityEmpty;
}

int run_trends(const CommonOpts& common, const DiversityOpts& opts) {
  ManifestWriter manifest("trends", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  const auto cfg = to_config(opts);

  const auto grid = convodiv::heatmap(corpus, cfg, common.seed, common.threads, opts.width);
  {
    auto out = manifest.open("trend_heatmap.csv");
    convodiv::write_heatmap_csv(grid, out);
  }
  {
    auto out = manifest.open("trend_heatmap.json");
    convodiv::write_heatmap_json(grid, out);
  }
  {
    auto out = manifest.open("surface_stats.csv");
    const auto rows = convodiv::surface_stats(corpus, common.seed, opts.width);
    convodiv::write_surface_stats_csv(rows, out);
  }
  {
    // The correlation needs whole-conversation records; recompute with the
    // same substreams, so values match diversity.csv for the same seed.
    const auto diversity =
        convodiv::compute_all(corpus, cfg, common.seed, common.threads, opts.width);
    auto out = manifest.open("duration_correlation.json");
    ordered_json j;
    try {
      const auto corr = convodiv::tenure_duration_correlation(corpus, diversity.records,
                                                              opts.width);
      j["status"] = "ok";
      auto rows = ordered_json::array();
      for (const auto& e : corr.by_measure) {
        ordered_json row;
        row["measure"] = to_string(e.measure);
        row["n"] = e.n;
        if (e.rho)
          row["rho"] = *e.rho;
        else
          row["rho"] = "not_applicable";
        rows.push_back(std::move(row));
      }
      j["by_measure"] = std::move(rows);
      j["excluded_individuals"] = corr.excluded;
    } catch (const convodiv::EligibilityError& e) {
      j["status"] = "ineligible";
      j["reason"] = e.what();
    }
    out << j.dump(2) << '\n';
  }
  bool any = false;
  for (const auto& cell : grid.cells) any = any || !cell.empty;
  manifest.finish(config_json(common, &opts));
  return any ? kExitOk : kExitEligibilityEmpty;
}

int run_shift(const CommonOpts& common, double min_user_fraction, std::optional<int> component,
              double threshold) {
  ManifestWriter manifest("shift", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  auto vocab = convodiv::core_vocabulary(corpus, min_user_fraction);
  if (component) {
    // Restrict the table to words characteristic of one component.
    const auto words =
        convodiv::characteristic_words(corpus, convodiv::component_from_index(*component),
                                       threshold);
    std::set<std::string> restricted;
    for (const auto& w : words)
      if (vocab.count(w.word)) restricted.insert(w.word);
    vocab = std::move(restricted);
  }

  ordered_json cfg;
  cfg["min_user_fraction"] = min_user_fraction;
  cfg["core_vocabulary_size"] = vocab.size();
  if (component) {
    cfg["component"] = *component;
    cfg["characteristic_threshold"] = threshold;
  }

  if (vocab.empty()) {
    manifest.finish(std::move(cfg));
    return kExitEligibilityEmpty;
  }
  const auto table = convodiv::shift_table(corpus, vocab);
  {
    auto out = manifest.open("shift_table.csv");
    convodiv::write_shift_table_csv(table, out);
  }
  {
    auto out = manifest.open("shift_hist.csv");
    convodiv::write_shift_hist_csv(table, out);
  }
  {
    auto out = manifest.open("shift_summary.json");
    ordered_json j;
    j["n_words"] = table.entries.size();
    j["median_shift"] = table.median;
    j["bin_width"] = table.bin_width;
    out << j.dump(2) << '\n';
  }
  manifest.finish(std::move(cfg));
  return kExitOk;
}

int run_effectiveness(const CommonOpts& common, const DiversityOpts& opts) {
  ManifestWriter manifest("effectiveness", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  const auto cfg = to_config(opts);

  std::vector<convodiv::EffectivenessRecord> records;
  for (const auto& [id, ind] : corpus.individuals) {
    if (auto r = convodiv::try_window_effectiveness(ind, convodiv::kExperiencedWindow))
      records.push_back(*r);
  }
  {
    auto out = manifest.open("effectiveness.csv");
    convodiv::write_effectiveness_csv(records, out);
  }

  bool any_comparison = false;
  {
    auto out = manifest.open("effectiveness.json");
    ordered_json j;
    j["n_records"] = records.size();
    for (const char* kind : {"tercile", "lagged"}) {
      const auto div_window = std::string(kind) == "tercile" ? convodiv::kExperiencedWindow
                                                             : convodiv::kEarlierWindow;
      ordered_json by_measure;
      for (Measure m : {Measure::within, Measure::between, Measure::relative}) {
        try {
          const auto cmp = convodiv::compare_diversity_effectiveness(
              corpus, m, div_window, convodiv::kExperiencedWindow, cfg, common.seed,
              common.threads);
          by_measure[to_string(m)] = comparison_json(cmp);
          any_comparison = true;
        } catch (const convodiv::EligibilityError& e) {
          by_measure[to_string(m)] = {{"status", "ineligible"}, {"reason", e.what()}};
        }
      }
      j[kind] = std::move(by_measure);
    }
    out << j.dump(2) << '\n';
  }
  manifest.finish(config_json(common, &opts));
  return (records.empty() && !any_comparison) ? kExitEligibilityEmpty : kExitOk;
}

int run_probe(const CommonOpts& common, const std::string& role, double fraction, int folds,
              int epochs) {
  ManifestWriter manifest("probe", common);
  const Corpus corpus = convodiv::parse_corpus(common.input, common.filters);
  convodiv::ProbeConfig cfg;
  cfg.role = role == "texter" ? convodiv::SpeakerRole::texter : convodiv::SpeakerRole::counselor;
  cfg.k_folds = folds;
  cfg.epochs = epochs;

  auto gen = convodiv::rng::substream(common.seed, "probe", role);
  const auto pairs = convodiv::build_pairs(corpus, fraction, gen);
  if (pairs.empty()) {
    manifest.finish(config_json(common, nullptr));
    return kExitEligibilityEmpty;
  }
  const auto report = convodiv::grouped_cv_accuracy(pairs, cfg, gen);
  {
    auto out = manifest.open("probe_report.json");
    convodiv::write_probe_report_json(report, out);
  }
  auto cfg_json = config_json(common, nullptr);
  cfg_json["role"] = role;
  cfg_json["sample_fraction"] = fraction;
  cfg_json["k_folds"] = folds;
  cfg_json["epochs"] = epochs;
  manifest.finish(std::move(cfg_json));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convodiv: longitudinal linguistic diversification of conversation corpora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // simulate
  CommonOpts sim_common;
  convodiv::GenConfig gen_config;
  std::string preset = "mixed";
  auto* sim = app.add_subcommand("simulate", "generate a synthetic corpus with ground truth");
  add_common(sim, sim_common, /*needs_input=*/false);
  sim->add_option("--preset", preset,
                  "null|static|diversifying|mixed|idiolect|component-drift|lexical|strong-drift|"
                  "effectiveness");
  sim->add_option("--agents", gen_config.n_agents, "number of agents");
  sim->add_option("--convs", gen_config.convs_per_agent, "conversations per agent");
  sim->add_option("--messages-mean", gen_config.messages_per_conv_mean,
                  "mean counselor messages per conversation");
  sim->add_option("--messages-floor", gen_config.messages_floor, "minimum counselor messages");
  sim->add_option("--words-mean", gen_config.words_per_message_mean, "mean words per message");
  sim->add_option("--words-floor", gen_config.words_floor, "minimum words per message");
  sim->add_option("--vocab-size", gen_config.vocab_size, "shared vocabulary size");
  sim->add_option("--zipf", gen_config.zipf_exponent, "Zipf exponent of the shared vocabulary");
  sim->add_option("--topics", gen_config.n_topics, "topic count");
  sim->add_option("--cohorts", gen_config.n_cohorts, "distinct start-month cohorts");
  sim->add_option("--rating-rate", gen_config.rating_rate, "fraction of conversations rated");
  sim->add_option("--positivity", gen_config.rating_positivity_base,
                  "baseline positive-rating probability");
  sim->add_option("--skill-gain", gen_config.rating_skill_gain,
                  "logistic gain linking skill to rating positivity");

  // diversity
  CommonOpts div_common;
  DiversityOpts div_opts;
  auto* div = app.add_subcommand("diversity", "within/between/relative diversity records");
  add_common(div, div_common);
  add_diversity_opts(div, div_opts, 2000, 200);

  // components
  CommonOpts comp_common;
  DiversityOpts comp_opts;
  double comp_threshold = convodiv::kCharacteristicThreshold;
  auto* comp = app.add_subcommand("components",
                                  "per-fifth diversity records and characteristic words");
  add_common(comp, comp_common);
  add_diversity_opts(comp, comp_opts, 400, 40);
  comp->add_option("--threshold", comp_threshold, "characteristic-word log-ratio threshold");

  // trends
  CommonOpts trend_common;
  DiversityOpts trend_opts;
  auto* trend = app.add_subcommand(
      "trends", "diversification heatmap, surface stats, duration correlation");
  add_common(trend, trend_common);
  add_diversity_opts(trend, trend_opts, 2000, 200);

  // shift
  CommonOpts shift_common;
  double min_user_fraction = 0.2;
  double shift_threshold = convodiv::kCharacteristicThreshold;
  int shift_component = -1;
  auto* shift = app.add_subcommand("shift", "core vocabulary usage shifts and histogram");
  add_common(shift, shift_common);
  shift->add_option("--min-user-fraction", min_user_fraction,
                    "core vocabulary user-fraction threshold");
  shift->add_option("--component", shift_component,
                    "restrict to words characteristic of this component (0-4)")
      ->check(CLI::Range(0, 4));
  shift->add_option("--threshold", shift_threshold, "characteristic-word log-ratio threshold");

  // effectiveness
  CommonOpts eff_common;
  DiversityOpts eff_opts;
  auto* eff = app.add_subcommand("effectiveness",
                                 "rating-based effectiveness, tercile and lagged comparisons");
  add_common(eff, eff_common);
  add_diversity_opts(eff, eff_opts, 2000, 200);

  // probe
  CommonOpts probe_common;
  std::string probe_role = "counselor";
  double probe_fraction = 0.1;
  int probe_folds = 10;
  int probe_epochs = 400;
  auto* probe = app.add_subcommand("probe", "paired new-vs-tenured classification check");
  add_common(probe, probe_common);
  probe->add_option("--role", probe_role, "counselor or texter")
      ->check(CLI::IsMember({"counselor", "texter"}));
  probe->add_option("--fraction", probe_fraction, "fraction of eligible individuals sampled");
  probe->add_option("--folds", probe_folds, "cross-validation folds");
  probe->add_option("--epochs", probe_epochs, "classifier training epochs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_common, gen_config, preset);
    if (div->parsed()) return run_diversity(div_common, div_opts);
    if (comp->parsed()) return run_components(comp_common, comp_opts, comp_threshold);
    if (trend->parsed()) return run_trends(trend_common, trend_opts);
    if (shift->parsed())
      return run_shift(shift_common, min_user_fraction,
                       shift_component >= 0 ? std::optional<int>(shift_component) : std::nullopt,
                       shift_threshold);
    if (eff->parsed()) return run_effectiveness(eff_common, eff_opts);
    if (probe->parsed()) return run_probe(probe_common, probe_role, probe_fraction, probe_folds,
                                          probe_epochs);
  } catch (const convodiv::EligibilityError& e) {
    std::cerr << "eligibility: " << e.what() << '\n';
    return kExitEligibilityEmpty;
  } catch (const convodiv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
