#include "convodiv/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "convodiv/errors.hpp"
#include "convodiv/lifestage.hpp"
#include "convodiv/rng.hpp"

namespace convodiv {

namespace {

constexpr int kNoviceEnd = 20;  // S0: conversations [0, 20)

std::vector<const Conversation*> window_convs(const Individual& ind, int lo, int hi) {
  std::vector<const Conversation*> out;
  for (const auto& c : ind.conversations) {
    if (c.order_index >= lo && c.order_index < hi) out.push_back(&c);
  }
  return out;
}

}  // namespace

std::vector<ConversationPair> build_pairs(const Corpus& corpus, double sample_fraction,
                                          std::mt19937_64& gen) {
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0))
    throw ParameterError("sample_fraction must be in (0,1]");
  const int tenured_start = kTenuredStartConversation;
  const int tenured_end = tenured_start + kDefaultStageWidth;

  struct Candidate {
    const Individual* individual;
    std::vector<const Conversation*> novice;
    std::vector<const Conversation*> tenured;
  };
  std::vector<Candidate> eligible;
  for (const auto& [id, ind] : corpus.individuals) {
    if (ind.career_length() < tenured_end) continue;
    Candidate c{&ind, window_convs(ind, 0, kNoviceEnd),
                window_convs(ind, tenured_start, tenured_end)};
    if (c.novice.empty() || c.tenured.empty()) continue;
    eligible.push_back(std::move(c));
  }
  if (eligible.empty()) return {};

  const std::size_t n_take = static_cast<std::size_t>(
      std::ceil(sample_fraction * static_cast<double>(eligible.size()) - 1e-9));
  const auto picks = rng::sample_indices(gen, eligible.size(), std::min(n_take, eligible.size()));

  std::vector<ConversationPair> pairs;
  pairs.reserve(picks.size());
  for (std::size_t idx : picks) {
    const Candidate& c = eligible[idx];
    ConversationPair p;
    p.individual_id = c.individual->individual_id;
    p.novice = c.novice[rng::uniform_below(gen, c.novice.size())];
    p.tenured = c.tenured[rng::uniform_below(gen, c.tenured.size())];
    pairs.push_back(p);
  }
  // Stable order for downstream fold assignment.
  std::sort(pairs.begin(), pairs.end(), [](const ConversationPair& a, const ConversationPair& b) {
    return a.individual_id < b.individual_id;
  });
  return pairs;
}

std::vector<std::pair<std::string, int>> message_bigram_counts(const Conversation& conv,
                                                               SpeakerRole role) {
  std::map<std::string, int> counts;
  for (const auto& m : conv.messages) {
    if (m.role != role) continue;
    const auto tokens = tokenize(m.text);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      ++counts[tokens[i] + ' ' + tokens[i + 1]];
    }
  }
  return {counts.begin(), counts.end()};
}

BigramVocabulary fit_bigram_vocabulary(std::span<const Conversation* const> docs, SpeakerRole role,
                                       int max_features, double max_doc_freq) {
  if (max_features < 1) throw ParameterError("max_features must be >= 1");
  struct Stats {
    std::int64_t df = 0;
    std::int64_t total = 0;
  };
  std::map<std::string, Stats> stats;
  for (const Conversation* conv : docs) {
    for (const auto& [bigram, count] : message_bigram_counts(*conv, role)) {
      auto& s = stats[bigram];
      ++s.df;
      s.total += count;
    }
  }
  const int n_docs = static_cast<int>(docs.size());

  // Document-frequency cap, then the most frequent bigrams overall
  // (ties broken lexicographically).
  std::vector<std::pair<std::string, Stats>> kept;
  for (const auto& [bigram, s] : stats) {
    if (static_cast<double>(s.df) > max_doc_freq * n_docs + 1e-9) continue;
    kept.emplace_back(bigram, s);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.total != b.second.total) return a.second.total > b.second.total;
    return a.first < b.first;
  });
  if (static_cast<int>(kept.size()) > max_features)
    kept.resize(static_cast<std::size_t>(max_features));

  BigramVocabulary vocab;
  vocab.n_docs = n_docs;
  vocab.idf.reserve(kept.size());
  int next_id = 0;
  for (const auto& [bigram, s] : kept) {
    vocab.ids.emplace(bigram, next_id++);
    vocab.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(s.df))) + 1.0);
  }
  return vocab;
}

FeatureVector extract_features(const Conversation& conv, SpeakerRole role,
                               const BigramVocabulary& vocab) {
  FeatureVector fv;
  for (const auto& [bigram, count] : message_bigram_counts(conv, role)) {
    auto it = vocab.ids.find(bigram);
    if (it == vocab.ids.end()) continue;
    const double w = static_cast<double>(count) * vocab.idf[static_cast<std::size_t>(it->second)];
    fv.weights.emplace_back(it->second, static_cast<float>(w));
  }
  std::sort(fv.weights.begin(), fv.weights.end());
  double norm2 = 0.0;
  for (const auto& [id, w] : fv.weights) norm2 += static_cast<double>(w) * w;
  if (norm2 > 0.0) {
    const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
    for (auto& [id, w] : fv.weights) w *= inv;
  }
  return fv;
}

double decision_score(const LinearModel& model, const FeatureVector& x) {
  double s = model.bias;
  for (const auto& [id, w] : x.weights) {
    if (static_cast<std::size_t>(id) < model.weights.size())
      s += model.weights[static_cast<std::size_t>(id)] * w;
  }
  return s;
}

LinearModel train_l1_logistic(std::span<const FeatureVector> xs, std::span<const int> ys, int dim,
                              double c, int epochs, double learning_rate) {
  if (xs.size() != ys.size() || xs.empty())
    throw ParameterError("train_l1_logistic: need equally sized, nonempty inputs");
  if (c <= 0.0) throw ParameterError("train_l1_logistic: C must be positive");
  const std::size_t n = xs.size();
  LinearModel model;
  model.weights.assign(static_cast<std::size_t>(dim), 0.0);

  // Objective: mean logistic loss + lambda * ||w||_1 with lambda = 1/(C*n);
  // ISTA with a fixed step (features are L2-normalized, so the loss gradient
  // is 1/4-Lipschitz and learning_rate = 1 is safe).
  const double lambda = 1.0 / (c * static_cast<double>(n));
  std::vector<double> grad(static_cast<std::size_t>(dim), 0.0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = ys[i] > 0 ? 1.0 : -1.0;
      const double margin = y * decision_score(model, xs[i]);
      // d/ds log(1+exp(-s)) = -sigmoid(-s)
      const double coef = -y / (1.0 + std::exp(margin));
      for (const auto& [id, w] : xs[i].weights)
        grad[static_cast<std::size_t>(id)] += coef * w;
      grad_b += coef;
    }
    const double scale = learning_rate / static_cast<double>(n);
    const double shrink = learning_rate * lambda;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      const double v = model.weights[j] - scale * grad[j];
      // soft threshold
      if (v > shrink)
        model.weights[j] = v - shrink;
      else if (v < -shrink)
        model.weights[j] = v + shrink;
      else
        model.weights[j] = 0.0;
    }
    model.bias -= scale * grad_b;
  }
  return model;
}

namespace {

double paired_accuracy(const LinearModel& model, const BigramVocabulary& vocab, SpeakerRole role,
                       std::span<const ConversationPair* const> pairs) {
  if (pairs.empty()) return 0.5;
  double correct = 0.0;
  for (const ConversationPair* p : pairs) {
    const double s_novice = decision_score(model, extract_features(*p->novice, role, vocab));
    const double s_tenured = decision_score(model, extract_features(*p->tenured, role, vocab));
    if (s_tenured > s_novice)
      correct += 1.0;
    else if (s_tenured == s_novice)
      correct += 0.5;
  }
  return correct / static_cast<double>(pairs.size());
}

// Fit vocabulary + classifier on the given pairs (novice label -1 / 0,
// tenured label +1) and return paired accuracy on the evaluation pairs.
struct FitResult {
  BigramVocabulary vocab;
  LinearModel model;
};

FitResult fit_on_pairs(std::span<const ConversationPair* const> train_pairs,
                       const ProbeConfig& cfg, const HyperParams& hp) {
  std::vector<const Conversation*> docs;
  docs.reserve(train_pairs.size() * 2);
  for (const ConversationPair* p : train_pairs) {
    docs.push_back(p->novice);
    docs.push_back(p->tenured);
  }
  FitResult fit;
  fit.vocab = fit_bigram_vocabulary(docs, cfg.role, hp.max_features, hp.max_doc_freq);
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  xs.reserve(docs.size());
  ys.reserve(docs.size());
  for (const ConversationPair* p : train_pairs) {
    xs.push_back(extract_features(*p->novice, cfg.role, fit.vocab));
    ys.push_back(0);
    xs.push_back(extract_features(*p->tenured, cfg.role, fit.vocab));
    ys.push_back(1);
  }
  fit.model = train_l1_logistic(xs, ys, static_cast<int>(fit.vocab.idf.size()), hp.c, cfg.epochs,
                                cfg.learning_rate);
  return fit;
}

}  // namespace

ProbeReport grouped_cv_accuracy(std::span<const ConversationPair> pairs, const ProbeConfig& cfg,
                                std::mt19937_64& gen) {
  if (cfg.k_folds < 2) throw ParameterError("k_folds must be >= 2");
  if (cfg.grid.c_values.empty() || cfg.grid.max_features.empty() || cfg.grid.max_doc_freq.empty())
    throw ParameterError("hyperparameter grid must be nonempty");

  // One pair per individual by construction; folds partition individuals.
  std::map<std::string, std::vector<const ConversationPair*>> by_individual;
  for (const auto& p : pairs) by_individual[p.individual_id].push_back(&p);
  std::vector<std::string> individuals;
  individuals.reserve(by_individual.size());
  for (const auto& [id, ps] : by_individual) individuals.push_back(id);
  if (static_cast<int>(individuals.size()) < cfg.k_folds)
    throw ParameterError("fewer individuals (" + std::to_string(individuals.size()) +
                         ") than folds (" + std::to_string(cfg.k_folds) + ")");

  rng::shuffle(individuals, gen);
  // Contiguous chunks of the shuffled order; sizes differ by at most one.
  const std::size_t n_ind = individuals.size();
  const std::size_t k = static_cast<std::size_t>(cfg.k_folds);
  std::vector<std::vector<std::string>> folds(k);
  for (std::size_t i = 0; i < n_ind; ++i)
    folds[i * k / n_ind].push_back(individuals[i]);

  // Per-fold seeds drawn upfront so folds stay independent computations.
  std::vector<std::uint64_t> fold_seeds(k);
  for (auto& s : fold_seeds) s = gen();

  ProbeReport report;
  report.role = cfg.role;
  report.n_pairs = static_cast<int>(pairs.size());

  double accuracy_sum = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    std::set<std::string> test_ids(folds[f].begin(), folds[f].end());
    std::vector<const ConversationPair*> train_pairs, test_pairs;
    for (const auto& p : pairs) {
      (test_ids.count(p.individual_id) ? test_pairs : train_pairs).push_back(&p);
    }

    // Inner grouped holdout of training individuals for hyperparameter
    // selection: ~25% of training individuals, at least one, while keeping at
    // least one individual to train on.
    std::vector<std::string> train_ids;
    for (const auto& [id, ps] : by_individual)
      if (!test_ids.count(id)) train_ids.push_back(id);
    auto fold_gen = std::mt19937_64(fold_seeds[f]);
    rng::shuffle(train_ids, fold_gen);

    HyperParams best{cfg.grid.c_values[0], cfg.grid.max_features[0], cfg.grid.max_doc_freq[0]};
    if (train_ids.size() >= 2) {
      const std::size_t n_val = std::max<std::size_t>(1, train_ids.size() / 4);
      std::set<std::string> val_ids(train_ids.begin(),
                                    train_ids.begin() + static_cast<std::ptrdiff_t>(n_val));
      std::vector<const ConversationPair*> inner_train, inner_val;
      for (const ConversationPair* p : train_pairs) {
        (val_ids.count(p->individual_id) ? inner_val : inner_train).push_back(p);
      }
      double best_acc = -1.0;
      for (double c : cfg.grid.c_values) {
        for (int mf : cfg.grid.max_features) {
          for (double mdf : cfg.grid.max_doc_freq) {
            const HyperParams hp{c, mf, mdf};
            const FitResult fit = fit_on_pairs(inner_train, cfg, hp);
            const double acc = paired_accuracy(fit.model, fit.vocab, cfg.role, inner_val);
            if (acc > best_acc) {
              best_acc = acc;
              best = hp;
            }
          }
        }
      }
    }

    const FitResult fit = fit_on_pairs(train_pairs, cfg, best);
    const double acc = paired_accuracy(fit.model, fit.vocab, cfg.role, test_pairs);

    FoldReport fr;
    fr.fold = static_cast<int>(f);
    fr.paired_accuracy = acc;
    fr.chosen = best;
    fr.test_individuals = folds[f];
    std::sort(fr.test_individuals.begin(), fr.test_individuals.end());
    fr.n_test_pairs = static_cast<int>(test_pairs.size());
    report.folds.push_back(std::move(fr));
    accuracy_sum += acc;
  }
  report.paired_accuracy = accuracy_sum / static_cast<double>(k);
  return report;
}

void write_probe_report_json(const ProbeReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["role"] = to_string(report.role);
  j["paired_accuracy"] = report.paired_accuracy;
  j["n_pairs"] = report.n_pairs;
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : report.folds) {
    nlohmann::ordered_json jf;
    jf["fold"] = f.fold;
    jf["paired_accuracy"] = f.paired_accuracy;
    jf["n_test_pairs"] = f.n_test_pairs;
    jf["chosen"] = {{"C", f.chosen.c},
                    {"max_features", f.chosen.max_features},
                    {"max_doc_freq", f.chosen.max_doc_freq}};
    jf["test_individuals"] = f.test_individuals;
    folds.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds);
  out << j.dump(2) << '\n';
}

}  // namespace convodiv
