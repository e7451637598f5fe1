#pragma once

#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "convodiv/corpus.hpp"

namespace convodiv {

// One novice/tenured conversation pair from the same individual; the probe
// asks whether a classifier can tell which is which.
struct ConversationPair {
  std::string individual_id;
  const Conversation* novice = nullptr;   // drawn from conversations [0,20)
  const Conversation* tenured = nullptr;  // drawn from conversations [100,120)
};

// One random qualifying conversation from each end of the career, for a
// seeded random subset of eligible individuals (fraction rounded up).
std::vector<ConversationPair> build_pairs(const Corpus& corpus, double sample_fraction,
                                          std::mt19937_64& gen);

// Bigram vocabulary with smoothed idf, fitted on training documents only.
struct BigramVocabulary {
  std::unordered_map<std::string, int> ids;  // "tok1 tok2" -> feature id
  std::vector<double> idf;                   // ln((1+D)/(1+df)) + 1
  int n_docs = 0;
};

BigramVocabulary fit_bigram_vocabulary(std::span<const Conversation* const> docs, SpeakerRole role,
                                       int max_features, double max_doc_freq);

// Sparse tf-idf vector, L2-normalized; ids ascending. Out-of-vocabulary
// bigrams are dropped. Bigrams never cross message boundaries.
struct FeatureVector {
  std::vector<std::pair<int, float>> weights;
};

FeatureVector extract_features(const Conversation& conv, SpeakerRole role,
                               const BigramVocabulary& vocab);

std::vector<std::pair<std::string, int>> message_bigram_counts(const Conversation& conv,
                                                               SpeakerRole role);

struct ProbeGrid {
  std::vector<double> c_values{0.1, 1.0, 10.0};
  std::vector<int> max_features{10000, 50000};
  std::vector<double> max_doc_freq{0.5, 1.0};
};

struct ProbeConfig {
  SpeakerRole role = SpeakerRole::counselor;
  int k_folds = 10;
  ProbeGrid grid;
  int epochs = 400;          // proximal gradient iterations
  double learning_rate = 1.0;
};

struct HyperParams {
  double c = 1.0;
  int max_features = 10000;
  double max_doc_freq = 1.0;
};

struct FoldReport {
  int fold = 0;
  double paired_accuracy = 0.0;
  HyperParams chosen;
  std::vector<std::string> test_individuals;
  int n_test_pairs = 0;
};

struct ProbeReport {
  SpeakerRole role = SpeakerRole::counselor;
  double paired_accuracy = 0.0;  // mean over folds
  std::vector<FoldReport> folds;
  int n_pairs = 0;
};

// Grouped k-fold cross-validation: folds partition individuals, vocabulary
// and idf are fitted on training folds only, hyperparameters are picked by an
// inner grouped holdout of the training individuals. Paired accuracy counts a
// pair as correct when the tenured conversation scores strictly higher (ties
// credit 0.5).
ProbeReport grouped_cv_accuracy(std::span<const ConversationPair> pairs, const ProbeConfig& cfg,
                                std::mt19937_64& gen);

void write_probe_report_json(const ProbeReport& report, std::ostream& out);

// L1-regularized logistic regression trained by full-batch proximal gradient
// descent. Exposed for tests; the probe uses it internally.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

LinearModel train_l1_logistic(std::span<const FeatureVector> xs, std::span<const int> ys, int dim,
                              double c, int epochs, double learning_rate);
double decision_score(const LinearModel& model, const FeatureVector& x);

}  // namespace convodiv
