#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convodiv/corpus.hpp"

namespace convodiv {

// Tenure dynamics planted in an agent; serialized ground-truth labels are
// "static", "diversifying", "specializing", "colloquializing".
enum class Dynamics { steady, diversifying, specializing, colloquializing };
const char* to_string(Dynamics dynamics);

// A value evolving over an agent's career, evaluated at conversation t of a
// total career length.
struct Schedule {
  enum class Shape { constant, linear, logistic };
  Shape shape = Shape::constant;
  double start_value = 0.0;
  double end_value = 0.0;
  double midpoint = 60.0;   // logistic center, in conversation index
  double steepness = 0.15;  // logistic rate per conversation

  double at(int t, int total_convs) const;

  static Schedule constant(double value);
  static Schedule linear(double start, double end);
  static Schedule logistic(double start, double end, double midpoint, double steepness);
};

// A word injected into conversations with a tenure-dependent containment
// probability; sign records the intended usage-shift direction.
struct PlantedWord {
  std::string word;
  Schedule rate;
  int sign = 1;                  // +1 adopted, -1 abandoned
  std::optional<int> component;  // restrict injection to one fifth
};

struct AgentProfile {
  std::string agent_id;
  std::string cohort = "2016-01";
  double skill = 0.5;  // drives rating positivity through GenConfig::rating_skill_gain
  Dynamics dynamics = Dynamics::steady;

  // Per-conversation topic concentration sigma(t): each conversation draws a
  // topic and mixes topic words into the shared Zipfian base at this weight.
  Schedule topic_spread = Schedule::constant(0.2);
  // Per-fifth multipliers on sigma(t); zero freezes a component.
  std::array<double, 5> component_spread_mult{1.0, 1.0, 1.0, 1.0, 1.0};

  // Private vocabulary mixed in at weight alpha(t); grows a distinctive voice.
  Schedule idiolect_weight = Schedule::constant(0.0);
  int idiolect_size = 40;

  // Population-shared vocabularies gated by tenure: words adopted with
  // experience and words abandoned after the initial conversations.
  Schedule adopted_mixture = Schedule::constant(0.0);
  Schedule abandoned_mixture = Schedule::constant(0.0);
  int adopted_vocab_size = 500;
  int abandoned_vocab_size = 500;

  std::vector<PlantedWord> planted;

  double conv_interval_secs = 6.0 * 3600.0;  // career pacing for timestamps
};

struct GenConfig {
  int n_agents = 100;  // used by preset builders
  int convs_per_agent = 120;
  double messages_per_conv_mean = 14.0;
  int messages_floor = 10;
  double words_per_message_mean = 28.0;
  int words_floor = 1;
  int vocab_size = 5000;
  double zipf_exponent = 1.1;
  int n_topics = 10;
  double rating_rate = 0.26;
  double rating_positivity_base = 0.87;
  double rating_skill_gain = 0.0;  // logistic link from skill to positivity
  int n_cohorts = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  struct Agent {
    std::string agent_id;
    Dynamics dynamics = Dynamics::steady;
    double skill = 0.5;
  };
  struct Planted {
    std::string word;
    int sign = 1;
    std::optional<int> component;
  };
  std::vector<Agent> agents;
  std::vector<Planted> planted_words;
};

struct Generated {
  Corpus corpus;
  GroundTruth truth;
};

// Deterministic in config.seed: agents and conversations draw from keyed RNG
// substreams, so regeneration is byte-identical.
Generated generate(const GenConfig& config, const std::vector<AgentProfile>& profiles);

// All agents share one static distribution; the calibration baseline.
Corpus null_corpus(const GenConfig& config, int n_agents);

// Uniform profiles for one dynamics preset; skill and pacing vary per agent.
std::vector<AgentProfile> base_profiles(const GenConfig& config, int n, Dynamics dynamics);

// Named corpora: null, static, diversifying, mixed, idiolect, component-drift,
// lexical, strong-drift, effectiveness.
std::vector<AgentProfile> make_preset_profiles(const GenConfig& config, std::string_view preset);

void write_ground_truth_json(const GroundTruth& truth, std::ostream& out);

}  // namespace convodiv
