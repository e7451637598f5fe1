#include "convodiv/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <map>
#include <ostream>
#include <set>

#include <json.hpp>

#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"
#include "convodiv/segmentation.hpp"

namespace convodiv {

const char* to_string(Dynamics dynamics) {
  switch (dynamics) {
    case Dynamics::steady: return "static";
    case Dynamics::diversifying: return "diversifying";
    case Dynamics::specializing: return "specializing";
    default: return "colloquializing";
  }
}

double Schedule::at(int t, int total_convs) const {
  switch (shape) {
    case Shape::constant:
      return start_value;
    case Shape::linear: {
      if (total_convs <= 1) return start_value;
      const double frac = static_cast<double>(t) / static_cast<double>(total_convs - 1);
      return start_value + (end_value - start_value) * frac;
    }
    default: {
      const double s = 1.0 / (1.0 + std::exp(-steepness * (static_cast<double>(t) - midpoint)));
      return start_value + (end_value - start_value) * s;
    }
  }
}

Schedule Schedule::constant(double value) {
  Schedule s;
  s.shape = Shape::constant;
  s.start_value = value;
  return s;
}

Schedule Schedule::linear(double start, double end) {
  Schedule s;
  s.shape = Shape::linear;
  s.start_value = start;
  s.end_value = end;
  return s;
}

Schedule Schedule::logistic(double start, double end, double midpoint, double steepness) {
  Schedule s;
  s.shape = Shape::logistic;
  s.start_value = start;
  s.end_value = end;
  s.midpoint = midpoint;
  s.steepness = steepness;
  return s;
}

void GenConfig::validate() const {
  if (n_agents < 1) throw ParameterError("n_agents must be >= 1");
  if (convs_per_agent < 1) throw ParameterError("convs_per_agent must be >= 1");
  if (messages_floor < 1 || words_floor < 1)
    throw ParameterError("message and word floors must be >= 1");
  if (vocab_size < n_topics || n_topics < 1)
    throw ParameterError("need vocab_size >= n_topics >= 1");
  if (!(zipf_exponent > 0.0)) throw ParameterError("zipf_exponent must be positive");
  if (rating_rate < 0.0 || rating_rate > 1.0 || rating_positivity_base <= 0.0 ||
      rating_positivity_base >= 1.0)
    throw ParameterError("rating probabilities out of range");
  if (n_cohorts < 1) throw ParameterError("n_cohorts must be >= 1");
}

namespace {

// Cumulative Zipf weights over ranks 1..n; sampling is a binary search.
std::vector<double> zipf_cdf(int n, double exponent) {
  std::vector<double> cdf(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int r = 1; r <= n; ++r) {
    sum += std::pow(static_cast<double>(r), -exponent);
    cdf[static_cast<std::size_t>(r - 1)] = sum;
  }
  for (auto& v : cdf) v /= sum;
  return cdf;
}

int sample_cdf(const std::vector<double>& cdf, std::mt19937_64& gen) {
  const double u = rng::uniform01(gen);
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

struct SharedVocab {
  std::vector<std::string> base_words;          // "w1".."wV", Zipf-ranked
  std::vector<double> base_cdf;
  std::vector<std::vector<int>> topic_members;  // base word indices per topic
  std::vector<std::vector<double>> topic_cdf;
  std::vector<std::string> adopted_words;       // "coll*": adopted with tenure
  std::vector<double> adopted_cdf;
  std::vector<std::string> abandoned_words;     // "curr*": fade after training
  std::vector<double> abandoned_cdf;
};

SharedVocab build_shared_vocab(const GenConfig& config, int adopted_size, int abandoned_size) {
  SharedVocab v;
  v.base_words.reserve(static_cast<std::size_t>(config.vocab_size));
  for (int i = 1; i <= config.vocab_size; ++i) v.base_words.push_back("w" + std::to_string(i));
  v.base_cdf = zipf_cdf(config.vocab_size, config.zipf_exponent);

  // Topics interleave ranks so every topic has comparable frequency mass.
  v.topic_members.assign(static_cast<std::size_t>(config.n_topics), {});
  for (int i = 0; i < config.vocab_size; ++i)
    v.topic_members[static_cast<std::size_t>(i % config.n_topics)].push_back(i);
  v.topic_cdf.resize(v.topic_members.size());
  for (std::size_t j = 0; j < v.topic_members.size(); ++j) {
    double sum = 0.0;
    auto& cdf = v.topic_cdf[j];
    cdf.reserve(v.topic_members[j].size());
    for (int idx : v.topic_members[j]) {
      sum += std::pow(static_cast<double>(idx + 1), -config.zipf_exponent);
      cdf.push_back(sum);
    }
    for (auto& x : cdf) x /= sum;
  }

  for (int i = 1; i <= adopted_size; ++i) v.adopted_words.push_back("coll" + std::to_string(i));
  if (adopted_size > 0) v.adopted_cdf = zipf_cdf(adopted_size, config.zipf_exponent);
  for (int i = 1; i <= abandoned_size; ++i)
    v.abandoned_words.push_back("curr" + std::to_string(i));
  if (abandoned_size > 0) v.abandoned_cdf = zipf_cdf(abandoned_size, config.zipf_exponent);
  return v;
}

std::int64_t cohort_epoch(const std::string& cohort) {
  int year = 0, month = 0;
  if (std::sscanf(cohort.c_str(), "%d-%d", &year, &month) != 2 || month < 1 || month > 12)
    throw ParameterError("cohort must be formatted YYYY-MM, got '" + cohort + "'");
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = 1;
  return static_cast<std::int64_t>(timegm(&tm));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Generated generate(const GenConfig& config, const std::vector<AgentProfile>& profiles) {
  config.validate();
  if (profiles.empty()) throw ParameterError("generate: no agent profiles");
  {
    std::set<std::string> ids;
    for (const auto& p : profiles)
      if (!ids.insert(p.agent_id).second)
        throw ParameterError("generate: duplicate agent_id '" + p.agent_id + "'");
  }
  int adopted_size = 0, abandoned_size = 0;
  for (const auto& p : profiles) {
    adopted_size = std::max(adopted_size, p.adopted_vocab_size);
    abandoned_size = std::max(abandoned_size, p.abandoned_vocab_size);
  }
  const SharedVocab vocab = build_shared_vocab(config, adopted_size, abandoned_size);

  Generated out;
  for (const AgentProfile& profile : profiles) {
    const std::int64_t start_ts = cohort_epoch(profile.cohort);
    Individual ind;
    ind.individual_id = profile.agent_id;
    ind.cohort = profile.cohort;
    ind.conversations.reserve(static_cast<std::size_t>(config.convs_per_agent));

    std::vector<std::string> idiolect;
    idiolect.reserve(static_cast<std::size_t>(profile.idiolect_size));
    for (int i = 1; i <= profile.idiolect_size; ++i)
      idiolect.push_back("idio_" + profile.agent_id + "_" + std::to_string(i));

    const int total = config.convs_per_agent;
    for (int t = 0; t < total; ++t) {
      auto gen = rng::substream(config.seed, "conv", profile.agent_id, t);
      Conversation conv;
      conv.conv_id = profile.agent_id + "_c" + std::to_string(t);
      conv.individual_id = profile.agent_id;
      conv.order_index = t;
      conv.timestamp =
          start_ts + static_cast<std::int64_t>((t + 1) * profile.conv_interval_secs);

      const int topic = static_cast<int>(rng::uniform_below(gen, config.n_topics));
      const double sigma = clamp01(profile.topic_spread.at(t, total));
      const double alpha =
          idiolect.empty() ? 0.0 : clamp01(profile.idiolect_weight.at(t, total));
      const double adopt_w =
          profile.adopted_vocab_size > 0 ? clamp01(profile.adopted_mixture.at(t, total)) : 0.0;
      const double abandon_w = profile.abandoned_vocab_size > 0
                                   ? clamp01(profile.abandoned_mixture.at(t, total))
                                   : 0.0;

      const int n_counselor =
          std::max(config.messages_floor, rng::poisson(gen, config.messages_per_conv_mean));
      const int n_texter = std::max(1, rng::poisson(gen, config.messages_per_conv_mean));

      std::vector<std::string> counselor_texts;
      counselor_texts.reserve(static_cast<std::size_t>(n_counselor));
      for (int j = 0; j < n_counselor; ++j) {
        const int fifth = fifth_of(j, n_counselor);
        const double sigma_eff =
            std::min(0.95, sigma * profile.component_spread_mult[static_cast<std::size_t>(fifth)]);
        const int n_words =
            std::max(config.words_floor, rng::poisson(gen, config.words_per_message_mean));
        std::string text;
        for (int word_i = 0; word_i < n_words; ++word_i) {
          const double u = rng::uniform01(gen);
          const std::string* token = nullptr;
          double span = alpha;
          if (u < span) {
            token = &idiolect[rng::uniform_below(gen, idiolect.size())];
          } else if (span += (1.0 - span) * adopt_w; u < span) {
            token =
                &vocab.adopted_words[static_cast<std::size_t>(sample_cdf(vocab.adopted_cdf, gen))];
          } else if (span += (1.0 - span) * abandon_w; u < span) {
            token = &vocab.abandoned_words[static_cast<std::size_t>(
                sample_cdf(vocab.abandoned_cdf, gen))];
          } else if (span += (1.0 - span) * sigma_eff; u < span) {
            const auto& members = vocab.topic_members[static_cast<std::size_t>(topic)];
            const int m = sample_cdf(vocab.topic_cdf[static_cast<std::size_t>(topic)], gen);
            token = &vocab.base_words[static_cast<std::size_t>(members[m])];
          } else {
            token = &vocab.base_words[static_cast<std::size_t>(sample_cdf(vocab.base_cdf, gen))];
          }
          if (!text.empty()) text += ' ';
          text += *token;
        }
        counselor_texts.push_back(std::move(text));
      }

      // Planted lexical markers: at most one occurrence per conversation,
      // appended to a random counselor message within the target component.
      for (const PlantedWord& pw : profile.planted) {
        const double q = clamp01(pw.rate.at(t, total));
        if (!rng::bernoulli(gen, q)) continue;
        std::vector<int> slots;
        for (int j = 0; j < n_counselor; ++j) {
          if (!pw.component || fifth_of(j, n_counselor) == *pw.component) slots.push_back(j);
        }
        if (slots.empty()) continue;
        const int j = slots[rng::uniform_below(gen, slots.size())];
        counselor_texts[static_cast<std::size_t>(j)] += ' ' + pw.word;
      }

      std::vector<std::string> texter_texts;
      texter_texts.reserve(static_cast<std::size_t>(n_texter));
      for (int j = 0; j < n_texter; ++j) {
        const int n_words =
            std::max(config.words_floor, rng::poisson(gen, config.words_per_message_mean));
        std::string text;
        for (int word_i = 0; word_i < n_words; ++word_i) {
          if (!text.empty()) text += ' ';
          text += vocab.base_words[static_cast<std::size_t>(sample_cdf(vocab.base_cdf, gen))];
        }
        texter_texts.push_back(std::move(text));
      }

      // Counselor opens; roles alternate, leftovers appended.
      int seq = 0;
      std::size_t ci = 0, ti = 0;
      while (ci < counselor_texts.size() || ti < texter_texts.size()) {
        if (ci < counselor_texts.size()) {
          conv.messages.push_back(
              {SpeakerRole::counselor, std::move(counselor_texts[ci++]), seq++});
        }
        if (ti < texter_texts.size()) {
          conv.messages.push_back({SpeakerRole::texter, std::move(texter_texts[ti++]), seq++});
        }
      }

      if (rng::bernoulli(gen, config.rating_rate)) {
        const double base_logit = std::log(config.rating_positivity_base /
                                           (1.0 - config.rating_positivity_base));
        const double p_pos =
            1.0 / (1.0 + std::exp(-(base_logit +
                                    config.rating_skill_gain * (profile.skill - 0.5))));
        conv.rating = rng::bernoulli(gen, p_pos) ? Rating::helpful : Rating::not_helpful;
      }

      ind.conversations.push_back(std::move(conv));
    }
    out.corpus.individuals.emplace(profile.agent_id, std::move(ind));
    out.truth.agents.push_back({profile.agent_id, profile.dynamics, profile.skill});
  }

  std::sort(out.truth.agents.begin(), out.truth.agents.end(),
            [](const GroundTruth::Agent& a, const GroundTruth::Agent& b) {
              return a.agent_id < b.agent_id;
            });
  // Planted words are population-wide; record each once.
  std::set<std::string> seen_words;
  for (const AgentProfile& profile : profiles) {
    for (const PlantedWord& pw : profile.planted) {
      if (seen_words.insert(pw.word).second)
        out.truth.planted_words.push_back({pw.word, pw.sign, pw.component});
    }
  }
  return out;
}

Corpus null_corpus(const GenConfig& config, int n_agents) {
  return generate(config, base_profiles(config, n_agents, Dynamics::steady)).corpus;
}

namespace {

std::string agent_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "a%04d", i);
  return buf;
}

std::string month_label(int offset) {
  const int year = 2016 + offset / 12;
  const int month = 1 + offset % 12;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

void apply_dynamics(AgentProfile& p, Dynamics dynamics) {
  p.dynamics = dynamics;
  switch (dynamics) {
    case Dynamics::steady:
      p.topic_spread = Schedule::constant(0.2);
      break;
    case Dynamics::diversifying:
      p.topic_spread = Schedule::linear(0.05, 0.6);
      break;
    case Dynamics::specializing:
      p.topic_spread = Schedule::constant(0.2);
      p.idiolect_weight = Schedule::linear(0.02, 0.35);
      break;
    case Dynamics::colloquializing:
      p.topic_spread = Schedule::constant(0.2);
      p.adopted_mixture = Schedule::logistic(0.02, 0.35, 60.0, 0.1);
      p.abandoned_mixture = Schedule::logistic(0.35, 0.02, 60.0, 0.1);
      break;
  }
}

}  // namespace

std::vector<AgentProfile> base_profiles(const GenConfig& config, int n, Dynamics dynamics) {
  std::vector<AgentProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    AgentProfile p;
    p.agent_id = agent_name(i);
    p.cohort = month_label(i % config.n_cohorts);
    auto gen = rng::substream(config.seed, "profile", p.agent_id);
    p.skill = rng::uniform01(gen);
    p.conv_interval_secs = 3600.0 * (4.0 + 8.0 * rng::uniform01(gen));
    apply_dynamics(p, dynamics);
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<AgentProfile> make_preset_profiles(const GenConfig& config, std::string_view preset) {
  const int n = config.n_agents;
  if (preset == "null" || preset == "static") {
    return base_profiles(config, n, Dynamics::steady);
  }
  if (preset == "diversifying") {
    return base_profiles(config, n, Dynamics::diversifying);
  }
  if (preset == "mixed") {
    // First half diversifying, second half static.
    auto profiles = base_profiles(config, n, Dynamics::steady);
    for (int i = 0; i < n / 2; ++i)
      apply_dynamics(profiles[static_cast<std::size_t>(i)], Dynamics::diversifying);
    return profiles;
  }
  if (preset == "idiolect") {
    return base_profiles(config, n, Dynamics::specializing);
  }
  if (preset == "component-drift") {
    auto profiles = base_profiles(config, n, Dynamics::diversifying);
    for (auto& p : profiles) p.component_spread_mult = {0.0, 1.0, 1.0, 1.0, 0.0};
    return profiles;
  }
  if (preset == "lexical") {
    auto profiles = base_profiles(config, n, Dynamics::steady);
    std::vector<PlantedWord> planted;
    for (int k = 1; k <= 10; ++k) {
      planted.push_back({"pw_adopt" + std::to_string(k),
                         Schedule::logistic(0.02, 0.55, 60.0, 0.15), 1, std::nullopt});
      planted.push_back({"pw_abandon" + std::to_string(k),
                         Schedule::logistic(0.55, 0.02, 60.0, 0.15), -1, std::nullopt});
    }
    for (auto& p : profiles) p.planted = planted;
    return profiles;
  }
  if (preset == "strong-drift") {
    return base_profiles(config, n, Dynamics::colloquializing);
  }
  if (preset == "effectiveness") {
    // Skill evenly spread; diversity level tied to skill, no temporal drift.
    auto profiles = base_profiles(config, n, Dynamics::steady);
    for (int i = 0; i < n; ++i) {
      auto& p = profiles[static_cast<std::size_t>(i)];
      p.skill = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.5;
      p.topic_spread = Schedule::constant(0.1 + 0.5 * p.skill);
    }
    return profiles;
  }
  throw ParameterError("unknown preset '" + std::string(preset) + "'");
}

void write_ground_truth_json(const GroundTruth& truth, std::ostream& out) {
  nlohmann::ordered_json j;
  auto agents = nlohmann::ordered_json::array();
  for (const auto& a : truth.agents) {
    agents.push_back(
        {{"agent_id", a.agent_id}, {"dynamics", to_string(a.dynamics)}, {"skill", a.skill}});
  }
  j["agents"] = std::move(agents);
  auto planted = nlohmann::ordered_json::array();
  for (const auto& p : truth.planted_words) {
    nlohmann::ordered_json jp;
    jp["word"] = p.word;
    jp["sign"] = p.sign;
    if (p.component) jp["component"] = *p.component;
    planted.push_back(std::move(jp));
  }
  j["planted_words"] = std::move(planted);
  out << j.dump(2) << '\n';
}

}  // namespace convodiv
