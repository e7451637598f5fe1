#include "convodiv/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <utility>

#include <json.hpp>

#include "convodiv/errors.hpp"

namespace convodiv {

const char* to_string(SpeakerRole role) {
  return role == SpeakerRole::counselor ? "counselor" : "texter";
}

const char* to_string(Rating rating) {
  switch (rating) {
    case Rating::helpful: return "helpful";
    case Rating::not_helpful: return "not_helpful";
    default: return "none";
  }
}

int Conversation::count_messages(SpeakerRole role) const {
  int n = 0;
  for (const auto& m : messages)
    if (m.role == role) ++n;
  return n;
}

int Individual::career_length() const {
  return conversations.empty() ? 0 : conversations.back().order_index + 1;
}

const Conversation* Individual::conversation_at(int order_index) const {
  auto it = std::lower_bound(conversations.begin(), conversations.end(), order_index,
                             [](const Conversation& c, int idx) { return c.order_index < idx; });
  if (it == conversations.end() || it->order_index != order_index) return nullptr;
  return &*it;
}

std::size_t Corpus::total_conversations() const {
  std::size_t n = 0;
  for (const auto& [id, ind] : individuals) n += ind.conversations.size();
  return n;
}

std::string cohort_label(std::int64_t timestamp) {
  std::time_t t = static_cast<std::time_t>(timestamp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", (tm.tm_year + 1900) % 10000,
                (tm.tm_mon % 12) + 1);
  return buf;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

SpeakerRole parse_role(const std::string& s, std::size_t line_no) {
  if (s == "counselor") return SpeakerRole::counselor;
  if (s == "texter") return SpeakerRole::texter;
  throw ParseError("line " + std::to_string(line_no) + ": unknown speaker role '" + s + "'");
}

Rating parse_rating(const nlohmann::json& j, std::size_t line_no) {
  if (j.is_null()) return Rating::none;
  if (!j.is_string())
    throw ParseError("line " + std::to_string(line_no) + ": rating must be a string or null");
  const std::string s = j.get<std::string>();
  if (s == "helpful") return Rating::helpful;
  if (s == "not_helpful") return Rating::not_helpful;
  throw ParseError("line " + std::to_string(line_no) + ": unknown rating '" + s + "'");
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    if (j > i) {
      std::string_view piece = text.substr(i, j - i);
      bool all_punct = true;
      for (char c : piece) {
        if (!is_punct(c)) {
          all_punct = false;
          break;
        }
      }
      if (!all_punct) {
        std::size_t b = 0, e = piece.size();
        while (b < e && is_punct(piece[b])) ++b;
        while (e > b && is_punct(piece[e - 1])) --e;
        piece = piece.substr(b, e - b);
      }
      if (!piece.empty()) {
        std::string tok(piece);
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(std::move(tok));
      }
    }
    i = j;
  }
  return out;
}

std::vector<std::string> role_tokens(const Conversation& conv, SpeakerRole role) {
  std::vector<std::string> out;
  for (const auto& m : conv.messages) {
    if (m.role != role) continue;
    auto toks = tokenize(m.text);
    out.insert(out.end(), std::make_move_iterator(toks.begin()),
               std::make_move_iterator(toks.end()));
  }
  return out;
}

Corpus parse_corpus(const std::filesystem::path& path, const CorpusFilters& filters) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path.string());
  return parse_corpus(in, filters);
}

Corpus parse_corpus(std::istream& in, const CorpusFilters& filters) {
  // Raw accumulation in input order; filters and sorting are applied per
  // individual once the whole file is read.
  std::map<std::string, std::vector<Conversation>> raw;
  std::map<std::string, std::set<int>> seen_order;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line)
      if (!is_space(c)) {
        blank = false;
        break;
      }
    if (blank) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object())
      throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");

    Conversation conv;
    try {
      conv.conv_id = j.at("conv_id").get<std::string>();
      conv.individual_id = j.at("individual_id").get<std::string>();
      if (j.contains("timestamp") && !j["timestamp"].is_null())
        conv.timestamp = j["timestamp"].get<std::int64_t>();
      if (j.contains("rating")) conv.rating = parse_rating(j["rating"], line_no);
      const auto& msgs = j.at("messages");
      if (!msgs.is_array())
        throw ParseError("line " + std::to_string(line_no) + ": messages must be an array");
      int seq = 0;
      for (const auto& jm : msgs) {
        Message m;
        m.role = parse_role(jm.at("role").get<std::string>(), line_no);
        m.text = jm.at("text").get<std::string>();
        m.seq = seq++;
        conv.messages.push_back(std::move(m));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (conv.messages.empty())
      throw ValidationError("line " + std::to_string(line_no) + ": conversation '" +
                            conv.conv_id + "' has no messages");

    auto& convs = raw[conv.individual_id];
    if (j.contains("order_index") && !j["order_index"].is_null()) {
      conv.order_index = j["order_index"].get<int>();
      if (conv.order_index < 0)
        throw ParseError("line " + std::to_string(line_no) + ": order_index must be >= 0");
    } else {
      conv.order_index = static_cast<int>(convs.size());
    }
    if (!seen_order[conv.individual_id].insert(conv.order_index).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate order_index " +
                            std::to_string(conv.order_index) + " for individual '" +
                            conv.individual_id + "'");
    convs.push_back(std::move(conv));
  }

  Corpus corpus;
  for (auto& [id, convs] : raw) {
    if (static_cast<int>(convs.size()) < filters.min_conversations) continue;
    Individual ind;
    ind.individual_id = id;
    for (auto& c : convs) {
      if (c.count_messages(SpeakerRole::counselor) < filters.min_counselor_messages) continue;
      ind.conversations.push_back(std::move(c));
    }
    if (ind.conversations.empty()) continue;
    std::sort(ind.conversations.begin(), ind.conversations.end(),
              [](const Conversation& a, const Conversation& b) {
                return a.order_index < b.order_index;
              });
    ind.cohort = ind.conversations.front().timestamp
                     ? cohort_label(*ind.conversations.front().timestamp)
                     : "unknown";
    corpus.individuals.emplace(id, std::move(ind));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_corpus(corpus, out);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& [id, ind] : corpus.individuals) {
    for (const auto& conv : ind.conversations) {
      nlohmann::ordered_json j;
      j["conv_id"] = conv.conv_id;
      j["individual_id"] = conv.individual_id;
      j["order_index"] = conv.order_index;
      if (conv.timestamp) j["timestamp"] = *conv.timestamp;
      j["rating"] = conv.rating == Rating::none ? nlohmann::ordered_json(nullptr)
                                                : nlohmann::ordered_json(to_string(conv.rating));
      auto msgs = nlohmann::ordered_json::array();
      for (const auto& m : conv.messages) {
        msgs.push_back({{"role", to_string(m.role)}, {"text", m.text}});
      }
      j["messages"] = std::move(msgs);
      out << j.dump() << '\n';
    }
  }
}

}  // namespace convodiv
