#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace convodiv {

enum class SpeakerRole { counselor, texter };
enum class Rating { helpful, not_helpful, none };

const char* to_string(SpeakerRole role);
const char* to_string(Rating rating);

struct Message {
  SpeakerRole role = SpeakerRole::counselor;
  std::string text;
  int seq = 0;  // position within the conversation, contiguous from 0
};

struct Conversation {
  std::string conv_id;
  std::string individual_id;
  int order_index = 0;  // position in the individual's career, 0-based
  std::optional<std::int64_t> timestamp;  // seconds since epoch
  Rating rating = Rating::none;
  std::vector<Message> messages;

  int count_messages(SpeakerRole role) const;
};

struct Individual {
  std::string individual_id;
  std::string cohort;  // start month ("YYYY-MM"), or "unknown" without timestamps
  std::vector<Conversation> conversations;  // ascending order_index, no duplicates

  // Career span in conversations: max order_index + 1 (0 when empty).
  int career_length() const;
  const Conversation* conversation_at(int order_index) const;
};

struct Corpus {
  std::map<std::string, Individual> individuals;  // keyed by individual_id

  std::size_t total_conversations() const;
};

struct CorpusFilters {
  int min_counselor_messages = 10;
  int min_conversations = 120;
};

// JSONL ingest, one conversation per line:
//   {"conv_id": str, "individual_id": str, "order_index": int?, "timestamp": int?,
//    "rating": "helpful"|"not_helpful"|null, "messages": [{"role": ..., "text": str}]}
// Unknown keys are ignored. Individuals are kept when their total conversation
// count meets min_conversations; their conversations are then restricted to
// those with at least min_counselor_messages counselor messages. A missing
// order_index is derived from the individual's input order.
Corpus parse_corpus(const std::filesystem::path& path, const CorpusFilters& filters);
Corpus parse_corpus(std::istream& in, const CorpusFilters& filters);

// Serializes in the same JSONL schema, ordered by individual then order_index.
// parse_corpus(write_corpus(c)) is the identity on the retained subset.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Lowercases, splits on whitespace, strips edge punctuation from each piece
// except pieces made entirely of punctuation (kept whole, so ":)" survives).
std::vector<std::string> tokenize(std::string_view text);

// Tokens of all messages with the given role, in seq order.
std::vector<std::string> role_tokens(const Conversation& conv, SpeakerRole role);

// Start-month cohort label for a timestamp (UTC), e.g. "2016-01".
std::string cohort_label(std::int64_t timestamp);

}  // namespace convodiv
