#include <doctest.h>

#include <sstream>

#include "convodiv/corpus.hpp"
#include "convodiv/errors.hpp"
#include "convodiv/rng.hpp"
#include "helpers.hpp"

using namespace convodiv;
using namespace convodiv::testing;

TEST_CASE("tokenize handles casing, edge punctuation and emoticons") {
  CHECK(tokenize("Hey there :)") == std::vector<std::string>{"hey", "there", ":)"});
  CHECK(tokenize("I'm OK.") == std::vector<std::string>{"i'm", "ok"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n ").empty());
  CHECK(tokenize("...!!") == std::vector<std::string>{"...!!"});
  CHECK(tokenize("(hello)") == std::vector<std::string>{"hello"});
  CHECK(tokenize("well-being") == std::vector<std::string>{"well-being"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  const char* samples[] = {
      "Hey there :) I'm OK... what's up?!",
      "A (strange, very strange) -- mix; of PUNCT!!! :-( and words_with_underscores",
      "numbers 123 and mixed12x and 'quoted' stuff",
  };
  for (const char* s : samples) {
    for (const auto& tok : tokenize(s)) {
      const auto again = tokenize(tok);
      REQUIRE(again.size() == 1);
      CHECK(again[0] == tok);
    }
  }
}

namespace {

std::string conv_line(const std::string& individual, int order, int n_counselor,
                      bool with_order = true) {
  std::string msgs;
  for (int i = 0; i < n_counselor; ++i) {
    if (!msgs.empty()) msgs += ',';
    msgs += R"({"role":"counselor","text":"hello there friend"})";
  }
  msgs += R"(,{"role":"texter","text":"hi"})";
  std::string line = "{\"conv_id\":\"" + individual + "_" + std::to_string(order) +
                     "\",\"individual_id\":\"" + individual + "\"";
  if (with_order) line += ",\"order_index\":" + std::to_string(order);
  line += ",\"rating\":null,\"messages\":[" + msgs + "]}";
  return line;
}

}  // namespace

TEST_CASE("parse_corpus applies both filters") {
  std::stringstream in;
  // 130 conversations, 6 of them with too few counselor messages.
  for (int i = 0; i < 130; ++i) in << conv_line("ind1", i, i % 20 == 0 ? 4 : 12) << "\n";
  // 50 conversations only.
  for (int i = 0; i < 50; ++i) in << conv_line("ind2", i, 12) << "\n";

  const CorpusFilters filters{10, 120};
  const Corpus corpus = parse_corpus(in, filters);
  REQUIRE(corpus.individuals.count("ind1") == 1);
  CHECK(corpus.individuals.count("ind2") == 0);
  const auto& ind1 = corpus.individuals.at("ind1");
  CHECK(ind1.conversations.size() == 130 - 7);  // order 0,20,...,120 dropped
  for (const auto& c : ind1.conversations)
    CHECK(c.count_messages(SpeakerRole::counselor) >= 10);
}

TEST_CASE("parse_corpus on empty input yields an empty corpus") {
  std::stringstream in("");
  const Corpus corpus = parse_corpus(in, CorpusFilters{});
  CHECK(corpus.individuals.empty());
}

TEST_CASE("parse errors carry line numbers") {
  std::stringstream in;
  in << conv_line("x", 0, 12) << "\n";
  in << "{not json\n";
  try {
    parse_corpus(in, CorpusFilters{0, 0});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("duplicate order_index is a validation error") {
  std::stringstream in;
  in << conv_line("x", 3, 12) << "\n" << conv_line("x", 3, 12) << "\n";
  CHECK_THROWS_AS(parse_corpus(in, CorpusFilters{0, 0}), ValidationError);
}

TEST_CASE("conversation without messages is a validation error") {
  std::stringstream in;
  in << R"({"conv_id":"c","individual_id":"x","messages":[]})" << "\n";
  CHECK_THROWS_AS(parse_corpus(in, CorpusFilters{0, 0}), ValidationError);
}

TEST_CASE("missing order_index is derived from input order") {
  std::stringstream in;
  in << conv_line("x", 0, 12, /*with_order=*/false) << "\n";
  in << conv_line("x", 1, 12, /*with_order=*/false) << "\n";
  const Corpus corpus = parse_corpus(in, CorpusFilters{0, 0});
  const auto& convs = corpus.individuals.at("x").conversations;
  REQUIRE(convs.size() == 2);
  CHECK(convs[0].order_index == 0);
  CHECK(convs[1].order_index == 1);
}

TEST_CASE("unknown keys are ignored") {
  std::stringstream in;
  in << R"({"conv_id":"c","individual_id":"x","order_index":0,"extra":42,)"
     << R"("messages":[{"role":"counselor","text":"Hi you","note":"x"}]})" << "\n";
  const Corpus corpus = parse_corpus(in, CorpusFilters{0, 0});
  CHECK(corpus.individuals.at("x").conversations.size() == 1);
}

TEST_CASE("write then parse is the identity on the retained subset") {
  std::stringstream in;
  for (int i = 0; i < 12; ++i) in << conv_line("rt", i, 12) << "\n";
  const CorpusFilters filters{10, 1};
  const Corpus corpus = parse_corpus(in, filters);

  std::stringstream serialized;
  write_corpus(corpus, serialized);
  const Corpus reparsed = parse_corpus(serialized, filters);

  std::stringstream again;
  write_corpus(reparsed, again);
  CHECK(serialized.str() == again.str());
  REQUIRE(reparsed.individuals.count("rt") == 1);
  CHECK(reparsed.individuals.at("rt").conversations.size() == 12);
}

TEST_CASE("raising min_conversations never adds individuals") {
  std::stringstream content;
  for (int i = 0; i < 30; ++i) content << conv_line("a", i, 12) << "\n";
  for (int i = 0; i < 10; ++i) content << conv_line("b", i, 12) << "\n";
  std::size_t prev_count = 100;
  for (int min_convs : {5, 11, 31}) {
    std::stringstream in(content.str());
    const Corpus corpus = parse_corpus(in, CorpusFilters{10, min_convs});
    CHECK(corpus.individuals.size() <= prev_count);
    prev_count = corpus.individuals.size();
  }
}

TEST_CASE("role_tokens concatenates matching messages in order") {
  const Conversation conv = make_conv(
      "x", 0,
      {msg(SpeakerRole::counselor, "hi there"), msg(SpeakerRole::texter, "yo"),
       msg(SpeakerRole::counselor, "ok")});
  CHECK(role_tokens(conv, SpeakerRole::counselor) == std::vector<std::string>{"hi", "there", "ok"});
  CHECK(role_tokens(conv, SpeakerRole::texter) == std::vector<std::string>{"yo"});
  const Conversation no_texter = make_conv("x", 1, {msg(SpeakerRole::counselor, "solo")});
  CHECK(role_tokens(no_texter, SpeakerRole::texter).empty());
}

TEST_CASE("cohort is the start month of the first conversation") {
  std::stringstream in;
  in << R"({"conv_id":"c0","individual_id":"x","order_index":0,"timestamp":1454284800,)"
     << R"("messages":[{"role":"counselor","text":"a"}]})" << "\n";  // 2016-02-01 UTC
  const Corpus corpus = parse_corpus(in, CorpusFilters{0, 0});
  CHECK(corpus.individuals.at("x").cohort == "2016-02");
  CHECK(cohort_label(1454284800) == "2016-02");
}

TEST_CASE("career_length is max order_index + 1") {
  const Corpus corpus = corpus_of({uniform_conv("x", 0, 2, "a"), uniform_conv("x", 119, 2, "a")});
  CHECK(corpus.individuals.at("x").career_length() == 120);
  CHECK(corpus.individuals.at("x").conversation_at(119) != nullptr);
  CHECK(corpus.individuals.at("x").conversation_at(5) == nullptr);
}
