#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "emoesg/embeddings.hpp"
#include "emoesg/errors.hpp"
#include "test_support.hpp"

using namespace emoesg;
using testsupport::make_table;

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Every emotion word plus `m` synonyms each, random vectors.
struct Fixture {
  EmbeddingTable table{1};
  EmotionArray<std::vector<std::string>> synonyms;
};

Fixture random_fixture(std::mt19937_64& rng, std::size_t dim, std::size_t m) {
  Fixture f{EmbeddingTable(dim), {}};
  for (Emotion e : kAllEmotions) {
    const std::string word(emotion_name(e));
    f.table.add(word, testsupport::random_vector(rng, dim));
    for (std::size_t j = 0; j < m; ++j) {
      const std::string syn = word + "_syn" + std::to_string(j);
      f.table.add(syn, testsupport::random_vector(rng, dim));
      f.synonyms[index_of(e)].push_back(syn);
    }
  }
  f.table.add("bystander", testsupport::random_vector(rng, dim));
  return f;
}

// All emotions at (1, 0) with a single synonym at (1, 0), except `happy`.
EmbeddingTable flat_table(std::vector<double> happy, std::vector<std::pair<std::string, std::vector<double>>> happy_syns) {
  EmbeddingTable t(2);
  for (Emotion e : kAllEmotions) {
    if (e == Emotion::happy) {
      t.add("happy", happy);
      for (auto& [tok, v] : happy_syns) t.add(tok, v);
    } else {
      t.add(std::string(emotion_name(e)), std::vector<double>{1.0, 0.0});
      t.add(std::string(emotion_name(e)) + "_syn", std::vector<double>{1.0, 0.0});
    }
  }
  return t;
}

SynonymLexicon flat_lexicon(std::vector<std::string> happy_syns) {
  EmotionArray<std::vector<std::string>> s;
  for (Emotion e : kAllEmotions) {
    s[index_of(e)] = e == Emotion::happy ? happy_syns : std::vector<std::string>{std::string(emotion_name(e)) + "_syn"};
  }
  return SynonymLexicon(s);
}

}  // namespace

TEST_SUITE("embeddings") {
  TEST_CASE("load_embeddings reads a minimal table") {
    std::istringstream in("a 1.0 0.0\nb 0.0 1.0");
    const auto t = load_embeddings(in);
    CHECK(t.dimension() == 2);
    CHECK(t.size() == 2);
    CHECK(t.at("b")[1] == 1.0);
    CHECK(t.find("zzz").empty());
    CHECK_THROWS_AS(t.at("zzz"), std::out_of_range);
  }

  TEST_CASE("load_embeddings reports the offending line") {
    {
      std::istringstream in("a 1.0\nb 2.0 3.0");
      CHECK_THROWS_WITH_AS(load_embeddings(in, "v.txt"), doctest::Contains("v.txt:2:"), DataError);
    }
    {
      std::istringstream in("a 1.0 2.0\nb 2.0 x\n");
      CHECK_THROWS_WITH_AS(load_embeddings(in, "v.txt"), doctest::Contains("v.txt:2:"), DataError);
    }
    {
      std::istringstream in("a 1.0 2.0\nb 2.0 3.0\na 0 0\n");
      CHECK_THROWS_WITH_AS(load_embeddings(in, "v.txt"), doctest::Contains("v.txt:3:"), DataError);
    }
  }

  TEST_CASE("the 50-word fixture round-trips bit-exactly") {
    const auto path = testsupport::data_dir() / "glove_50x5.txt";
    const std::string original = testsupport::read_file(path);
    const auto t = load_embeddings_file(path.string());
    CHECK(t.size() == 50);
    CHECK(t.dimension() == 5);
    std::ostringstream os;
    write_embeddings(os, t);
    CHECK(os.str() == original);
  }

  TEST_CASE("table entries are validated") {
    EmbeddingTable t(2);
    CHECK_THROWS_AS(t.add("Upper", std::vector<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(t.add("", std::vector<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(t.add("short", std::vector<double>{1}), std::invalid_argument);
    CHECK_THROWS_AS(t.add("nan", std::vector<double>{1, std::nan("")}), std::invalid_argument);
    t.add("ok", std::vector<double>{1, 2});
    CHECK_THROWS_AS(t.add("ok", std::vector<double>{1, 2}), std::invalid_argument);
  }

  TEST_CASE("cosine similarity examples") {
    CHECK(cosine_similarity(std::vector<double>{3, 4}, std::vector<double>{3, 4}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    const double hand = (4.0 + 10.0 + 18.0) / (std::sqrt(14.0) * std::sqrt(77.0));
    CHECK(std::fabs(cosine_similarity(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6}) - hand) < 1e-12);
    CHECK_THROWS_AS(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0}), std::invalid_argument);
  }

  TEST_CASE("cosine similarity is symmetric, bounded and scale invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int i = 0; i < 200; ++i) {
      auto u = testsupport::random_vector(rng, 7);
      const auto v = testsupport::random_vector(rng, 7);
      const double c = cosine_similarity(u, v);
      CHECK(std::fabs(c - cosine_similarity(v, u)) < 1e-15);
      CHECK(std::fabs(c) <= 1.0 + 1e-12);
      const double k = scale(rng);
      for (auto& x : u) x *= k;
      CHECK(std::fabs(cosine_similarity(u, v) - c) < 1e-12);
    }
  }

  TEST_CASE("one paper-mean cycle averages with the neighbor") {
    const auto t = flat_table({0, 0}, {{"joyful", {1, 1}}});
    const auto out = retrofit(t, flat_lexicon({"joyful"}), RetrofitConfig{1});
    CHECK(out.at("happy")[0] == 0.5);
    CHECK(out.at("happy")[1] == 0.5);
  }

  TEST_CASE("ten paper-mean cycles approach the neighbor mean") {
    const auto t = flat_table({0, 0}, {{"a", {2, 0}}, {"b", {0, 2}}});
    const auto out = retrofit(t, flat_lexicon({"a", "b"}), RetrofitConfig{10});
    const std::vector<double> fixed = {1, 1};
    const double bound = std::sqrt(2.0) / std::pow(3.0, 10);
    CHECK(std::fabs(distance(out.at("happy"), fixed) - bound) < 1e-12);
  }

  TEST_CASE("retrofit errors on missing emotion words or neighbors") {
    {
      auto t = flat_table({0, 0}, {{"joyful", {1, 1}}});
      CHECK_THROWS_AS(retrofit(t, flat_lexicon({"absent"}), RetrofitConfig{}), DataError);
    }
    {
      EmbeddingTable t(2);
      t.add("happy", std::vector<double>{1, 0});
      CHECK_THROWS_AS(retrofit(t, flat_lexicon({"x"}), RetrofitConfig{}), DataError);
    }
  }

  TEST_CASE("retrofit config bounds") {
    CHECK_THROWS_AS(RetrofitConfig{0}.validate(), ConfigError);
    RetrofitConfig c;
    c.alpha = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = RetrofitConfig{};
    c.mode = RetrofitMode::faruqui;
    c.alpha = 0.0;
    c.beta = 0.0;
    const auto t = flat_table({0, 0}, {{"joyful", {1, 1}}});
    CHECK_THROWS_AS(retrofit(t, flat_lexicon({"joyful"}), c), ConfigError);
    CHECK(parse_retrofit_mode("paper-mean") == RetrofitMode::paper_mean);
    CHECK(parse_retrofit_mode("faruqui") == RetrofitMode::faruqui);
    CHECK_FALSE(parse_retrofit_mode("mean"));
  }

  TEST_CASE("synonyms absent from the vocabulary are skipped and reported") {
    const auto t = flat_table({0, 0}, {{"joyful", {1, 1}}});
    RetrofitReport rep;
    const auto out = retrofit(t, flat_lexicon({"joyful", "cheerful", "looking forward"}), RetrofitConfig{1}, &rep);
    CHECK(rep.skipped_synonyms == std::vector<std::string>{"happy:cheerful", "happy:looking forward"});
    CHECK(rep.neighbor_counts[index_of(Emotion::happy)] == 1);
    CHECK(out.at("happy")[0] == 0.5);
  }

  TEST_CASE("retrofit only moves the eight emotion vectors") {
    std::mt19937_64 rng(5);
    auto f = random_fixture(rng, 6, 3);
    for (auto mode : {RetrofitMode::paper_mean, RetrofitMode::faruqui}) {
      RetrofitConfig c;
      c.mode = mode;
      const auto out = retrofit(f.table, SynonymLexicon(f.synonyms), c);
      REQUIRE(out.tokens() == f.table.tokens());
      for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& tok = out.tokens()[i];
        const bool emotion = parse_emotion(tok).has_value() && tok == emotion_name(*parse_emotion(tok));
        const auto a = out.row(i);
        const auto b = f.table.row(i);
        const bool same = std::equal(a.begin(), a.end(), b.begin());
        CHECK(same != emotion);
      }
    }
  }

  TEST_CASE("retrofitting raises similarity to the neighbor mean") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      auto f = random_fixture(rng, 5, 1 + trial % 3);
      const SynonymLexicon lex(f.synonyms);
      const auto out = retrofit(f.table, lex, RetrofitConfig{});
      for (Emotion e : kAllEmotions) {
        std::vector<double> centroid(5, 0.0);
        for (const auto& s : lex.synonyms(e)) {
          for (std::size_t d = 0; d < 5; ++d) centroid[d] += f.table.at(s)[d];
        }
        const std::string w(emotion_name(e));
        CHECK(cosine_similarity(out.at(w), centroid) > cosine_similarity(f.table.at(w), centroid));
      }
    }
  }

  TEST_CASE("objective examples") {
    {
      const auto t = flat_table({1, 0}, {{"joyful", {1, 0}}});
      CHECK(retrofit_objective(t, t, flat_lexicon({"joyful"}), RetrofitConfig{}) == 0.0);
    }
    {
      const auto t = flat_table({0, 0}, {{"joyful", {1, 0}}});
      CHECK(retrofit_objective(t, t, flat_lexicon({"joyful"}), RetrofitConfig{}) == 1.0);
    }
  }

  TEST_CASE("faruqui cycles never increase the objective") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
      auto f = random_fixture(rng, 4, 1 + trial % 3);
      const SynonymLexicon lex(f.synonyms);
      RetrofitConfig c;
      c.mode = RetrofitMode::faruqui;
      c.alpha = 0.5 + trial * 0.25;
      double prev = retrofit_objective(f.table, f.table, lex, c);
      for (int k = 1; k <= 10; ++k) {
        c.iterations = k;
        const double psi = retrofit_objective(f.table, retrofit(f.table, lex, c), lex, c);
        CHECK(psi <= prev + 1e-12);
        prev = psi;
      }
    }
  }

  TEST_CASE("synonym lexicon parsing") {
    std::istringstream in(
        "# comment\n"
        "JOY: joyful, content\n"
        "sadness: unhappy\n"
        "anger: mad\n"
        "fear: scared\n"
        "surprise: amazed\n"
        "trust: confident\n"
        "disgust: revolted\n"
        "anticipation: hope, looking forward\n");
    const auto lex = load_synonym_lexicon(in);
    CHECK(lex.synonyms(Emotion::happy) == std::vector<std::string>{"joyful", "content"});
    CHECK(lex.synonyms(Emotion::anticipation).back() == "looking forward");

    std::istringstream missing("happy: joyful\n");
    CHECK_THROWS_AS(load_synonym_lexicon(missing), DataError);
    std::istringstream unknown("happy: joyful\npositive: good\n");
    CHECK_THROWS_WITH_AS(load_synonym_lexicon(unknown, "s.txt"), doctest::Contains("s.txt:2:"), DataError);

    EmotionArray<std::vector<std::string>> dup;
    for (Emotion e : kAllEmotions) dup[index_of(e)] = {"x"};
    dup[0] = {"a", "a"};
    CHECK_THROWS_AS(SynonymLexicon{dup}, std::invalid_argument);
  }

  TEST_CASE("the shipped synonym file matches the built-in sets") {
    const auto lex = load_synonym_lexicon_file(std::string(EMOESG_RESOURCE_DIR) + "/synonyms.txt");
    const auto def = default_synonym_lexicon();
    for (Emotion e : kAllEmotions) CHECK(lex.synonyms(e) == def.synonyms(e));
    CHECK(def.synonyms(Emotion::happy) == std::vector<std::string>{"joyful", "content", "cheerful"});
  }

  TEST_CASE("retrofitting the fixture is deterministic") {
    const auto t = load_embeddings_file((testsupport::data_dir() / "glove_50x5.txt").string());
    std::ostringstream a, b;
    write_embeddings(a, retrofit(t, default_synonym_lexicon(), RetrofitConfig{}));
    write_embeddings(b, retrofit(t, default_synonym_lexicon(), RetrofitConfig{}));
    CHECK(a.str() == b.str());
  }
}
