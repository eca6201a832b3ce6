#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "emoesg/embeddings.hpp"
#include "emoesg/errors.hpp"
#include "emoesg/scoring.hpp"
#include "emoesg/text.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace emoesg;
using testsupport::make_table;

namespace {

EmotionScore retro_score(std::initializer_list<double> v) {
  EmotionScore s;
  std::copy(v.begin(), v.end(), s.values.begin());
  return s;
}

EmotionScore retro_score_all(double v) {
  EmotionScore s;
  s.values.fill(v);
  return s;
}

// Emotion words on the compass points of the plane plus three headline words.
EmbeddingTable compass_table() {
  return make_table({{"happy", {1, 0}},
                     {"sad", {0, 1}},
                     {"angry", {-1, 0}},
                     {"fear", {0, -1}},
                     {"surprise", {1, 1}},
                     {"trust", {1, -1}},
                     {"disgust", {-1, 1}},
                     {"anticipation", {-1, -1}},
                     {"up", {1, 0}},
                     {"down", {0, 1}},
                     {"flat", {1, 1}}});
}

std::vector<Headline> headlines_from(const std::string& csv_body) {
  std::istringstream in("ticker,date,title\n" + csv_body);
  return load_headlines(in, "h.csv");
}

}  // namespace

TEST_SUITE("scoring") {
  TEST_CASE("lemmatizer rules") {
    const TokenSet vocab = {"rate", "jump", "watch", "beat", "glass", "expectation", "bus"};
    auto lem = [&](std::string_view w) { return lemmatize(w, [&](std::string_view t) { return vocab.count(std::string(t)) > 0; }); };
    CHECK(lem("rating") == "rate");
    CHECK(lem("jumping") == "jump");
    CHECK(lem("rated") == "rate");
    CHECK(lem("jumped") == "jump");
    CHECK(lem("rates") == "rate");
    CHECK(lem("watches") == "watch");
    CHECK(lem("beats") == "beat");
    CHECK(lem("glass") == "glass");
    CHECK(lem("busses") == "busses");
    CHECK(lem("bus") == "bus");
    CHECK(lem("unknowns") == "unknowns");
  }

  TEST_CASE("preprocess examples") {
    const TokenSet vocab = {"apple", "beat", "earnings", "expectation"};
    CHECK(preprocess("Apple Beats Earnings Expectations", {}, vocab) ==
          std::vector<std::string>{"apple", "beat", "earnings", "expectation"});
    CHECK(preprocess("", {}, vocab).empty());
    CHECK(preprocess("The THE the", {"the"}, vocab).empty());
    CHECK(preprocess("Q3: profit-warning, (again)!", {}, TokenSet{}) ==
          std::vector<std::string>{"q3", "profit", "warning", "again"});
    CHECK(preprocess("Caf\xC3\xA9 opens", {}, TokenSet{}) == std::vector<std::string>{"caf\xC3\xA9", "opens"});
  }

  TEST_CASE("the shipped stop-word list") {
    const auto words = load_stopwords_file(std::string(EMOESG_RESOURCE_DIR) + "/stopwords.txt");
    CHECK(words.count("the"));
    CHECK(words.count("and"));
    for (Emotion e : kAllEmotions) CHECK_FALSE(words.count(std::string(emotion_name(e))));
    const auto lex = default_synonym_lexicon();
    for (Emotion e : kAllEmotions) {
      for (const auto& s : lex.synonyms(e)) CHECK_FALSE(words.count(s));
    }
  }

  TEST_CASE("column names") {
    CHECK(retro_column(Emotion::happy, false) == "InpageTitle_Retro_happy_similarity");
    CHECK(retro_column(Emotion::happy, true) == "InpageTitle_Retro_happy_similarity_DAvg");
    CHECK(nrc_column(Emotion::happy, false) == "InpageTitle_NRC_joy");
    CHECK(nrc_column(Emotion::sad, true) == "InpageTitle_NRC_sadness_DAvg");
    CHECK(nrc_column(Emotion::angry, false) == "InpageTitle_NRC_anger");
    CHECK(nrc_column(Emotion::trust, false) == "InpageTitle_NRC_trust");
    const auto cols = sentiment_columns(SentimentFamily::retro);
    REQUIRE(cols.size() == 16);
    CHECK(cols[0] == "InpageTitle_Retro_happy_similarity");
    CHECK(cols[8] == "InpageTitle_Retro_happy_similarity_DAvg");
    CHECK(cols[15] == "InpageTitle_Retro_anticipation_similarity_DAvg");
  }

  TEST_CASE("headline vectors") {
    const auto t = make_table({{"a", {1, 0}}, {"b", {0, 1}}});
    auto v = headline_vector(std::vector<std::string>{"a", "b"}, t);
    REQUIRE(v);
    CHECK((*v)[0] == 0.5);
    CHECK((*v)[1] == 0.5);
    CHECK_FALSE(headline_vector(std::vector<std::string>{"x", "y"}, t));
    v = headline_vector(std::vector<std::string>{"a", "a", "b"}, t);
    REQUIRE(v);
    CHECK(std::fabs((*v)[0] - 2.0 / 3.0) < 1e-15);
    CHECK(std::fabs((*v)[1] - 1.0 / 3.0) < 1e-15);
  }

  TEST_CASE("retro scores") {
    const auto t = compass_table();
    const auto ev = extract_emotion_vectors(t);
    auto s = score_headline_retro(std::vector<std::string>{"trust"}, ev, t);
    REQUIRE(s);
    CHECK(s->values[index_of(Emotion::trust)] == doctest::Approx(1.0).epsilon(1e-15));

    // up, up, flat -> mean (1, 1/3); hand cosines against each compass vector.
    s = score_headline_retro(std::vector<std::string>{"up", "up", "flat"}, ev, t);
    REQUIRE(s);
    const double hx = 1.0, hy = 1.0 / 3.0, hn = std::sqrt(hx * hx + hy * hy);
    const double r2 = std::sqrt(2.0);
    const EmotionArray<double> expected = {hx / hn,          hy / hn,          -hx / hn,          -hy / hn,
                                           (hx + hy) / (hn * r2), (hx - hy) / (hn * r2), (hy - hx) / (hn * r2),
                                           -(hx + hy) / (hn * r2)};
    for (std::size_t k = 0; k < kEmotionCount; ++k) CHECK(std::fabs(s->values[k] - expected[k]) < 1e-12);

    EmbeddingTable wide(9);
    for (Emotion e : kAllEmotions) {
      std::vector<double> v(9, 0.0);
      v[index_of(e)] = 1.0;
      wide.add(std::string(emotion_name(e)), v);
    }
    std::vector<double> ortho(9, 0.0);
    ortho[8] = 2.0;
    wide.add("other", ortho);
    s = score_headline_retro(std::vector<std::string>{"other"}, extract_emotion_vectors(wide), wide);
    REQUIRE(s);
    for (double x : s->values) CHECK(x == 0.0);

    CHECK_FALSE(score_headline_retro(std::vector<std::string>{"unknown"}, ev, t));
  }

  TEST_CASE("NRC lexicon loading and counts") {
    std::istringstream in(
        "win\tjoy\t1\nwin\tanticipation\t1\nwin\tpositive\t1\nwin\tfear\t0\n"
        "loss\tsadness\t1\nloss\tfear\t1\nloss\tanger\t1\nloss\tnegative\t1\n"
        "scandal\tdisgust\t1\nscandal\tanger\t1\n");
    const auto lex = load_nrc_lexicon(in);
    auto s = score_headline_nrc(std::vector<std::string>{"win"}, lex);
    CHECK(s.source == ScoreSource::nrc_count);
    CHECK(s.values[index_of(Emotion::happy)] == 1);
    CHECK(s.values[index_of(Emotion::anticipation)] == 1);
    CHECK(s.values[index_of(Emotion::fear)] == 0);
    CHECK(s.values[index_of(Emotion::trust)] == 0);

    s = score_headline_nrc(std::vector<std::string>{}, lex);
    for (double x : s.values) CHECK(x == 0.0);

    // win, loss, loss, scandal, other: tally by hand.
    s = score_headline_nrc(std::vector<std::string>{"win", "loss", "loss", "scandal", "other"}, lex);
    const EmotionArray<double> tally = {1, 2, 3, 2, 0, 0, 1, 1};
    CHECK(s.values == tally);

    std::istringstream bad("win\tjoy\n");
    CHECK_THROWS_WITH_AS(load_nrc_lexicon(bad, "n.txt"), doctest::Contains("n.txt:1:"), DataError);
    std::istringstream bad_flag("win\tjoy\t2\n");
    CHECK_THROWS_AS(load_nrc_lexicon(bad_flag), DataError);
  }

  TEST_CASE("NRC counts are bounded by eight per token") {
    std::mt19937_64 rng(3);
    NrcLexicon lex;
    for (int w = 0; w < 20; ++w) {
      for (Emotion e : kAllEmotions) {
        if (rng() % 2) lex.add("w" + std::to_string(w), e);
      }
    }
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::string> tokens;
      const std::size_t n = rng() % 10;
      for (std::size_t i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(rng() % 25));
      const auto s = score_headline_nrc(tokens, lex);
      double total = 0.0;
      for (double x : s.values) total += x;
      CHECK(total >= 0.0);
      CHECK(total <= 8.0 * static_cast<double>(n));
    }
  }

  TEST_CASE("non-DAvg aggregation") {
    const auto single = retro_score({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
    CHECK(aggregate_non_davg(std::vector<EmotionScore>{single})->at(3) == 0.4);
    const auto two = aggregate_non_davg(std::vector<EmotionScore>{retro_score_all(0.2), retro_score_all(0.4)});
    CHECK(std::fabs(two->at(0) - 0.3) < 1e-15);
    CHECK_FALSE(aggregate_non_davg(std::vector<EmotionScore>{}));

    EmotionScore a = retro_score_all(1.0), b = retro_score_all(2.0);
    a.source = b.source = ScoreSource::nrc_count;
    CHECK(aggregate_non_davg(std::vector<EmotionScore>{a, b})->at(0) == 3.0);
    CHECK_THROWS_AS(aggregate_non_davg(std::vector<EmotionScore>{a, retro_score_all(0.1)}), std::invalid_argument);
  }

  TEST_CASE("seven headlines over three days: flat mean vs day mean") {
    const std::vector<std::vector<double>> days = {{0.1, 0.5, -0.2}, {0.9}, {0.3, 0.3, 0.7}};
    std::vector<EmotionScore> flat;
    std::vector<std::vector<EmotionScore>> grouped;
    std::vector<double> all, day_means;
    for (const auto& d : days) {
      grouped.emplace_back();
      for (double v : d) {
        flat.push_back(retro_score_all(v));
        grouped.back().push_back(retro_score_all(v));
        all.push_back(v);
      }
      day_means.push_back(oracle::mean(d));
    }
    CHECK(std::fabs(aggregate_non_davg(flat)->at(5) - oracle::mean(all)) < 1e-15);
    CHECK(std::fabs(aggregate_davg(grouped)->at(5) - oracle::mean(day_means)) < 1e-15);
  }

  TEST_CASE("DAvg differs from non-DAvg under uneven daily volume") {
    const std::vector<std::vector<EmotionScore>> days = {{retro_score_all(0.0), retro_score_all(1.0)},
                                                         {retro_score_all(1.0)}};
    const std::vector<EmotionScore> flat = {retro_score_all(0.0), retro_score_all(1.0), retro_score_all(1.0)};
    CHECK(aggregate_davg(days)->at(0) == 0.75);
    CHECK(aggregate_non_davg(flat)->at(0) == 2.0 / 3.0);

    // NRC: mean over days of daily totals.
    EmotionScore one = retro_score_all(1.0), two = retro_score_all(2.0);
    one.source = two.source = ScoreSource::nrc_count;
    CHECK(aggregate_davg({{one, two}, {one}})->at(0) == 2.0);
    CHECK_FALSE(aggregate_davg({}));
  }

  TEST_CASE("single-day and one-per-day groupings match the flat mean") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 9);
      std::vector<EmotionScore> flat;
      std::vector<std::vector<EmotionScore>> per_day, one_day(1);
      for (int i = 0; i < n; ++i) {
        EmotionScore s;
        for (auto& x : s.values) x = u(rng);
        flat.push_back(s);
        per_day.push_back({s});
        one_day[0].push_back(s);
      }
      const auto a = *aggregate_non_davg(flat);
      const auto b = *aggregate_davg(per_day);
      const auto c = *aggregate_davg(one_day);
      for (std::size_t k = 0; k < kEmotionCount; ++k) {
        CHECK(std::fabs(a[k] - b[k]) < 1e-12);
        CHECK(std::fabs(a[k] - c[k]) < 1e-12);
        double lo = 1.0, hi = -1.0;
        for (const auto& s : flat) {
          lo = std::min(lo, s.values[k]);
          hi = std::max(hi, s.values[k]);
        }
        CHECK(a[k] >= lo);
        CHECK(a[k] <= hi);
      }
    }
  }

  TEST_CASE("headline loading counts malformed rows") {
    HeadlineLoadReport rep;
    std::istringstream in(
        "ticker,date,title\n"
        "AAA,2020-01-02,Up\n"
        "AAA,2020-13-02,Bad month\n"
        ",2020-01-02,No ticker\n"
        "AAA,2020-01-03\n"
        "BBB,2020-01-04,\"Quoted, with comma\"\n");
    const auto h = load_headlines(in, "h.csv", &rep);
    CHECK(rep.rows == 5);
    CHECK(rep.malformed == 3);
    REQUIRE(h.size() == 2);
    CHECK(h[1].title == "Quoted, with comma");
  }

  TEST_CASE("three-firm walk-through") {
    const auto table = compass_table();
    auto headlines = headlines_from(
        "AAA,2020-01-02,Up\n"
        "AAA,2020-01-02,Down\n"
        "AAA,2020-01-03,UP!\n"
        "BBB,2020-05-05,Flat up\n"
        "CCC,2021-03-03,Unknown words\n"
        "CCC,2021-03-04,The down\n"
        "CCC,2019-12-31,Up\n"
        "CCC,2022-01-01,Up\n");
    tokenize_headlines(headlines, TokenSet{"the"}, table);
    std::istringstream nrc_in("up\tjoy\t1\ndown\tsadness\t1\n");
    const auto nrc = load_nrc_lexicon(nrc_in);
    ScoringOptions opt;
    opt.start_year = 2020;
    opt.end_year = 2021;
    ScoringReport rep;
    const auto rows = score_firm_years(headlines, table, &nrc, opt, &rep);

    CHECK(rep.headlines_in == 8);
    CHECK(rep.outside_window == 2);
    CHECK(rep.no_vector == 1);
    CHECK(rep.scored == 5);
    CHECK(rep.outside_window + rep.empty_after_preprocess + rep.no_vector + rep.scored == rep.headlines_in);
    REQUIRE(rows.size() == 3);

    const auto& a = rows[0];
    CHECK(a.ticker == "AAA");
    CHECK(a.year == 2020);
    CHECK(a.headline_count == 3);
    CHECK(a.day_count == 2);
    const double r2 = std::sqrt(2.0);
    const EmotionArray<double> a_flat = {2.0 / 3, 1.0 / 3, -2.0 / 3, -1.0 / 3, 1 / r2, 1 / (3 * r2), -1 / (3 * r2), -1 / r2};
    const EmotionArray<double> a_davg = {0.75, 0.25, -0.75, -0.25, 1 / r2, 1 / (2 * r2), -1 / (2 * r2), -1 / r2};
    for (std::size_t k = 0; k < kEmotionCount; ++k) {
      CHECK(std::fabs(a.retro->at(k) - a_flat[k]) < 1e-12);
      CHECK(std::fabs(a.retro_davg->at(k) - a_davg[k]) < 1e-12);
    }
    CHECK(a.nrc->at(index_of(Emotion::happy)) == 2.0);
    CHECK(a.nrc->at(index_of(Emotion::sad)) == 1.0);
    CHECK(a.nrc_davg->at(index_of(Emotion::happy)) == 1.0);
    CHECK(a.nrc_davg->at(index_of(Emotion::sad)) == 0.5);

    const auto& b = rows[1];
    CHECK(b.ticker == "BBB");
    CHECK(b.headline_count == 1);
    CHECK(std::fabs(b.retro->at(0) - 2.0 / std::sqrt(5.0)) < 1e-12);
    CHECK(*b.retro == *b.retro_davg);
    CHECK(*b.nrc == *b.nrc_davg);

    const auto& c = rows[2];
    CHECK(c.ticker == "CCC");
    CHECK(c.year == 2021);
    CHECK(c.headline_count == 1);
    CHECK(c.retro->at(index_of(Emotion::sad)) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("scoring is invariant to headline order") {
    const auto table = load_embeddings_file((testsupport::data_dir() / "glove_50x5.txt").string());
    std::mt19937_64 rng(7);
    const std::vector<std::string> words = {"market", "profit", "loss", "hopeful", "scared", "rally", "slump", "deal"};
    std::vector<Headline> hs;
    for (int i = 0; i < 60; ++i) {
      Headline h;
      h.ticker = i % 3 == 0 ? "AAA" : "BBB";
      h.date = *parse_date("2020-03-0" + std::to_string(1 + rng() % 5));
      h.title = words[rng() % words.size()] + " " + words[rng() % words.size()];
      hs.push_back(h);
    }
    tokenize_headlines(hs, {}, table);
    NrcLexicon nrc;
    nrc.add("profit", Emotion::happy);
    nrc.add("loss", Emotion::sad);
    const auto base = score_firm_years(hs, table, &nrc, {});
    std::ostringstream a;
    write_sentiment_csv(a, base, true, true);
    for (int k = 0; k < 5; ++k) {
      std::shuffle(hs.begin(), hs.end(), rng);
      std::ostringstream b;
      write_sentiment_csv(b, score_firm_years(hs, table, &nrc, {}), true, true);
      CHECK(a.str() == b.str());
    }
  }

  TEST_CASE("retrofitting feeds through to headline scores") {
    const auto table = load_embeddings_file((testsupport::data_dir() / "glove_50x5.txt").string());
    const auto retro = retrofit(table, default_synonym_lexicon(), RetrofitConfig{});
    const std::vector<std::string> tokens = {"market", "rally"};
    const auto before = score_headline_retro(tokens, extract_emotion_vectors(table), table);
    const auto after = score_headline_retro(tokens, extract_emotion_vectors(retro), retro);
    CHECK(before->values != after->values);
  }

  TEST_CASE("sentiment CSV layout") {
    FirmYearSentiment row;
    row.ticker = "AAA";
    row.year = 2020;
    row.retro = row.retro_davg = EmotionArray<double>{};
    row.headline_count = 1;
    row.day_count = 1;
    std::ostringstream os;
    write_sentiment_csv(os, {row}, true, false);
    const std::string header = os.str().substr(0, os.str().find('\n'));
    CHECK(header.rfind("ticker,year,InpageTitle_Retro_happy_similarity,", 0) == 0);
    CHECK(header.size() > 30);
    CHECK(header.substr(header.size() - 24) == "headline_count,day_count");
    CHECK(header.find("NRC") == std::string::npos);
  }
}
