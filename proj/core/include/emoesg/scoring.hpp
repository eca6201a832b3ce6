#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "emoesg/date.hpp"
#include "emoesg/emotions.hpp"
#include "emoesg/text.hpp"

namespace emoesg {

class EmbeddingTable;

enum class SentimentFamily { retro, nrc };

std::string_view family_name(SentimentFamily f);
std::optional<SentimentFamily> parse_family(std::string_view name);

/// `InpageTitle_Retro_<emotion>_similarity[_DAvg]`
std::string retro_column(Emotion e, bool davg);
/// `InpageTitle_NRC_<nrc-emotion>[_DAvg]`
std::string nrc_column(Emotion e, bool davg);
std::string sentiment_column(SentimentFamily f, Emotion e, bool davg);

/// The 16 feature names of a family: 8 non-DAvg then 8 DAvg, emotion order.
std::vector<std::string> sentiment_columns(SentimentFamily f);

struct Headline {
  std::string ticker;
  Date date;
  std::string title;
  std::vector<std::string> tokens;
};

struct HeadlineLoadReport {
  std::size_t rows = 0;
  std::size_t malformed = 0;
};

/// Reads `ticker,date,title` CSV. Rows with the wrong field count, an empty
/// ticker or an unparseable date are logged and counted, not fatal. Tokens
/// are left empty; see tokenize_headlines().
std::vector<Headline> load_headlines(std::istream& in, const std::string& source_name,
                                     HeadlineLoadReport* report = nullptr);

/// Token -> emotion memberships from the NRC Emotion Lexicon, already mapped
/// onto the eight emotion labels.
class NrcLexicon {
 public:
  void add(const std::string& token, Emotion e);
  /// Bit i set when the token is associated with emotion i.
  unsigned mask(const std::string& token) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, unsigned> entries_;
};

/// Tab-separated `word<TAB>emotion<TAB>0|1`. Categories outside the eight
/// emotions (positive, negative) are ignored.
NrcLexicon load_nrc_lexicon(std::istream& in, const std::string& source_name = "<nrc>");
NrcLexicon load_nrc_lexicon_file(const std::string& path);

enum class ScoreSource { retro_similarity, nrc_count };

struct EmotionScore {
  EmotionArray<double> values{};
  ScoreSource source = ScoreSource::retro_similarity;
};

using EmotionVectors = EmotionArray<std::vector<double>>;

/// The eight (retrofitted) emotion-word vectors. Throws DataError when one
/// is missing or has zero norm.
EmotionVectors extract_emotion_vectors(const EmbeddingTable& table);

/// Mean of the in-vocabulary token vectors; nullopt when no token is known.
std::optional<std::vector<double>> headline_vector(std::span<const std::string> tokens,
                                                   const EmbeddingTable& table);

/// Cosine similarity of the headline vector with each emotion vector.
/// nullopt when the headline vector is absent or has zero norm.
std::optional<EmotionScore> score_headline_retro(std::span<const std::string> tokens,
                                                 const EmotionVectors& emotion_vectors,
                                                 const EmbeddingTable& table);

/// Per-emotion count of tokens whose lexicon entry carries that emotion.
EmotionScore score_headline_nrc(std::span<const std::string> tokens, const NrcLexicon& lexicon);

/// Flat aggregation over all of a firm-year's headlines: mean for retro
/// scores, sum for NRC counts. nullopt for empty input. Throws
/// std::invalid_argument when sources are mixed.
std::optional<EmotionArray<double>> aggregate_non_davg(std::span<const EmotionScore> scores);

/// Two-level aggregation: per-day mean (retro) or per-day total (NRC), then
/// the mean over days. Empty days are ignored; nullopt when none remain.
std::optional<EmotionArray<double>> aggregate_davg(const std::vector<std::vector<EmotionScore>>& days);

struct FirmYearSentiment {
  std::string ticker;
  int year = 0;
  std::optional<EmotionArray<double>> retro;
  std::optional<EmotionArray<double>> retro_davg;
  std::optional<EmotionArray<double>> nrc;
  std::optional<EmotionArray<double>> nrc_davg;
  std::size_t headline_count = 0;  // N_i
  std::size_t day_count = 0;       // T_i
};

struct ScoringOptions {
  int start_year = 0;
  int end_year = 0;
  bool retro = true;
  bool nrc = true;
};

struct ScoringReport {
  std::size_t headlines_in = 0;
  std::size_t outside_window = 0;
  std::size_t empty_after_preprocess = 0;
  std::size_t no_vector = 0;  // all tokens out of vocabulary, or zero-norm mean
  std::size_t scored = 0;
  std::size_t firm_years = 0;
  std::size_t firm_years_omitted = 0;  // firm-years whose every headline was excluded
};

/// Fills Headline::tokens for every headline.
void tokenize_headlines(std::vector<Headline>& headlines, const TokenSet& stopwords, const EmbeddingTable& table);

/// Scores tokenized headlines and aggregates them per (ticker, year).
/// Headlines without a headline vector are excluded from both N_i and the
/// day sets, for both families. Output is sorted by (ticker, year).
std::vector<FirmYearSentiment> score_firm_years(const std::vector<Headline>& headlines,
                                                const EmbeddingTable& table, const NrcLexicon* nrc,
                                                const ScoringOptions& options, ScoringReport* report = nullptr);

/// CSV with `ticker,year`, the selected families' 16 columns each, then
/// `headline_count,day_count`.
void write_sentiment_csv(std::ostream& out, const std::vector<FirmYearSentiment>& rows, bool retro, bool nrc);

}  // namespace emoesg
