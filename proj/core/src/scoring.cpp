#include "emoesg/scoring.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "emoesg/csv.hpp"
#include "emoesg/embeddings.hpp"
#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/numeric.hpp"

namespace emoesg {

std::string_view family_name(SentimentFamily f) { return f == SentimentFamily::retro ? "retro" : "nrc"; }

std::optional<SentimentFamily> parse_family(std::string_view name) {
  if (name == "retro") return SentimentFamily::retro;
  if (name == "nrc") return SentimentFamily::nrc;
  return std::nullopt;
}

std::string retro_column(Emotion e, bool davg) {
  std::string name = "InpageTitle_Retro_" + std::string(emotion_name(e)) + "_similarity";
  if (davg) name += "_DAvg";
  return name;
}

std::string nrc_column(Emotion e, bool davg) {
  std::string name = "InpageTitle_NRC_" + std::string(nrc_emotion_name(e));
  if (davg) name += "_DAvg";
  return name;
}

std::string sentiment_column(SentimentFamily f, Emotion e, bool davg) {
  return f == SentimentFamily::retro ? retro_column(e, davg) : nrc_column(e, davg);
}

std::vector<std::string> sentiment_columns(SentimentFamily f) {
  std::vector<std::string> out;
  for (bool davg : {false, true}) {
    for (Emotion e : kAllEmotions) out.push_back(sentiment_column(f, e, davg));
  }
  return out;
}

std::vector<Headline> load_headlines(std::istream& in, const std::string& source_name, HeadlineLoadReport* report) {
  csv::Reader reader(in, source_name);
  csv::expect_header(reader, {"ticker", "date", "title"});
  std::vector<Headline> out;
  HeadlineLoadReport rep;
  while (auto rec = reader.next()) {
    ++rep.rows;
    const auto& f = rec->fields;
    std::optional<Date> date;
    if (f.size() == 3) date = parse_date(f[1]);
    if (f.size() != 3 || f[0].empty() || !date) {
      ++rep.malformed;
      log().warn("{}:{}: malformed headline row skipped", source_name, rec->line);
      continue;
    }
    out.push_back(Headline{f[0], *date, f[2], {}});
  }
  if (report) *report = rep;
  return out;
}

void NrcLexicon::add(const std::string& token, Emotion e) { entries_[token] |= 1u << index_of(e); }

unsigned NrcLexicon::mask(const std::string& token) const {
  const auto it = entries_.find(token);
  return it == entries_.end() ? 0u : it->second;
}

NrcLexicon load_nrc_lexicon(std::istream& in, const std::string& source_name) {
  NrcLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw DataError::at(source_name, line_no, "expected word<TAB>emotion<TAB>0|1");
    }
    std::string word = line.substr(0, t1);
    const std::string label = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string flag = line.substr(t2 + 1);
    if (word.empty() || (flag != "0" && flag != "1")) {
      throw DataError::at(source_name, line_no, "expected word<TAB>emotion<TAB>0|1");
    }
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto emotion = parse_emotion(label);
    if (!emotion || flag == "0") continue;
    lex.add(word, *emotion);
  }
  return lex;
}

NrcLexicon load_nrc_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open NRC lexicon: " + path);
  return load_nrc_lexicon(in, path);
}

EmotionVectors extract_emotion_vectors(const EmbeddingTable& table) {
  EmotionVectors out;
  for (Emotion e : kAllEmotions) {
    const auto v = table.find(emotion_name(e));
    if (v.empty()) throw DataError("emotion word '" + std::string(emotion_name(e)) + "' missing from embeddings");
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (!(norm2 > 0.0)) throw DataError("emotion vector '" + std::string(emotion_name(e)) + "' has zero norm");
    out[index_of(e)].assign(v.begin(), v.end());
  }
  return out;
}

std::optional<std::vector<double>> headline_vector(std::span<const std::string> tokens, const EmbeddingTable& table) {
  std::vector<CompensatedSum> acc(table.dimension());
  std::size_t used = 0;
  for (const auto& tok : tokens) {
    const auto v = table.find(tok);
    if (v.empty()) continue;
    for (std::size_t d = 0; d < v.size(); ++d) acc[d].add(v[d]);
    ++used;
  }
  if (used == 0) return std::nullopt;
  std::vector<double> out(table.dimension());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = acc[d].value() / static_cast<double>(used);
  return out;
}

std::optional<EmotionScore> score_headline_retro(std::span<const std::string> tokens,
                                                 const EmotionVectors& emotion_vectors, const EmbeddingTable& table) {
  const auto hv = headline_vector(tokens, table);
  if (!hv) return std::nullopt;
  double norm2 = 0.0;
  for (double x : *hv) norm2 += x * x;
  if (!(norm2 > 0.0)) return std::nullopt;
  EmotionScore score;
  score.source = ScoreSource::retro_similarity;
  for (Emotion e : kAllEmotions) {
    score.values[index_of(e)] = cosine_similarity(*hv, emotion_vectors[index_of(e)]);
  }
  return score;
}

EmotionScore score_headline_nrc(std::span<const std::string> tokens, const NrcLexicon& lexicon) {
  EmotionScore score;
  score.source = ScoreSource::nrc_count;
  for (const auto& tok : tokens) {
    const unsigned m = lexicon.mask(tok);
    for (Emotion e : kAllEmotions) {
      if (m & (1u << index_of(e))) score.values[index_of(e)] += 1.0;
    }
  }
  return score;
}

namespace {

void check_source(std::span<const EmotionScore> scores, ScoreSource source) {
  for (const auto& s : scores) {
    if (s.source != source) throw std::invalid_argument("aggregation over mixed score sources");
  }
}

EmotionArray<double> reduce(std::span<const EmotionScore> scores, bool as_mean) {
  EmotionArray<CompensatedSum> acc;
  for (const auto& s : scores) {
    for (std::size_t k = 0; k < kEmotionCount; ++k) acc[k].add(s.values[k]);
  }
  EmotionArray<double> out{};
  for (std::size_t k = 0; k < kEmotionCount; ++k) {
    out[k] = as_mean ? acc[k].value() / static_cast<double>(scores.size()) : acc[k].value();
  }
  return out;
}

}  // namespace

std::optional<EmotionArray<double>> aggregate_non_davg(std::span<const EmotionScore> scores) {
  if (scores.empty()) return std::nullopt;
  const ScoreSource source = scores.front().source;
  check_source(scores, source);
  return reduce(scores, source == ScoreSource::retro_similarity);
}

std::optional<EmotionArray<double>> aggregate_davg(const std::vector<std::vector<EmotionScore>>& days) {
  std::vector<EmotionScore> daily;
  std::optional<ScoreSource> source;
  for (const auto& day : days) {
    if (day.empty()) continue;
    if (!source) source = day.front().source;
    check_source(day, *source);
    EmotionScore d;
    d.source = *source;
    d.values = reduce(day, *source == ScoreSource::retro_similarity);
    daily.push_back(d);
  }
  if (daily.empty()) return std::nullopt;
  return reduce(daily, true);
}

void tokenize_headlines(std::vector<Headline>& headlines, const TokenSet& stopwords, const EmbeddingTable& table) {
  for (auto& h : headlines) h.tokens = preprocess(h.title, stopwords, table);
}

std::vector<FirmYearSentiment> score_firm_years(const std::vector<Headline>& headlines, const EmbeddingTable& table,
                                                const NrcLexicon* nrc, const ScoringOptions& options,
                                                ScoringReport* report) {
  if (options.nrc && !nrc) throw std::invalid_argument("NRC scoring requested without a lexicon");
  const EmotionVectors emotions = extract_emotion_vectors(table);
  const bool windowed = options.start_year != 0 || options.end_year != 0;

  struct Bucket {
    std::map<std::chrono::sys_days, std::vector<EmotionScore>> retro_days;
    std::map<std::chrono::sys_days, std::vector<EmotionScore>> nrc_days;
    std::size_t seen = 0;
  };
  std::map<std::pair<std::string, int>, Bucket> buckets;
  ScoringReport rep;
  rep.headlines_in = headlines.size();

  for (const auto& h : headlines) {
    const int year = year_of(h.date);
    if (windowed && (year < options.start_year || year > options.end_year)) {
      ++rep.outside_window;
      continue;
    }
    Bucket& b = buckets[{h.ticker, year}];
    ++b.seen;
    if (h.tokens.empty()) {
      ++rep.empty_after_preprocess;
      continue;
    }
    const auto retro = score_headline_retro(h.tokens, emotions, table);
    if (!retro) {
      ++rep.no_vector;
      continue;
    }
    ++rep.scored;
    const auto day = std::chrono::sys_days(h.date);
    b.retro_days[day].push_back(*retro);
    if (options.nrc) b.nrc_days[day].push_back(score_headline_nrc(h.tokens, *nrc));
  }

  std::vector<FirmYearSentiment> out;
  for (auto& [key, b] : buckets) {
    if (b.retro_days.empty()) {
      ++rep.firm_years_omitted;
      continue;
    }
    FirmYearSentiment row;
    row.ticker = key.first;
    row.year = key.second;
    row.day_count = b.retro_days.size();

    std::vector<EmotionScore> flat_retro, flat_nrc;
    std::vector<std::vector<EmotionScore>> days_retro, days_nrc;
    for (auto& [day, scores] : b.retro_days) {
      flat_retro.insert(flat_retro.end(), scores.begin(), scores.end());
      days_retro.push_back(scores);
    }
    for (auto& [day, scores] : b.nrc_days) {
      flat_nrc.insert(flat_nrc.end(), scores.begin(), scores.end());
      days_nrc.push_back(scores);
    }
    row.headline_count = flat_retro.size();
    if (options.retro) {
      row.retro = aggregate_non_davg(flat_retro);
      row.retro_davg = aggregate_davg(days_retro);
    }
    if (options.nrc) {
      row.nrc = aggregate_non_davg(flat_nrc);
      row.nrc_davg = aggregate_davg(days_nrc);
    }
    out.push_back(std::move(row));
  }
  rep.firm_years = out.size();
  if (rep.no_vector + rep.empty_after_preprocess > 0) {
    log().info("scoring: {} headlines excluded without a usable vector", rep.no_vector + rep.empty_after_preprocess);
  }
  if (report) *report = rep;
  return out;
}

void write_sentiment_csv(std::ostream& out, const std::vector<FirmYearSentiment>& rows, bool retro, bool nrc) {
  std::vector<std::string> header = {"ticker", "year"};
  if (retro) {
    for (auto& c : sentiment_columns(SentimentFamily::retro)) header.push_back(c);
  }
  if (nrc) {
    for (auto& c : sentiment_columns(SentimentFamily::nrc)) header.push_back(c);
  }
  header.push_back("headline_count");
  header.push_back("day_count");
  csv::write_row(out, header);

  auto append = [](std::vector<std::string>& fields, const std::optional<EmotionArray<double>>& vals) {
    for (std::size_t k = 0; k < kEmotionCount; ++k) fields.push_back(vals ? format_real((*vals)[k]) : "");
  };
  for (const auto& r : rows) {
    std::vector<std::string> fields = {r.ticker, std::to_string(r.year)};
    if (retro) {
      append(fields, r.retro);
      append(fields, r.retro_davg);
    }
    if (nrc) {
      append(fields, r.nrc);
      append(fields, r.nrc_davg);
    }
    fields.push_back(std::to_string(r.headline_count));
    fields.push_back(std::to_string(r.day_count));
    csv::write_row(out, fields);
  }
}

}  // namespace emoesg
