#include "emoesg/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "emoesg/csv.hpp"
#include "emoesg/embeddings.hpp"
#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/numeric.hpp"
#include "emoesg/panel.hpp"
#include "emoesg/pipeline.hpp"
#include "emoesg/scoring.hpp"

namespace emoesg {

namespace fs = std::filesystem;
using std::chrono::sys_days;

namespace {

constexpr std::size_t kDim = 12;
constexpr double kReturnBase = 0.98;
constexpr double kReturnSpan = 0.04;
constexpr double kReturnWiggle = 0.004;

const std::vector<std::string> kFiller = {
    "market", "share",   "revenue", "quarter",  "profit",   "deal",     "stock",  "bank",     "energy", "report",
    "growth", "investor", "dividend", "merger", "price",    "sale",     "outlook", "board",   "plan",   "bond",
    "fund",   "trade",   "rate",    "cost",     "debt",     "loss",     "gain",   "margin",   "demand", "supply",
    "rally",  "slump",   "forecast", "guidance", "buyback", "launch",   "probe",  "lawsuit",  "upgrade", "downgrade"};

const std::vector<std::string> kTitleStopwords = {"the", "of", "on", "and", "to", "for", "in", "after", "over"};
const std::vector<std::string> kOutOfVocabulary = {"acme", "zenith", "q3", "ceo"};

// NRC category order, as in the published lexicon files.
const std::vector<std::string> kNrcCategories = {"anger",    "anticipation", "disgust", "fear",     "joy",
                                                 "negative", "positive",     "sadness", "surprise", "trust"};

// Filler words with an NRC association, so counts are not driven by the
// emotion pools alone.
const std::vector<std::pair<std::string, std::vector<std::string>>> kFillerNrc = {
    {"profit", {"anticipation", "joy", "positive", "trust"}},
    {"loss", {"anger", "fear", "negative", "sadness"}},
    {"lawsuit", {"anger", "disgust", "fear", "negative"}},
    {"rally", {"anticipation", "joy", "positive"}},
    {"slump", {"negative", "sadness"}},
    {"probe", {"fear", "negative"}},
    {"forecast", {"anticipation", "trust"}},
    {"launch", {"anticipation", "positive", "surprise"}},
    {"upgrade", {"positive", "trust"}},
    {"downgrade", {"disgust", "negative", "sadness"}},
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
bool chance(Rng& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }
template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}

double round_to(double x, double scale) { return std::round(x * scale) / scale; }

bool is_weekend(sys_days d) {
  const std::chrono::weekday w(d);
  return w == std::chrono::Saturday || w == std::chrono::Sunday;
}

sys_days next_weekday(sys_days d) {
  while (is_weekend(d)) d += std::chrono::days(1);
  return d;
}

/// `m` distinct weekdays spread over the calendar year.
std::vector<sys_days> trading_days(int year, int m) {
  const sys_days jan1 = std::chrono::year(year) / std::chrono::January / 1;
  const sys_days dec31 = std::chrono::year(year) / std::chrono::December / 31;
  const long days = (dec31 - jan1).count() + 1;
  std::vector<sys_days> out;
  for (int k = 0; k < m; ++k) {
    sys_days d = next_weekday(jan1 + std::chrono::days((2 * k + 1) * days / (2 * m)));
    if (!out.empty() && d <= out.back()) d = next_weekday(out.back() + std::chrono::days(1));
    if (d > dec31) throw ConfigError("synth: too many trading days for one year");
    out.push_back(d);
  }
  return out;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::vector<std::string> emotion_pool(const SynonymLexicon& lex, Emotion e) {
  std::vector<std::string> pool = {std::string(emotion_name(e))};
  for (const auto& s : lex.synonyms(e)) {
    if (s.find(' ') == std::string::npos) pool.push_back(s);
  }
  return pool;
}

std::string synonyms_text(const SynonymLexicon& lex) {
  std::string out = "# emotion: synonyms\n";
  for (Emotion e : kAllEmotions) {
    out += std::string(emotion_name(e)) + ":";
    const auto& syn = lex.synonyms(e);
    for (std::size_t i = 0; i < syn.size(); ++i) out += (i ? ", " : " ") + syn[i];
    out += "\n";
  }
  return out;
}

std::string nrc_text(const SynonymLexicon& lex) {
  std::map<std::string, std::set<std::string>> assoc;
  for (Emotion e : kAllEmotions) {
    const Polarity pol = polarity_of(e);
    for (const auto& w : emotion_pool(lex, e)) {
      auto& cats = assoc[w];
      cats.insert(std::string(nrc_emotion_name(e)));
      if (pol == Polarity::positive) cats.insert("positive");
      if (pol == Polarity::negative) cats.insert("negative");
    }
  }
  for (const auto& [w, cats] : kFillerNrc) assoc[w].insert(cats.begin(), cats.end());
  for (const auto& w : {"market", "stock", "share"}) assoc[w];

  std::string out;
  for (const auto& [word, cats] : assoc) {
    for (const auto& c : kNrcCategories) out += word + "\t" + c + "\t" + (cats.count(c) ? "1" : "0") + "\n";
  }
  return out;
}

std::string stopwords_text() {
  const TokenSet words = default_stopwords();
  std::vector<std::string> sorted(words.begin(), words.end());
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& w : sorted) out += w + "\n";
  return out;
}

std::string embeddings_text(Rng& rng, const SynonymLexicon& lex) {
  EmbeddingTable table(kDim);
  auto vec = [&](const std::vector<double>* center, double center_weight, double noise) {
    std::vector<double> v(kDim);
    for (std::size_t i = 0; i < kDim; ++i) {
      const double c = center ? center_weight * (*center)[i] : 0.0;
      v[i] = round_to(c + noise * normal(rng), 1e5);
    }
    return v;
  };
  for (Emotion e : kAllEmotions) {
    std::vector<double> center(kDim);
    for (auto& c : center) c = normal(rng);
    table.add(std::string(emotion_name(e)), vec(&center, 0.5, 1.0));
    for (const auto& s : lex.synonyms(e)) {
      if (s.find(' ') != std::string::npos || table.contains(s)) continue;
      table.add(s, vec(&center, 1.0, 0.4));
    }
  }
  for (const auto& w : kFiller) table.add(w, vec(nullptr, 0.0, 1.0));
  std::ostringstream os;
  write_embeddings(os, table);
  return os.str();
}

std::string make_title(Rng& rng, const std::vector<std::vector<std::string>>& pools,
                       const std::discrete_distribution<int>& mood) {
  auto mood_draw = mood;
  std::vector<std::string> words;
  words.push_back(pick(rng, pools[static_cast<std::size_t>(mood_draw(rng))]));
  if (chance(rng, 0.4)) words.push_back(pick(rng, pools[static_cast<std::size_t>(mood_draw(rng))]));
  const int fillers = uniform_int(rng, 2, 4);
  for (int i = 0; i < fillers; ++i) {
    std::string w = pick(rng, kFiller);
    if (w.back() != 's' && w.back() != 'y' && chance(rng, 0.2)) w += "s";
    words.push_back(std::move(w));
  }
  const int stops = uniform_int(rng, 1, 2);
  for (int i = 0; i < stops; ++i) words.push_back(pick(rng, kTitleStopwords));
  if (chance(rng, 0.15)) words.push_back(pick(rng, kOutOfVocabulary));
  std::shuffle(words.begin(), words.end(), rng);

  std::string title;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string w = capitalize(words[i]);
    if (i == 0 && chance(rng, 0.2)) w += ":";
    if (i == words.size() - 1 && chance(rng, 0.1)) w = "\"" + w + "\"";
    if (i) title += (i == 2 && chance(rng, 0.15)) ? ", " : " ";
    title += w;
  }
  return title;
}

}  // namespace

std::string synth_ticker(int i) { return fmt::format("FIRM{:02d}", i + 1); }

void SynthConfig::validate() const {
  if (n_years < 6) throw ConfigError("synth: n_years must be >= 6");
  if (n_firms < 2 || n_firms > 500) throw ConfigError("synth: n_firms must lie in [2, 500]");
  if (start_year < 1901 || start_year + n_years > 2200) throw ConfigError("synth: years must lie in 1901..2199");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ConfigError("synth: noise_sd must be >= 0");
  if (headlines_per_year < 1 || headlines_per_year > 200) {
    throw ConfigError("synth: headlines_per_year must lie in [1, 200]");
  }
  if (trading_days_per_year < 2 || trading_days_per_year > 200) {
    throw ConfigError("synth: trading_days_per_year must lie in [2, 200]");
  }
  if (!(esg_missing_fraction >= 0.0 && esg_missing_fraction <= 0.5)) {
    throw ConfigError("synth: esg_missing_fraction must lie in [0, 0.5]");
  }

  std::set<std::string> sentiment_names;
  for (auto f : {SentimentFamily::retro, SentimentFamily::nrc}) {
    for (const auto& c : sentiment_columns(f)) sentiment_names.insert(c);
  }
  std::set<std::string> planted;
  for (const auto& p : plants) {
    bool known = false;
    for (int i = 0; i < n_firms; ++i) known = known || p.ticker == synth_ticker(i);
    if (!known) throw ConfigError("synth: plant ticker '" + p.ticker + "' is not a generated firm");
    if (!planted.insert(p.ticker).second) throw ConfigError("synth: ticker '" + p.ticker + "' planted twice");
    if (std::find(kEsgColumns.begin(), kEsgColumns.end(), p.esg_column) == kEsgColumns.end()) {
      throw ConfigError("synth: unknown ESG column '" + p.esg_column + "'");
    }
    if (!sentiment_names.count(p.sentiment_column)) {
      throw ConfigError("synth: unknown sentiment column '" + p.sentiment_column + "'");
    }
    for (double c : p.coef) {
      if (!std::isfinite(c)) throw ConfigError("synth: planted coefficients must be finite");
    }
  }
  if (static_cast<int>(planted.size()) >= n_firms) {
    throw ConfigError("synth: at least one firm must stay unplanted to anchor the return scale");
  }
}

SynthDataset generate_synth(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SynthDataset out;
  const int end_year = config.start_year + config.n_years - 1;
  const SynonymLexicon lex = default_synonym_lexicon();

  // Lexical resources.
  out.files["synonyms.txt"] = synonyms_text(lex);
  out.files["nrc_lexicon.txt"] = nrc_text(lex);
  out.files["stopwords.txt"] = stopwords_text();
  out.files["embeddings.txt"] = embeddings_text(rng, lex);

  std::vector<std::vector<std::string>> pools;
  for (Emotion e : kAllEmotions) pools.push_back(emotion_pool(lex, e));

  // Headlines, plus one malformed row the replay below leaves out.
  std::string valid_headlines;
  {
    std::ostringstream os;
    csv::write_row(os, {"ticker", "date", "title"});
    for (int f = 0; f < config.n_firms; ++f) {
      const std::string ticker = synth_ticker(f);
      const sys_days before = std::chrono::year(config.start_year - 1) / std::chrono::December / 15;
      const std::discrete_distribution<int> flat(kEmotionCount, 0.0, 1.0, [](double) { return 1.0; });
      csv::write_row(os, {ticker, format_date(Date(before)), make_title(rng, pools, flat)});
      for (int y = config.start_year; y <= end_year; ++y) {
        std::vector<double> weights(kEmotionCount);
        for (auto& w : weights) w = std::pow(uniform(rng, 0.0, 1.0), 2.0) + 1e-3;
        const std::discrete_distribution<int> mood(weights.begin(), weights.end());
        const int spread = config.headlines_per_year / 4;
        const int count = std::max(1, config.headlines_per_year + uniform_int(rng, -spread, spread));
        const sys_days jan1 = std::chrono::year(y) / std::chrono::January / 1;
        const int days = std::chrono::year(y).is_leap() ? 366 : 365;
        sys_days last = jan1;
        for (int h = 0; h < count; ++h) {
          const sys_days d = (h > 0 && chance(rng, 0.3)) ? last : jan1 + std::chrono::days(uniform_int(rng, 0, days - 1));
          last = d;
          csv::write_row(os, {ticker, format_date(Date(d)), make_title(rng, pools, mood)});
        }
      }
    }
    valid_headlines = os.str();
    csv::write_row(os, {synth_ticker(0), std::to_string(config.start_year) + "-02-30", "Row with an invalid date"});
    out.files["headlines.csv"] = os.str();
  }

  // ESG scores; planted firms stay complete.
  std::set<std::string> planted;
  for (const auto& p : config.plants) planted.insert(p.ticker);
  {
    const ImputeConfig defaults;
    const int max_missing = std::min(config.n_years / 2, config.n_years - (defaults.donors + 1));
    std::ostringstream os;
    std::vector<std::string> header = {"ticker", "year"};
    for (auto c : kEsgColumns) header.emplace_back(c);
    csv::write_row(os, header);
    std::vector<std::vector<std::vector<bool>>> missing(static_cast<std::size_t>(config.n_firms));
    for (int f = 0; f < config.n_firms; ++f) {
      auto& m = missing[static_cast<std::size_t>(f)];
      m.assign(kEsgColumns.size(), std::vector<bool>(static_cast<std::size_t>(config.n_years), false));
      if (planted.count(synth_ticker(f)) || config.esg_missing_fraction == 0.0) continue;
      for (auto& col : m) {
        int n = 0;
        for (int y = 0; y < config.n_years; ++y) {
          if (n < max_missing && chance(rng, config.esg_missing_fraction)) {
            col[static_cast<std::size_t>(y)] = true;
            ++n;
          }
        }
      }
    }
    for (int f = 0; f < config.n_firms; ++f) {
      for (int y = 0; y < config.n_years; ++y) {
        std::vector<std::string> row = {synth_ticker(f), std::to_string(config.start_year + y)};
        for (std::size_t c = 0; c < kEsgColumns.size(); ++c) {
          const double v = round_to(uniform(rng, 5.0, 95.0), 100.0);
          row.push_back(missing[static_cast<std::size_t>(f)][c][static_cast<std::size_t>(y)] ? std::string()
                                                                                           : format_shortest(v));
        }
        csv::write_row(os, row);
      }
    }
    out.files["esg.csv"] = os.str();
  }

  // Replay retrofit, scoring, join and normalization on the emitted files.
  Panel normalized;
  {
    std::istringstream emb_in(out.files["embeddings.txt"]);
    const EmbeddingTable raw = load_embeddings(emb_in, "embeddings.txt");
    std::istringstream syn_in(out.files["synonyms.txt"]);
    const EmbeddingTable table = retrofit(raw, load_synonym_lexicon(syn_in, "synonyms.txt"), RetrofitConfig{});
    std::istringstream stop_in(out.files["stopwords.txt"]);
    const TokenSet stopwords = load_stopwords(stop_in);
    std::istringstream nrc_in(out.files["nrc_lexicon.txt"]);
    const NrcLexicon nrc = load_nrc_lexicon(nrc_in, "nrc_lexicon.txt");
    std::istringstream head_in(valid_headlines);
    auto headlines = load_headlines(head_in, "headlines.csv");
    tokenize_headlines(headlines, stopwords, table);
    ScoringOptions options;
    options.start_year = config.start_year;
    options.end_year = end_year;
    const auto rows = score_firm_years(headlines, table, &nrc, options);

    std::ostringstream sent_os;
    write_sentiment_csv(sent_os, rows, true, true);
    std::istringstream sent_in(sent_os.str());
    const Panel sentiment = read_panel_csv(sent_in, "sentiment", {"headline_count", "day_count"});
    std::istringstream esg_in(out.files["esg.csv"]);
    const auto esg = load_esg(esg_in, "esg.csv");
    std::map<std::pair<std::string, int>, double> placeholder;
    for (int f = 0; f < config.n_firms; ++f) {
      for (int y = config.start_year; y <= end_year; ++y) {
        placeholder[{synth_ticker(f), y}] = static_cast<double>(placeholder.size());
      }
    }
    Panel joined = join_panel(esg, sentiment, placeholder);
    if (joined.rows() != static_cast<std::size_t>(config.n_firms * config.n_years)) {
      throw std::logic_error("synth: generated headlines do not cover every firm-year");
    }
    // Donor values lie inside each column's observed range, so any observed
    // fill leaves the pooled min/max, and hence the planted rows, unchanged.
    for (std::size_t c = 0; c < joined.cols(); ++c) {
      for (std::size_t r = 0; r < joined.rows(); ++r) {
        if (!std::isnan(joined.at(r, c))) continue;
        for (std::size_t k : joined.rows_for(joined.tickers()[r])) {
          if (!std::isnan(joined.at(k, c))) {
            joined.at(r, c) = joined.at(k, c);
            break;
          }
        }
      }
    }
    normalized = min_max_normalize(joined);
  }

  // Normalized return targets.
  std::map<std::pair<std::string, int>, double> target;
  std::string anchor;
  for (int f = 0; f < config.n_firms && anchor.empty(); ++f) {
    if (!planted.count(synth_ticker(f))) anchor = synth_ticker(f);
  }
  for (int f = 0; f < config.n_firms; ++f) {
    const std::string ticker = synth_ticker(f);
    if (planted.count(ticker)) continue;
    for (int y = config.start_year; y <= end_year; ++y) target[{ticker, y}] = uniform(rng, 0.05, 0.95);
  }
  target[{anchor, config.start_year}] = 0.0;
  target[{anchor, config.start_year + 1}] = 1.0;

  for (const auto& plant : config.plants) {
    SynthDataset::Realization real;
    const auto e_col = *normalized.column_index(plant.esg_column);
    const auto s_col = *normalized.column_index(plant.sentiment_column);
    for (std::size_t r : normalized.rows_for(plant.ticker)) {
      const double e = normalized.at(r, e_col);
      const double s = normalized.at(r, s_col);
      const auto& b = plant.coef;
      const double f = b[0] + b[1] * e + b[2] * s + b[3] * e * s;
      const double y = f + config.noise_sd * normal(rng);
      real.years.push_back(normalized.years()[r]);
      real.esg.push_back(e);
      real.sentiment.push_back(s);
      real.expected.push_back(f);
      real.target.push_back(y);
      target[{plant.ticker, normalized.years()[r]}] = y;
      if (y < 0.0 || y > 1.0) {
        log().warn("synth: planted return for {} {} is {:.4f}, outside [0, 1]; recovered coefficients will be rescaled",
                   plant.ticker, normalized.years()[r], y);
      }
    }
    out.realizations.push_back(std::move(real));
  }

  // FX: EUR/USD on weekdays, with every ninth weekday missing.
  std::vector<FxRecord> fx_rows;
  {
    std::ostringstream os;
    csv::write_row(os, {"date", "pair", "rate"});
    double rate = round_to(uniform(rng, 1.05, 1.45), 1e4);
    int weekday_index = 0;
    const sys_days first = std::chrono::year(config.start_year - 1) / std::chrono::December / 1;
    const sys_days last = std::chrono::year(end_year) / std::chrono::December / 31;
    for (sys_days d = first; d <= last; d += std::chrono::days(1)) {
      if (is_weekend(d)) continue;
      rate = std::clamp(round_to(rate * std::exp(0.004 * normal(rng)), 1e4), 0.8, 1.8);
      if (++weekday_index % 9 == 0) continue;
      fx_rows.push_back(FxRecord{Date(d), "EUR/USD", rate});
      csv::write_row(os, {format_date(Date(d)), "EUR/USD", format_shortest(rate)});
    }
    out.files["fx.csv"] = os.str();
  }
  const FxTable fx(fx_rows);

  // Prices whose yearly mean gross return hits each target.
  {
    std::ostringstream prices, aliases;
    csv::write_row(prices, {"ticker", "date", "adj_close", "currency"});
    csv::write_row(aliases, {"esg_ticker", "price_ticker"});
    for (int f = 0; f < config.n_firms; ++f) {
      const std::string ticker = synth_ticker(f);
      const bool aliased = f % 2 == 1;
      const std::string price_ticker = aliased ? fmt::format("P{:02d}.X", f + 1) : ticker;
      if (aliased) csv::write_row(aliases, {ticker, price_ticker});
      const std::string currency = f % 3 == 2 ? "EUR" : "USD";

      auto emit = [&](sys_days d, double usd) {
        double quoted = usd;
        if (currency != "USD") quoted = usd / *fx.rate_to_usd(currency, Date(d));
        csv::write_row(prices, {price_ticker, format_date(Date(d)), format_real(quoted), currency});
      };

      double p = round_to(uniform(rng, 20.0, 200.0), 100.0);
      sys_days d = next_weekday(std::chrono::year(config.start_year - 1) / std::chrono::December / 18);
      for (int k = 0; k < 3; ++k) {
        emit(d, p);
        d = next_weekday(d + std::chrono::days(1));
      }
      for (int y = config.start_year; y <= end_year; ++y) {
        const double r = kReturnBase + kReturnSpan * target.at({ticker, y});
        const auto days = trading_days(y, config.trading_days_per_year);
        for (std::size_t k = 0; k < days.size(); ++k) {
          double wiggle = (k % 2 == 0 ? 1.0 : -1.0) * kReturnWiggle;
          if (days.size() % 2 == 1 && k + 1 == days.size()) wiggle = 0.0;
          p *= r + wiggle;
          emit(days[k], p);
        }
      }
    }
    out.files["prices.csv"] = prices.str();
    out.files["ticker_aliases.csv"] = aliases.str();
  }

  {
    std::ostringstream os;
    csv::write_row(os, {"ticker", "esg_column", "sentiment_column", "alpha", "beta1", "beta2", "beta3", "noise_sd"});
    for (const auto& p : config.plants) {
      csv::write_row(os, {p.ticker, p.esg_column, p.sentiment_column, format_real(p.coef[0]), format_real(p.coef[1]),
                          format_real(p.coef[2]), format_real(p.coef[3]), format_real(config.noise_sd)});
    }
    out.files["planted.csv"] = os.str();
  }

  const nlohmann::ordered_json cfg = {
      {"paths",
       {{"embeddings", "embeddings.txt"},
        {"synonyms", "synonyms.txt"},
        {"nrc_lexicon", "nrc_lexicon.txt"},
        {"headlines", "headlines.csv"},
        {"esg", "esg.csv"},
        {"prices", "prices.csv"},
        {"fx", "fx.csv"},
        {"ticker_aliases", "ticker_aliases.csv"},
        {"stopwords", "stopwords.txt"},
        {"output_dir", "out"}}},
      {"retrofit", {{"iterations", 10}, {"mode", "paper-mean"}, {"alpha", 1.0}, {"beta", 1.0}}},
      {"imputation", {{"sweeps", 10}, {"donors", 5}, {"seed", config.seed}, {"missing_threshold", 0.5}}},
      {"significance_level", 0.1},
      {"study_window", {{"start_year", config.start_year}, {"end_year", end_year}}},
      {"families", {"retro", "nrc"}},
  };
  out.files["config.json"] = cfg.dump(2) + "\n";
  return out;
}

void write_synth(const SynthDataset& data, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create '" + dir.string() + "'");
  for (const auto& [name, content] : data.files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    out << content;
  }
}

}  // namespace emoesg
