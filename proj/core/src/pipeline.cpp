#include "emoesg/pipeline.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <set>
#include <sstream>

#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/numeric.hpp"
#include "emoesg/regress.hpp"
#include "emoesg/summary.hpp"

namespace emoesg {

extern const char* const kDefaultStopwordsText;

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::string path_text(const fs::path& p) { return p.generic_string(); }

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
  }
}

void set_dotted(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  if (key.rfind("paths.", 0) == 0 && value.is_string()) {
    const fs::path p(value.get<std::string>());
    if (p.is_relative() && !p.empty()) value = (fs::current_path() / p).lexically_normal().string();
  }

  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

bool needs_file(const fs::path& p) { return !p.empty(); }

void require_file(const fs::path& p, const char* role) {
  if (p.empty()) throw ConfigError(std::string("paths.") + role + " is required");
  if (!fs::is_regular_file(p)) throw ConfigError(std::string("paths.") + role + ": no such file '" + p.string() + "'");
}

fs::path output_path(const RunConfig& c, const char* name) { return c.paths.output_dir / name; }

void ensure_output_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.paths.output_dir, ec);
  if (ec || !fs::is_directory(c.paths.output_dir)) {
    throw ConfigError("cannot create output directory '" + c.paths.output_dir.string() + "'");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TokenSet stopwords_for(const RunConfig& config, RunManifest& manifest) {
  if (config.paths.stopwords.empty()) {
    manifest.note("stopwords", ojson{{"source", "built-in"}, {"sha256", sha256_hex(kDefaultStopwordsText)}});
    return default_stopwords();
  }
  manifest.add_input("stopwords", config.paths.stopwords);
  return load_stopwords_file(config.paths.stopwords.string());
}

}  // namespace

TokenSet default_stopwords() {
  std::istringstream in(kDefaultStopwordsText);
  return load_stopwords(in);
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::retrofit:
      return "retrofit";
    case Stage::score:
      return "score";
    case Stage::panel:
      return "panel";
    case Stage::regress:
      return "regress";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Config

ojson RunConfig::to_json() const {
  ojson families = ojson::array();
  if (retro) families.push_back("retro");
  if (nrc) families.push_back("nrc");
  return ojson{
      {"paths",
       {{"embeddings", path_text(paths.embeddings)},
        {"synonyms", path_text(paths.synonyms)},
        {"nrc_lexicon", path_text(paths.nrc_lexicon)},
        {"headlines", path_text(paths.headlines)},
        {"esg", path_text(paths.esg)},
        {"prices", path_text(paths.prices)},
        {"fx", path_text(paths.fx)},
        {"ticker_aliases", path_text(paths.ticker_aliases)},
        {"stopwords", path_text(paths.stopwords)},
        {"output_dir", path_text(paths.output_dir)}}},
      {"retrofit",
       {{"iterations", retrofit.iterations},
        {"mode", std::string(retrofit_mode_name(retrofit.mode))},
        {"alpha", retrofit.alpha},
        {"beta", retrofit.beta}}},
      {"imputation",
       {{"sweeps", imputation.sweeps},
        {"donors", imputation.donors},
        {"seed", imputation.seed},
        {"missing_threshold", missing_threshold}}},
      {"significance_level", significance_level},
      {"study_window", {{"start_year", start_year}, {"end_year", end_year}}},
      {"families", families},
      {"threads", threads},
  };
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  RunConfig c;
  try {
    reject_unknown(doc, {"paths", "retrofit", "imputation", "significance_level", "study_window", "families", "threads"},
                   "");
    if (doc.contains("paths")) {
      const auto& p = doc["paths"];
      reject_unknown(p,
                     {"embeddings", "synonyms", "nrc_lexicon", "headlines", "esg", "prices", "fx", "ticker_aliases",
                      "stopwords", "output_dir"},
                     "paths.");
      auto get = [&](const char* key) { return resolve(base_dir, p.value(key, std::string())); };
      c.paths.embeddings = get("embeddings");
      c.paths.synonyms = get("synonyms");
      c.paths.nrc_lexicon = get("nrc_lexicon");
      c.paths.headlines = get("headlines");
      c.paths.esg = get("esg");
      c.paths.prices = get("prices");
      c.paths.fx = get("fx");
      c.paths.ticker_aliases = get("ticker_aliases");
      c.paths.stopwords = get("stopwords");
      c.paths.output_dir = get("output_dir");
    }
    if (doc.contains("retrofit")) {
      const auto& r = doc["retrofit"];
      reject_unknown(r, {"iterations", "mode", "alpha", "beta"}, "retrofit.");
      c.retrofit.iterations = r.value("iterations", c.retrofit.iterations);
      if (r.contains("mode")) {
        const auto name = r["mode"].get<std::string>();
        const auto mode = parse_retrofit_mode(name);
        if (!mode) throw ConfigError("retrofit.mode must be paper-mean or faruqui, got '" + name + "'");
        c.retrofit.mode = *mode;
      }
      c.retrofit.alpha = r.value("alpha", c.retrofit.alpha);
      c.retrofit.beta = r.value("beta", c.retrofit.beta);
    }
    if (doc.contains("imputation")) {
      const auto& m = doc["imputation"];
      reject_unknown(m, {"sweeps", "donors", "seed", "missing_threshold"}, "imputation.");
      c.imputation.sweeps = m.value("sweeps", c.imputation.sweeps);
      c.imputation.donors = m.value("donors", c.imputation.donors);
      if (m.contains("seed")) {
        if (!m["seed"].is_number_unsigned()) throw ConfigError("imputation.seed must be a non-negative integer");
        c.imputation.seed = m["seed"].get<std::uint64_t>();
      }
      c.missing_threshold = m.value("missing_threshold", c.missing_threshold);
    }
    c.significance_level = doc.value("significance_level", c.significance_level);
    if (doc.contains("study_window")) {
      const auto& w = doc["study_window"];
      reject_unknown(w, {"start_year", "end_year"}, "study_window.");
      c.start_year = w.value("start_year", c.start_year);
      c.end_year = w.value("end_year", c.end_year);
    }
    if (doc.contains("families")) {
      c.retro = c.nrc = false;
      for (const auto& f : doc["families"]) {
        const auto name = f.get<std::string>();
        const auto fam = parse_family(name);
        if (!fam) throw ConfigError("unknown sentiment family '" + name + "'");
        (*fam == SentimentFamily::retro ? c.retro : c.nrc) = true;
      }
    }
    if (doc.contains("threads")) {
      if (!doc["threads"].is_number_unsigned()) throw ConfigError("threads must be a non-negative integer");
      c.threads = doc["threads"].get<unsigned>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate_values();
  return c;
}

void RunConfig::validate_values() const {
  retrofit.validate();
  imputation.validate();
  if (!(significance_level > 0.0 && significance_level < 1.0)) {
    throw ConfigError("significance_level must lie in (0, 1)");
  }
  if (!(missing_threshold >= 0.0 && missing_threshold <= 1.0)) {
    throw ConfigError("imputation.missing_threshold must lie in [0, 1]");
  }
  if (start_year > end_year) throw ConfigError("study_window.start_year must not exceed end_year");
  if (!retro && !nrc) throw ConfigError("families must select at least one of retro, nrc");
  if (paths.output_dir.empty()) throw ConfigError("paths.output_dir is required");
}

RunConfig load_run_config(const fs::path& file, const std::vector<std::string>& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + file.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  for (const auto& o : overrides) set_dotted(doc, o);
  return RunConfig::from_json(doc, fs::absolute(file).parent_path());
}

void validate_config(const RunConfig& config, const std::vector<Stage>& stages) {
  config.validate_values();
  for (Stage s : stages) {
    switch (s) {
      case Stage::retrofit:
        require_file(config.paths.embeddings, "embeddings");
        if (needs_file(config.paths.synonyms)) require_file(config.paths.synonyms, "synonyms");
        break;
      case Stage::score:
        require_file(config.paths.headlines, "headlines");
        if (config.nrc) require_file(config.paths.nrc_lexicon, "nrc_lexicon");
        if (needs_file(config.paths.stopwords)) require_file(config.paths.stopwords, "stopwords");
        break;
      case Stage::panel:
        require_file(config.paths.esg, "esg");
        require_file(config.paths.prices, "prices");
        require_file(config.paths.fx, "fx");
        if (needs_file(config.paths.ticker_aliases)) require_file(config.paths.ticker_aliases, "ticker_aliases");
        break;
      case Stage::regress:
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Digests and manifest

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return sha256_hex(os.str());
}

RunManifest::RunManifest(std::string command, const RunConfig& config) {
  const ojson cfg = config.to_json();
  doc_ = ojson{
      {"tool", "emoesg"},
      {"version", kToolVersion},
      {"command", std::move(command)},
      {"config_sha256", sha256_hex(cfg.dump())},
      {"seed", config.imputation.seed},
      {"config", cfg},
      {"inputs", ojson::array()},
      {"stages", ojson::array()},
  };
}

void RunManifest::add_input(const std::string& role, const fs::path& path) {
  auto& inputs = doc_["inputs"];
  for (const auto& i : inputs) {
    if (i["role"] == role) return;
  }
  inputs.push_back(ojson{{"role", role},
                         {"path", path_text(path)},
                         {"bytes", fs::file_size(path)},
                         {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::string& role, const fs::path& path) {
  if (!in_stage_) throw std::logic_error("add_output outside a stage");
  stage_["outputs"].push_back(ojson{{"role", role},
                                    {"file", path.filename().generic_string()},
                                    {"bytes", fs::file_size(path)},
                                    {"sha256", sha256_file(path)}});
}

void RunManifest::begin_stage(Stage s) {
  if (in_stage_) throw std::logic_error("stage already open");
  stage_ = ojson{{"stage", std::string(stage_name(s))},
                 {"counts", ojson::object()},
                 {"notes", ojson::object()},
                 {"outputs", ojson::array()}};
  in_stage_ = true;
  stage_start_ = std::chrono::steady_clock::now();
}

void RunManifest::count(const std::string& key, std::uint64_t value) {
  if (!in_stage_) throw std::logic_error("count outside a stage");
  stage_["counts"][key] = value;
}

void RunManifest::note(const std::string& key, ojson value) {
  if (!in_stage_) throw std::logic_error("note outside a stage");
  stage_["notes"][key] = std::move(value);
}

void RunManifest::end_stage() {
  if (!in_stage_) throw std::logic_error("no open stage");
  stage_["wall_clock_seconds"] = seconds_since(stage_start_);
  doc_["stages"].push_back(std::move(stage_));
  stage_ = ojson();
  in_stage_ = false;
}

fs::path RunManifest::write(const fs::path& output_dir) const {
  const fs::path p = output_dir / ("manifest_" + doc_["command"].get<std::string>() + ".json");
  write_file(p, doc_.dump(2) + "\n");
  return p;
}

// ---------------------------------------------------------------------------
// Stages

void run_retrofit(const RunConfig& config, RunManifest& manifest) {
  validate_config(config, {Stage::retrofit});
  ensure_output_dir(config);
  manifest.begin_stage(Stage::retrofit);

  manifest.add_input("embeddings", config.paths.embeddings);
  const EmbeddingTable table = load_embeddings_file(config.paths.embeddings.string());
  SynonymLexicon lexicon = default_synonym_lexicon();
  if (config.paths.synonyms.empty()) {
    manifest.note("synonyms", "built-in");
  } else {
    manifest.add_input("synonyms", config.paths.synonyms);
    lexicon = load_synonym_lexicon_file(config.paths.synonyms.string());
  }

  RetrofitReport report;
  const EmbeddingTable out = retrofit(table, lexicon, config.retrofit, &report);
  const fs::path dest = output_path(config, outputs::kRetrofitted);
  write_file(dest, render([&](std::ostream& os) { write_embeddings(os, out); }));

  std::size_t edges = 0;
  for (auto n : report.neighbor_counts) edges += n;
  manifest.count("embedding_rows_in", table.size());
  manifest.count("embedding_rows_out", out.size());
  manifest.count("emotion_words", kEmotionCount);
  manifest.count("synonym_edges_used", edges);
  manifest.count("synonyms_skipped", report.skipped_synonyms.size());
  manifest.note("skipped_synonyms", report.skipped_synonyms);
  manifest.add_output("retrofitted_embeddings", dest);
  manifest.end_stage();
}

void run_score(const RunConfig& config, RunManifest& manifest) {
  validate_config(config, {Stage::score});
  ensure_output_dir(config);
  const fs::path vectors = output_path(config, outputs::kRetrofitted);
  if (!fs::is_regular_file(vectors)) {
    throw DataError("score: '" + vectors.string() + "' not found; run the retrofit stage first");
  }
  manifest.begin_stage(Stage::score);

  manifest.add_input("retrofitted_embeddings", vectors);
  const EmbeddingTable table = load_embeddings_file(vectors.string());
  const TokenSet stopwords = stopwords_for(config, manifest);

  std::optional<NrcLexicon> nrc;
  if (config.nrc) {
    manifest.add_input("nrc_lexicon", config.paths.nrc_lexicon);
    nrc = load_nrc_lexicon_file(config.paths.nrc_lexicon.string());
  }

  manifest.add_input("headlines", config.paths.headlines);
  HeadlineLoadReport load_report;
  std::vector<Headline> headlines;
  {
    auto in = open_input(config.paths.headlines);
    headlines = load_headlines(in, config.paths.headlines.string(), &load_report);
  }
  tokenize_headlines(headlines, stopwords, table);

  ScoringOptions options;
  options.start_year = config.start_year;
  options.end_year = config.end_year;
  options.retro = config.retro;
  options.nrc = config.nrc;
  ScoringReport report;
  const auto rows = score_firm_years(headlines, table, nrc ? &*nrc : nullptr, options, &report);
  if (rows.empty()) throw DataError("score: no firm-year could be scored");

  const fs::path dest = output_path(config, outputs::kSentiment);
  write_file(dest, render([&](std::ostream& os) { write_sentiment_csv(os, rows, config.retro, config.nrc); }));

  manifest.count("headline_rows", load_report.rows);
  manifest.count("malformed_rows", load_report.malformed);
  manifest.count("outside_window", report.outside_window);
  manifest.count("empty_after_preprocess", report.empty_after_preprocess);
  manifest.count("no_vector", report.no_vector);
  manifest.count("scored", report.scored);
  manifest.count("firm_years_out", report.firm_years);
  manifest.count("firm_years_omitted", report.firm_years_omitted);
  manifest.count("nrc_lexicon_entries", nrc ? nrc->size() : 0);
  manifest.add_output("sentiment", dest);
  manifest.end_stage();
}

void run_panel(const RunConfig& config, RunManifest& manifest) {
  validate_config(config, {Stage::panel});
  ensure_output_dir(config);
  const fs::path sentiment_path = output_path(config, outputs::kSentiment);
  if (!fs::is_regular_file(sentiment_path)) {
    throw DataError("panel: '" + sentiment_path.string() + "' not found; run the score stage first");
  }
  manifest.begin_stage(Stage::panel);

  manifest.add_input("sentiment", sentiment_path);
  Panel sentiment;
  {
    auto in = open_input(sentiment_path);
    sentiment = read_panel_csv(in, sentiment_path.string(), {"headline_count", "day_count"});
  }
  manifest.add_input("esg", config.paths.esg);
  std::vector<EsgRecord> esg;
  {
    auto in = open_input(config.paths.esg);
    esg = load_esg(in, config.paths.esg.string());
  }
  manifest.add_input("prices", config.paths.prices);
  std::vector<PriceRecord> prices;
  {
    auto in = open_input(config.paths.prices);
    prices = load_prices(in, config.paths.prices.string());
  }
  manifest.add_input("fx", config.paths.fx);
  std::vector<FxRecord> fx_rows;
  {
    auto in = open_input(config.paths.fx);
    fx_rows = load_fx(in, config.paths.fx.string());
  }
  TickerAliases aliases;
  if (!config.paths.ticker_aliases.empty()) {
    manifest.add_input("ticker_aliases", config.paths.ticker_aliases);
    auto in = open_input(config.paths.ticker_aliases);
    aliases = load_aliases(in, config.paths.ticker_aliases.string());
  }

  ReturnReport ret_report;
  const auto returns = yearly_returns(prices, FxTable(fx_rows), aliases, &ret_report);

  JoinReport join;
  Panel panel = join_panel(esg, sentiment, returns, &join);
  if (panel.rows() == 0) {
    std::set<std::string> esg_t, sent_t, ret_t;
    for (const auto& r : esg) esg_t.insert(r.ticker);
    for (const auto& t : sentiment.tickers()) sent_t.insert(t);
    for (const auto& [k, v] : returns) ret_t.insert(k.first);
    std::size_t common = 0;
    for (const auto& t : esg_t) common += sent_t.count(t) && ret_t.count(t);
    throw DataError("panel: the (ticker, year) join is empty: " + std::to_string(join.esg_keys) + " ESG keys, " +
                    std::to_string(join.sentiment_keys) + " sentiment keys, " + std::to_string(join.return_keys) +
                    " return keys; " + std::to_string(esg_t.size()) + "/" + std::to_string(sent_t.size()) + "/" +
                    std::to_string(ret_t.size()) + " tickers, " + std::to_string(common) +
                    " present in all three. Check ticker aliases and the study window.");
  }
  const fs::path joined_path = output_path(config, outputs::kPanelJoined);
  write_file(joined_path, render([&](std::ostream& os) { write_panel_csv(os, panel); }));

  const std::size_t missing_before = panel.missing_cells();
  const auto dropped = drop_overmissing(panel, config.missing_threshold);
  ImputationReport imp;
  const Panel imputed = impute_mice_pmm(panel, config.imputation, &imp);
  const fs::path imputed_path = output_path(config, outputs::kPanelImputed);
  write_file(imputed_path, render([&](std::ostream& os) { write_panel_csv(os, imputed); }));

  std::vector<ColumnRange> ranges;
  const Panel normalized = min_max_normalize(imputed, &ranges);
  const fs::path normalized_path = output_path(config, outputs::kPanelNormalized);
  write_file(normalized_path, render([&](std::ostream& os) { write_panel_csv(os, normalized); }));

  ojson dropped_json = ojson::array();
  for (const auto& d : dropped) {
    dropped_json.push_back(ojson{{"column", d.name}, {"missing_fraction", d.missing_fraction}});
  }
  ojson per_column = ojson::object();
  for (const auto& [name, n] : imp.per_column) per_column[name] = n;
  ojson ranges_json = ojson::array();
  for (const auto& r : ranges) {
    ranges_json.push_back(ojson{{"column", r.name}, {"min", r.min}, {"max", r.max}, {"constant", r.constant}});
  }
  const ojson report = {
      {"join",
       {{"esg_keys", join.esg_keys},
        {"sentiment_keys", join.sentiment_keys},
        {"return_keys", join.return_keys},
        {"joined", join.joined},
        {"esg_only_excluded", join.esg_only_excluded},
        {"sentiment_only_excluded", join.sentiment_only_excluded},
        {"return_only_excluded", join.return_only_excluded}}},
      {"dropped_columns", {{"threshold", config.missing_threshold}, {"columns", dropped_json}}},
      {"imputation",
       {{"no_op", imp.cells_imputed == 0},
        {"sweeps", config.imputation.sweeps},
        {"donors", config.imputation.donors},
        {"seed", config.imputation.seed},
        {"cells_imputed", imp.cells_imputed},
        {"per_column", per_column}}},
      {"normalization", {{"columns", ranges_json}}},
  };
  const fs::path report_path = output_path(config, outputs::kPanelReport);
  write_file(report_path, report.dump(2) + "\n");

  manifest.count("esg_rows", esg.size());
  manifest.count("sentiment_rows", sentiment.rows());
  manifest.count("price_rows", ret_report.price_rows);
  manifest.count("price_rows_without_fx", ret_report.fx_excluded);
  manifest.count("price_tickers", ret_report.tickers);
  manifest.count("price_tickers_too_short", ret_report.tickers_too_short);
  manifest.count("return_firm_years", ret_report.firm_years);
  manifest.count("joined_rows", join.joined);
  manifest.count("esg_only_excluded", join.esg_only_excluded);
  manifest.count("sentiment_only_excluded", join.sentiment_only_excluded);
  manifest.count("return_only_excluded", join.return_only_excluded);
  manifest.count("missing_cells", missing_before);
  manifest.count("columns_dropped", dropped.size());
  manifest.count("cells_imputed", imp.cells_imputed);
  manifest.count("rows_out", normalized.rows());
  manifest.count("columns_out", normalized.cols());
  manifest.add_output("panel_joined", joined_path);
  manifest.add_output("panel_imputed", imputed_path);
  manifest.add_output("panel_normalized", normalized_path);
  manifest.add_output("panel_report", report_path);
  manifest.end_stage();
}

void run_regress(const RunConfig& config, RunManifest& manifest) {
  config.validate_values();
  ensure_output_dir(config);
  const fs::path panel_path = output_path(config, outputs::kPanelNormalized);
  if (!fs::is_regular_file(panel_path)) {
    throw DataError("regress: '" + panel_path.string() + "' not found; run the panel stage first");
  }
  manifest.begin_stage(Stage::regress);
  manifest.add_input("panel_normalized", panel_path);
  Panel panel;
  {
    auto in = open_input(panel_path);
    panel = read_panel_csv(in, panel_path.string());
  }
  panel.state = NormalizationState::normalized;

  GridOptions options;
  options.level = config.significance_level;
  options.threads = config.threads;
  std::map<SentimentFamily, std::vector<GridEntry>> grids;
  std::vector<GridEntry> all;
  for (SentimentFamily f : {SentimentFamily::retro, SentimentFamily::nrc}) {
    if (f == SentimentFamily::retro ? !config.retro : !config.nrc) continue;
    auto grid = run_grid(panel, f, options);
    std::size_t fitted = 0, triple = 0;
    for (const auto& e : grid) {
      fitted += e.fit.has_value();
      triple += e.triple;
    }
    const std::string fam(family_name(f));
    manifest.count(fam + "_cells", grid.size());
    manifest.count(fam + "_fitted", fitted);
    manifest.count(fam + "_skipped", grid.size() - fitted);
    manifest.count(fam + "_triple_significant", triple);
    all.insert(all.end(), grid.begin(), grid.end());
    grids.emplace(f, std::move(grid));
  }
  const InteractionSummary summary = summarize(grids, panel, config.significance_level);

  const std::vector<std::pair<const char*, std::string>> files = {
      {outputs::kGrid, render([&](std::ostream& os) { write_grid_csv(os, all); })},
      {outputs::kSummary, summary_to_json(summary).dump(2) + "\n"},
      {outputs::kPerTicker, render([&](std::ostream& os) { write_per_ticker_counts(os, summary); })},
      {outputs::kEmotionByEsg, render([&](std::ostream& os) { write_emotion_by_esg_counts(os, summary); })},
      {outputs::kR2Heatmap, render([&](std::ostream& os) { write_r2_heatmap(os, summary); })},
      {outputs::kH3PerTicker, render([&](std::ostream& os) { write_h3_counts_per_ticker(os, summary); })},
      {outputs::kCorrelation, render([&](std::ostream& os) { write_correlation_matrix(os, summary); })},
  };
  manifest.count("panel_rows", panel.rows());
  manifest.count("firms", panel.distinct_tickers().size());
  for (const auto& [name, content] : files) {
    const fs::path dest = output_path(config, name);
    write_file(dest, content);
    manifest.add_output(fs::path(name).stem().string(), dest);
  }
  manifest.end_stage();
}

void run_all(const RunConfig& config, RunManifest& manifest) {
  validate_config(config, {Stage::retrofit, Stage::score, Stage::panel, Stage::regress});
  run_retrofit(config, manifest);
  run_score(config, manifest);
  run_panel(config, manifest);
  run_regress(config, manifest);
}

}  // namespace emoesg
