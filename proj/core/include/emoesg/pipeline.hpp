#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoesg/embeddings.hpp"
#include "emoesg/panel.hpp"
#include "emoesg/scoring.hpp"

namespace emoesg {

inline constexpr const char* kToolVersion = "1.0.0";

/// Output file names inside RunConfig::output_dir.
namespace outputs {
inline constexpr const char* kRetrofitted = "retrofitted_embeddings.txt";
inline constexpr const char* kSentiment = "sentiment_firm_year.csv";
inline constexpr const char* kPanelJoined = "panel_joined.csv";
inline constexpr const char* kPanelImputed = "panel_imputed.csv";
inline constexpr const char* kPanelNormalized = "panel_normalized.csv";
inline constexpr const char* kPanelReport = "panel_report.json";
inline constexpr const char* kGrid = "grid_results.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kPerTicker = "per_ticker_counts.csv";
inline constexpr const char* kEmotionByEsg = "emotion_by_esg_counts.csv";
inline constexpr const char* kR2Heatmap = "r2_heatmap_esg_by_emotion.csv";
inline constexpr const char* kH3PerTicker = "h3_counts_per_ticker.csv";
inline constexpr const char* kCorrelation = "correlation_matrix.csv";
}  // namespace outputs

struct RunPaths {
  std::filesystem::path embeddings;
  std::filesystem::path synonyms;      // optional: built-in synonym sets when empty
  std::filesystem::path nrc_lexicon;   // required when the nrc family is selected
  std::filesystem::path headlines;
  std::filesystem::path esg;
  std::filesystem::path prices;
  std::filesystem::path fx;
  std::filesystem::path ticker_aliases;  // optional
  std::filesystem::path stopwords;       // optional: built-in list when empty
  std::filesystem::path output_dir;
};

struct RunConfig {
  RunPaths paths;
  RetrofitConfig retrofit;
  ImputeConfig imputation;
  double missing_threshold = 0.5;
  double significance_level = 0.1;
  int start_year = 2008;
  int end_year = 2020;
  bool retro = true;
  bool nrc = true;
  unsigned threads = 0;

  /// Canonical JSON form; relative paths are stored as resolved.
  nlohmann::ordered_json to_json() const;

  /// Parses a config document. Relative paths resolve against `base_dir`.
  /// Throws ConfigError on unknown keys, bad types or out-of-range values.
  static RunConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

  /// Value checks independent of the filesystem.
  void validate_values() const;
};

enum class Stage { retrofit, score, panel, regress };

std::string_view stage_name(Stage s);

/// Loads a JSON config file and applies `overrides` ("dotted.key=value";
/// the value is parsed as JSON when possible, otherwise taken as a string)
/// before validation.
RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

/// Checks value ranges and that every input path needed by `stages` exists.
void validate_config(const RunConfig& config, const std::vector<Stage>& stages);

/// Hex SHA-256 of a file's bytes / of a string.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

/// Per-invocation reproducibility record.
class RunManifest {
 public:
  RunManifest(std::string command, const RunConfig& config);

  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::string& role, const std::filesystem::path& path);
  /// Starts a stage; counts are attached with count().
  void begin_stage(Stage s);
  void count(const std::string& key, std::uint64_t value);
  void note(const std::string& key, nlohmann::ordered_json value);
  void end_stage();

  const nlohmann::ordered_json& json() const { return doc_; }
  /// Writes manifest_<command>.json into the output directory.
  std::filesystem::path write(const std::filesystem::path& output_dir) const;

 private:
  nlohmann::ordered_json doc_;
  nlohmann::ordered_json stage_;
  bool in_stage_ = false;
  std::chrono::steady_clock::time_point stage_start_;
};

/// The stop-word list shipped with the toolkit.
TokenSet default_stopwords();

void run_retrofit(const RunConfig& config, RunManifest& manifest);
void run_score(const RunConfig& config, RunManifest& manifest);
void run_panel(const RunConfig& config, RunManifest& manifest);
void run_regress(const RunConfig& config, RunManifest& manifest);

/// Every stage in order, through the same intermediate files the
/// individual stage commands use.
void run_all(const RunConfig& config, RunManifest& manifest);

}  // namespace emoesg
