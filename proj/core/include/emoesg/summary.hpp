#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoesg/regress.hpp"

namespace emoesg {

class Panel;

/// Triple-significance count and R^2 means over one subset of fits.
struct FitStats {
  std::size_t models = 0;  // fitted (non-skipped) specs in the subset
  std::size_t triple_significant = 0;
  std::optional<double> mean_r2_triple;
  std::optional<double> mean_r2_all;
  std::optional<double> mean_adj_r2_triple;
  std::optional<double> mean_adj_r2_all;
};

struct H3Summary {
  std::size_t significant_interactions = 0;  // p(beta3) < level, all emotions
  std::size_t excluded_neutral = 0;
  std::size_t correct = 0;
  std::size_t contradictory = 0;
  /// all_significant, h3_consistent, h3_contradictory; absent when empty.
  std::optional<WeightedEffect> all;
  std::optional<WeightedEffect> consistent;
  std::optional<WeightedEffect> contradictory_effect;
};

struct FamilySummary {
  SentimentFamily family = SentimentFamily::retro;
  std::size_t grid_size = 0;
  std::size_t skipped = 0;
  FitStats overall;
  FitStats davg;
  FitStats non_davg;
  H3Summary h3;
  /// Triple-significant R^2 per ticker / per (sentiment label, ESG column).
  std::map<std::string, FitStats> per_ticker;
  std::map<std::string, std::map<std::string, std::size_t>> per_ticker_esg_counts;
  std::map<std::pair<std::string, std::string>, FitStats> per_sentiment_esg;
  std::map<std::pair<std::string, std::string>, FitStats> per_emotion_esg;  // DAvg folded in
  std::map<std::string, std::array<std::size_t, 3>> h3_per_ticker;         // correct, contradictory, neutral
  std::vector<std::string> ticker_order;
};

struct InteractionSummary {
  double level = kDefaultSignificance;
  std::vector<FamilySummary> families;
  std::vector<std::string> correlation_columns;
  std::vector<std::vector<double>> correlation;  // Pearson, NaN for constant columns
};

/// "trust" or "trust_DAvg" for a spec's sentiment column.
std::string sentiment_label(const ModelSpec& spec);

FamilySummary summarize_family(const std::vector<GridEntry>& grid, SentimentFamily family);

/// Pearson correlation of every pair of panel columns.
void correlation_matrix(const Panel& panel, std::vector<std::string>& names, std::vector<std::vector<double>>& r);

InteractionSummary summarize(const std::map<SentimentFamily, std::vector<GridEntry>>& grids, const Panel& panel,
                             double level);

/// Summary JSON: per family the comparison metrics, the DAvg/non-DAvg
/// split and the H3 weighted-effect table.
nlohmann::ordered_json summary_to_json(const InteractionSummary& summary);

void write_grid_csv(std::ostream& out, const std::vector<GridEntry>& grid);

void write_per_ticker_counts(std::ostream& out, const InteractionSummary& s);
void write_emotion_by_esg_counts(std::ostream& out, const InteractionSummary& s);
void write_r2_heatmap(std::ostream& out, const InteractionSummary& s);
void write_h3_counts_per_ticker(std::ostream& out, const InteractionSummary& s);
void write_correlation_matrix(std::ostream& out, const InteractionSummary& s);

}  // namespace emoesg
