#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "emoesg/emotions.hpp"
#include "emoesg/scoring.hpp"

namespace emoesg {

class Panel;

/// Minimum observations for a 4-parameter fit (parameters + 1).
inline constexpr std::size_t kMinObservations = 5;
/// Designs with a larger 2-norm condition number are skipped.
inline constexpr double kMaxConditionNumber = 1e10;
inline constexpr double kDefaultSignificance = 0.1;

struct ModelSpec {
  std::string ticker;  // a firm, or kAllFirms
  std::string esg_column;
  std::string sentiment_column;
  SentimentFamily family = SentimentFamily::retro;

  Emotion emotion() const;
  bool davg() const;
};

/// Reason a grid cell produced no fit.
struct Skip {
  std::string reason;
};

/// Row-major n x 4 design with columns [1, ESG, Sentiment, ESG x Sentiment].
struct Design {
  std::vector<double> y;
  std::vector<std::array<double, 4>> X;
};

/// Selects the cell's rows (all rows for AllFirms) and builds the design;
/// y is the normalized return column. Skip when a column is absent or
/// fewer than kMinObservations rows are available.
std::variant<Design, Skip> build_design(const Panel& panel, const ModelSpec& spec);

/// Term order of every 4-vector in a fit.
enum Term : std::size_t { kIntercept = 0, kEsg = 1, kSentiment = 2, kInteraction = 3 };

struct RegressionFit {
  std::size_t n = 0;
  std::array<double, 4> coef{};
  std::array<double, 4> se{};
  std::array<double, 4> t{};
  std::array<double, 4> p{};
  double r_squared = 0.0;
  double adj_r_squared = 0.0;
  double rss = 0.0;
  double condition_number = 0.0;
  std::vector<double> residuals;

  std::size_t df() const { return n - 4; }
};

/// Least squares via Householder QR. SEs from sigma^2 (X'X)^-1 with
/// sigma^2 = RSS / (n - 4); two-sided Student-t p-values on n - 4 df;
/// R^2 = 1 - RSS/TSS (0 when TSS = 0); adjusted R^2 = 1 - (1 - R^2)(n - 1)/(n - 4).
/// Skip on n < 5, mismatched sizes or a condition number above
/// kMaxConditionNumber.
std::variant<RegressionFit, Skip> fit_ols(std::span<const double> y, std::span<const std::array<double, 4>> X);

/// True iff the ESG, sentiment and interaction p-values are all strictly
/// below `level`. The intercept is not tested.
bool triple_filter(const RegressionFit& fit, double level = kDefaultSignificance);

enum class H3Verdict { correct, contradictory, excluded_neutral };

std::string_view h3_verdict_name(H3Verdict v);

struct H3Classification {
  Polarity polarity = Polarity::neutral;
  H3Verdict verdict = H3Verdict::excluded_neutral;
};

/// Sign of the interaction coefficient against the emotion's polarity:
/// positive emotions expect beta3 > 0, negative ones beta3 < 0, surprise is
/// excluded. Intended for fits whose interaction term is significant.
H3Classification classify_h3(const ModelSpec& spec, const RegressionFit& fit);

struct GridEntry {
  ModelSpec spec;
  std::optional<RegressionFit> fit;
  std::string skip_reason;
  bool triple = false;
  bool interaction_significant = false;
  std::optional<H3Classification> h3;  // set when interaction_significant
};

struct GridOptions {
  double level = kDefaultSignificance;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Every (ticker, ESG column, sentiment column) combination for a family:
/// firms in sorted order then AllFirms, ESG columns in canonical order,
/// the family's 16 sentiment columns in canonical order. Cells are
/// independent and may be fitted concurrently; output order is fixed.
std::vector<GridEntry> run_grid(const Panel& panel, SentimentFamily family, const GridOptions& options = {});

/// Number of cells run_grid() produces for `firm_count` firms.
constexpr std::size_t grid_size(std::size_t firm_count) { return (firm_count + 1) * 5 * 16; }

struct Effect {
  double beta = 0.0;
  double se = 0.0;
};

struct WeightedEffect {
  std::string label;
  std::size_t count = 0;
  double weighted_average = 0.0;
  double se = 0.0;  // sqrt(1 / sum of weights)
  double z = 0.0;
  double p_value = 1.0;
};

/// Fixed-effect inverse-variance mean: sum(beta / se^2) / sum(1 / se^2),
/// with a two-sided normal test of the pooled estimate. Throws
/// std::invalid_argument on an empty list or a non-positive SE.
WeightedEffect weighted_average(std::span<const Effect> effects, std::string label = {});

}  // namespace emoesg
