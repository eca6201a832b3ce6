#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emoesg/date.hpp"

namespace emoesg {

inline constexpr std::array<std::string_view, 5> kEsgColumns = {
    "overall_score", "econ_score", "envrn_score", "corpgov_score", "social_score"};

/// Dependent variable: yearly mean of daily gross returns on adjusted close.
inline constexpr std::string_view kReturnColumn =
    "Adj Close Adjusted close price adjusted for splits and dividend and/or capital gain distributions._R_DAvg";

/// Pseudo-ticker selecting every firm's rows for pooled estimation.
inline constexpr std::string_view kAllFirms = "AllFirms";

// ---------------------------------------------------------------------------
// Raw inputs

struct EsgRecord {
  std::string ticker;
  int year = 0;
  std::array<std::optional<double>, 5> scores;  // kEsgColumns order
};

struct PriceRecord {
  std::string ticker;
  Date date;
  double adj_close = 0.0;
  std::string currency;
};

struct FxRecord {
  Date date;
  std::string pair;  // "EUR/USD": USD per one EUR
  double rate = 0.0;
};

struct LoadReport {
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

/// `ticker,year,overall_score,econ_score,envrn_score,corpgov_score,social_score`;
/// empty score fields are missing. Throws DataError on duplicate keys or
/// non-numeric values.
std::vector<EsgRecord> load_esg(std::istream& in, const std::string& source_name = "<esg>");

/// `ticker,date,adj_close,currency`. Throws DataError on non-positive
/// prices or duplicate (ticker, date).
std::vector<PriceRecord> load_prices(std::istream& in, const std::string& source_name = "<prices>");

/// `date,pair,rate` with strictly positive rates.
std::vector<FxRecord> load_fx(std::istream& in, const std::string& source_name = "<fx>");

/// Maps price/headline-source tickers onto ESG-source tickers, e.g. BP -> BPORD.
class TickerAliases {
 public:
  void add(std::string esg_ticker, std::string price_ticker);
  /// ESG-source ticker for a price-source ticker (identity when unmapped).
  std::string canonical(const std::string& price_ticker) const;
  const std::map<std::string, std::string>& entries() const { return price_to_esg_; }

 private:
  std::map<std::string, std::string> price_to_esg_;
};

/// `esg_ticker,price_ticker` CSV.
TickerAliases load_aliases(std::istream& in, const std::string& source_name = "<aliases>");

// ---------------------------------------------------------------------------
// Returns

inline constexpr int kFxLookbackDays = 7;

class FxTable {
 public:
  explicit FxTable(const std::vector<FxRecord>& records);

  /// USD per unit of `currency` on `date`, or from the nearest earlier date
  /// within the lookback window. Accepts either CCY/USD or USD/CCY pairs.
  /// USD itself is 1.
  std::optional<double> rate_to_usd(const std::string& currency, const Date& date) const;

 private:
  // currency -> date-sorted (date, USD per unit)
  std::map<std::string, std::vector<std::pair<std::chrono::sys_days, double>>> series_;
};

/// adj_close converted to USD; nullopt when no rate is available.
std::optional<double> convert_to_usd(const PriceRecord& price, const FxTable& fx);

struct DatedValue {
  Date date;
  double value = 0.0;
};

/// R_t = p_t / p_{t-1} over consecutive observations of a date-sorted
/// series; no calendar interpolation. Empty when fewer than two prices.
std::vector<DatedValue> daily_gross_returns(std::span<const DatedValue> prices);

/// Mean of a year's gross returns; nullopt when empty.
std::optional<double> return_r_davg(std::span<const double> returns);

struct ReturnReport {
  std::size_t price_rows = 0;
  std::size_t fx_excluded = 0;
  std::size_t tickers = 0;
  std::size_t tickers_too_short = 0;
  std::size_t firm_years = 0;
};

/// (ESG ticker, year) -> R_DAvg. Prices are aliased to ESG tickers,
/// converted to USD, date-sorted per ticker, turned into gross returns
/// (across year boundaries) and averaged within each calendar year.
std::map<std::pair<std::string, int>, double> yearly_returns(const std::vector<PriceRecord>& prices,
                                                             const FxTable& fx, const TickerAliases& aliases,
                                                             ReturnReport* report = nullptr);

// ---------------------------------------------------------------------------
// Panel

enum class NormalizationState { raw, normalized };

/// One row per (ticker, year); numeric columns stored column-major with NaN
/// marking a missing cell.
class Panel {
 public:
  Panel() = default;
  Panel(std::vector<std::string> columns);

  std::size_t rows() const { return tickers_.size(); }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& tickers() const { return tickers_; }
  const std::vector<int>& years() const { return years_; }

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::span<const double> column(std::size_t c) const { return data_[c]; }
  std::span<double> column(std::size_t c) { return data_[c]; }
  std::span<const double> column(std::string_view name) const;

  double at(std::size_t row, std::size_t col) const { return data_[col][row]; }
  double& at(std::size_t row, std::size_t col) { return data_[col][row]; }

  void add_row(std::string ticker, int year, std::span<const double> values);
  void drop_column(std::size_t c);

  /// Sorted distinct firm tickers.
  std::vector<std::string> distinct_tickers() const;
  /// Row indices for a ticker, or all rows for kAllFirms.
  std::vector<std::size_t> rows_for(std::string_view ticker) const;

  std::size_t missing_cells() const;

  NormalizationState state = NormalizationState::raw;

  friend bool operator==(const Panel& a, const Panel& b);

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> tickers_;
  std::vector<int> years_;
  std::vector<std::vector<double>> data_;
};

/// Reads a panel-shaped CSV (`ticker,year,<numeric columns...>`); empty
/// fields become missing. Columns listed in `ignore` are skipped.
Panel read_panel_csv(std::istream& in, const std::string& source_name,
                     const std::vector<std::string>& ignore = {});

/// Writes `ticker,year,<columns>`; missing cells are written empty.
void write_panel_csv(std::ostream& out, const Panel& panel);

struct JoinReport {
  std::size_t esg_keys = 0;
  std::size_t sentiment_keys = 0;
  std::size_t return_keys = 0;
  std::size_t joined = 0;
  std::size_t esg_only_excluded = 0;        // ESG keys not joined
  std::size_t sentiment_only_excluded = 0;  // sentiment keys not joined
  std::size_t return_only_excluded = 0;     // return keys not joined
};

/// Inner join on (ticker, year). Columns: 5 ESG scores, the sentiment
/// table's numeric columns, then kReturnColumn. Rows sorted by key.
Panel join_panel(const std::vector<EsgRecord>& esg, const Panel& sentiment,
                 const std::map<std::pair<std::string, int>, double>& returns, JoinReport* report = nullptr);

struct DroppedColumn {
  std::string name;
  double missing_fraction = 0.0;
};

/// Removes every column whose missing fraction exceeds `threshold`
/// (a column exactly at the threshold is kept).
std::vector<DroppedColumn> drop_overmissing(Panel& panel, double threshold = 0.5);

struct ImputeConfig {
  int sweeps = 10;
  int donors = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ImputationReport {
  std::size_t cells_imputed = 0;
  std::map<std::string, std::size_t> per_column;
};

/// Ridge added to the normal equations of every imputation regression.
inline constexpr double kImputationRidge = 1e-8;

/// MICE with predictive mean matching, run separately per ticker. Missing
/// cells start from random observed values; each sweep visits incomplete
/// columns in column order, regresses the column on all others (OLS with
/// an intercept and kImputationRidge), and replaces each missing cell by
/// the observed value of a donor drawn uniformly from the `donors` nearest
/// predicted means. Deterministic for a given seed. Throws DataError when a
/// ticker has fewer than donors + 1 observed values in an incomplete column.
Panel impute_mice_pmm(const Panel& panel, const ImputeConfig& config, ImputationReport* report = nullptr);

struct ColumnRange {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  bool constant = false;
};

/// x' = (x - min) / (max - min) per column, min/max pooled over all rows.
/// A constant column becomes 0.5 everywhere. Throws DataError on missing
/// cells.
Panel min_max_normalize(const Panel& panel, std::vector<ColumnRange>* ranges = nullptr);

}  // namespace emoesg
