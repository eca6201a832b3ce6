#include "emoesg/panel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "emoesg/csv.hpp"
#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/numeric.hpp"

namespace emoesg {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

bool is_missing(double x) { return std::isnan(x); }

int parse_year(const std::string& text, const std::string& source, std::size_t line) {
  int y = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), y);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError::at(source, line, "invalid year '" + text + "'");
  }
  return y;
}

double parse_number(const std::string& text, const std::string& source, std::size_t line, const char* what) {
  double x = 0.0;
  if (!parse_real(text, x)) throw DataError::at(source, line, std::string("non-numeric ") + what + " '" + text + "'");
  return x;
}

void expect_fields(const csv::Record& rec, std::size_t n, const std::string& source) {
  if (rec.fields.size() != n) {
    throw DataError::at(source, rec.line,
                        "expected " + std::to_string(n) + " fields, found " + std::to_string(rec.fields.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Raw inputs

std::vector<EsgRecord> load_esg(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  std::vector<std::string> header = {"ticker", "year"};
  for (auto c : kEsgColumns) header.emplace_back(c);
  csv::expect_header(reader, header);

  std::vector<EsgRecord> out;
  std::set<std::pair<std::string, int>> keys;
  while (auto rec = reader.next()) {
    expect_fields(*rec, header.size(), source_name);
    EsgRecord r;
    r.ticker = rec->fields[0];
    if (r.ticker.empty()) throw DataError::at(source_name, rec->line, "empty ticker");
    r.year = parse_year(rec->fields[1], source_name, rec->line);
    for (std::size_t k = 0; k < kEsgColumns.size(); ++k) {
      const auto& f = rec->fields[2 + k];
      if (!f.empty()) r.scores[k] = parse_number(f, source_name, rec->line, "ESG score");
    }
    if (!keys.insert({r.ticker, r.year}).second) {
      throw DataError::at(source_name, rec->line, "duplicate (ticker, year) " + r.ticker + "/" + std::to_string(r.year));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PriceRecord> load_prices(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  csv::expect_header(reader, {"ticker", "date", "adj_close", "currency"});
  std::vector<PriceRecord> out;
  std::set<std::pair<std::string, std::chrono::sys_days>> keys;
  while (auto rec = reader.next()) {
    expect_fields(*rec, 4, source_name);
    PriceRecord p;
    p.ticker = rec->fields[0];
    if (p.ticker.empty()) throw DataError::at(source_name, rec->line, "empty ticker");
    const auto d = parse_date(rec->fields[1]);
    if (!d) throw DataError::at(source_name, rec->line, "invalid date '" + rec->fields[1] + "'");
    p.date = *d;
    p.adj_close = parse_number(rec->fields[2], source_name, rec->line, "adj_close");
    if (!(p.adj_close > 0.0)) throw DataError::at(source_name, rec->line, "adj_close must be positive");
    p.currency = rec->fields[3];
    if (p.currency.empty()) throw DataError::at(source_name, rec->line, "empty currency");
    if (!keys.insert({p.ticker, std::chrono::sys_days(p.date)}).second) {
      throw DataError::at(source_name, rec->line, "duplicate (ticker, date)");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<FxRecord> load_fx(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  csv::expect_header(reader, {"date", "pair", "rate"});
  std::vector<FxRecord> out;
  while (auto rec = reader.next()) {
    expect_fields(*rec, 3, source_name);
    FxRecord r;
    const auto d = parse_date(rec->fields[0]);
    if (!d) throw DataError::at(source_name, rec->line, "invalid date '" + rec->fields[0] + "'");
    r.date = *d;
    r.pair = rec->fields[1];
    if (r.pair.size() != 7 || r.pair[3] != '/') {
      throw DataError::at(source_name, rec->line, "pair must look like EUR/USD");
    }
    r.rate = parse_number(rec->fields[2], source_name, rec->line, "rate");
    if (!(r.rate > 0.0)) throw DataError::at(source_name, rec->line, "rate must be positive");
    out.push_back(std::move(r));
  }
  return out;
}

void TickerAliases::add(std::string esg_ticker, std::string price_ticker) {
  price_to_esg_[std::move(price_ticker)] = std::move(esg_ticker);
}

std::string TickerAliases::canonical(const std::string& price_ticker) const {
  const auto it = price_to_esg_.find(price_ticker);
  return it == price_to_esg_.end() ? price_ticker : it->second;
}

TickerAliases load_aliases(std::istream& in, const std::string& source_name) {
  csv::Reader reader(in, source_name);
  csv::expect_header(reader, {"esg_ticker", "price_ticker"});
  TickerAliases out;
  std::set<std::string> seen;
  while (auto rec = reader.next()) {
    expect_fields(*rec, 2, source_name);
    if (rec->fields[0].empty() || rec->fields[1].empty()) throw DataError::at(source_name, rec->line, "empty ticker");
    if (!seen.insert(rec->fields[1]).second) {
      throw DataError::at(source_name, rec->line, "price ticker '" + rec->fields[1] + "' aliased twice");
    }
    out.add(rec->fields[0], rec->fields[1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Returns

FxTable::FxTable(const std::vector<FxRecord>& records) {
  for (const auto& r : records) {
    const std::string base = r.pair.substr(0, 3);
    const std::string quote = r.pair.substr(4, 3);
    const auto day = std::chrono::sys_days(r.date);
    if (quote == "USD") {
      series_[base].emplace_back(day, r.rate);
    } else if (base == "USD") {
      series_[quote].emplace_back(day, 1.0 / r.rate);
    }
  }
  for (auto& [ccy, s] : series_) {
    std::stable_sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
}

std::optional<double> FxTable::rate_to_usd(const std::string& currency, const Date& date) const {
  if (currency == "USD") return 1.0;
  const auto it = series_.find(currency);
  if (it == series_.end()) return std::nullopt;
  const auto& s = it->second;
  const auto day = std::chrono::sys_days(date);
  // Last observation on or before `day`.
  auto pos = std::upper_bound(s.begin(), s.end(), day, [](const auto& d, const auto& e) { return d < e.first; });
  if (pos == s.begin()) return std::nullopt;
  --pos;
  if ((day - pos->first).count() > kFxLookbackDays) return std::nullopt;
  return pos->second;
}

std::optional<double> convert_to_usd(const PriceRecord& price, const FxTable& fx) {
  const auto rate = fx.rate_to_usd(price.currency, price.date);
  if (!rate) return std::nullopt;
  if (price.currency == "USD") return price.adj_close;
  return price.adj_close * *rate;
}

std::vector<DatedValue> daily_gross_returns(std::span<const DatedValue> prices) {
  std::vector<DatedValue> out;
  if (prices.size() < 2) return out;
  out.reserve(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) {
    out.push_back({prices[i].date, prices[i].value / prices[i - 1].value});
  }
  return out;
}

std::optional<double> return_r_davg(std::span<const double> returns) {
  if (returns.empty()) return std::nullopt;
  return mean(returns);
}

std::map<std::pair<std::string, int>, double> yearly_returns(const std::vector<PriceRecord>& prices, const FxTable& fx,
                                                             const TickerAliases& aliases, ReturnReport* report) {
  ReturnReport rep;
  rep.price_rows = prices.size();
  std::map<std::string, std::vector<DatedValue>> series;
  for (const auto& p : prices) {
    const auto usd = convert_to_usd(p, fx);
    if (!usd) {
      ++rep.fx_excluded;
      continue;
    }
    series[aliases.canonical(p.ticker)].push_back({p.date, *usd});
  }
  if (rep.fx_excluded) log().warn("returns: {} price rows without an FX rate in the lookback window", rep.fx_excluded);

  std::map<std::pair<std::string, int>, double> out;
  for (auto& [ticker, s] : series) {
    ++rep.tickers;
    std::sort(s.begin(), s.end(), [](const DatedValue& a, const DatedValue& b) {
      return std::chrono::sys_days(a.date) < std::chrono::sys_days(b.date);
    });
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (std::chrono::sys_days(s[i].date) == std::chrono::sys_days(s[i - 1].date)) {
        throw DataError("prices: two listings alias to '" + ticker + "' on " + format_date(s[i].date));
      }
    }
    const auto returns = daily_gross_returns(s);
    if (returns.empty()) {
      ++rep.tickers_too_short;
      continue;
    }
    std::map<int, std::vector<double>> by_year;
    for (const auto& r : returns) by_year[year_of(r.date)].push_back(r.value);
    for (const auto& [year, vals] : by_year) {
      if (auto m = return_r_davg(vals)) out[{ticker, year}] = *m;
    }
  }
  rep.firm_years = out.size();
  if (report) *report = rep;
  return out;
}

// ---------------------------------------------------------------------------
// Panel

Panel::Panel(std::vector<std::string> columns) : columns_(std::move(columns)), data_(columns_.size()) {}

std::optional<std::size_t> Panel::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c] == name) return c;
  }
  return std::nullopt;
}

std::span<const double> Panel::column(std::string_view name) const {
  const auto c = column_index(name);
  if (!c) throw std::out_of_range("panel has no column '" + std::string(name) + "'");
  return data_[*c];
}

void Panel::add_row(std::string ticker, int year, std::span<const double> values) {
  if (values.size() != columns_.size()) throw std::invalid_argument("panel row width mismatch");
  tickers_.push_back(std::move(ticker));
  years_.push_back(year);
  for (std::size_t c = 0; c < values.size(); ++c) data_[c].push_back(values[c]);
}

void Panel::drop_column(std::size_t c) {
  columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(c));
  data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(c));
}

std::vector<std::string> Panel::distinct_tickers() const {
  std::set<std::string> s(tickers_.begin(), tickers_.end());
  return {s.begin(), s.end()};
}

std::vector<std::size_t> Panel::rows_for(std::string_view ticker) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < rows(); ++r) {
    if (ticker == kAllFirms || tickers_[r] == ticker) out.push_back(r);
  }
  return out;
}

std::size_t Panel::missing_cells() const {
  std::size_t n = 0;
  for (const auto& col : data_) n += static_cast<std::size_t>(std::count_if(col.begin(), col.end(), is_missing));
  return n;
}

bool operator==(const Panel& a, const Panel& b) {
  if (a.columns_ != b.columns_ || a.tickers_ != b.tickers_ || a.years_ != b.years_ || a.state != b.state) return false;
  for (std::size_t c = 0; c < a.data_.size(); ++c) {
    for (std::size_t r = 0; r < a.data_[c].size(); ++r) {
      const double x = a.data_[c][r];
      const double y = b.data_[c][r];
      if (is_missing(x) != is_missing(y)) return false;
      if (!is_missing(x) && std::memcmp(&x, &y, sizeof x) != 0) return false;
    }
  }
  return true;
}

Panel read_panel_csv(std::istream& in, const std::string& source_name, const std::vector<std::string>& ignore) {
  csv::Reader reader(in, source_name);
  auto header = reader.next();
  if (!header || header->fields.size() < 2 || header->fields[0] != "ticker" || header->fields[1] != "year") {
    throw DataError(source_name + ": expected a header starting with ticker,year");
  }
  std::vector<std::size_t> keep;
  std::vector<std::string> names;
  for (std::size_t i = 2; i < header->fields.size(); ++i) {
    const auto& name = header->fields[i];
    if (std::find(ignore.begin(), ignore.end(), name) != ignore.end()) continue;
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw DataError::at(source_name, header->line, "duplicate column '" + name + "'");
    }
    keep.push_back(i);
    names.push_back(name);
  }
  Panel panel(names);
  std::set<std::pair<std::string, int>> keys;
  std::vector<double> values(names.size());
  while (auto rec = reader.next()) {
    expect_fields(*rec, header->fields.size(), source_name);
    const std::string& ticker = rec->fields[0];
    if (ticker.empty()) throw DataError::at(source_name, rec->line, "empty ticker");
    const int year = parse_year(rec->fields[1], source_name, rec->line);
    if (!keys.insert({ticker, year}).second) throw DataError::at(source_name, rec->line, "duplicate (ticker, year)");
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto& f = rec->fields[keep[k]];
      values[k] = f.empty() ? kMissing : parse_number(f, source_name, rec->line, "value");
    }
    panel.add_row(ticker, year, values);
  }
  return panel;
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
  std::vector<std::string> header = {"ticker", "year"};
  header.insert(header.end(), panel.columns().begin(), panel.columns().end());
  csv::write_row(out, header);
  std::vector<std::string> fields;
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    fields.clear();
    fields.push_back(panel.tickers()[r]);
    fields.push_back(std::to_string(panel.years()[r]));
    for (std::size_t c = 0; c < panel.cols(); ++c) {
      const double x = panel.at(r, c);
      fields.push_back(is_missing(x) ? std::string() : format_real(x));
    }
    csv::write_row(out, fields);
  }
}

Panel join_panel(const std::vector<EsgRecord>& esg, const Panel& sentiment,
                 const std::map<std::pair<std::string, int>, double>& returns, JoinReport* report) {
  using Key = std::pair<std::string, int>;
  std::map<Key, const EsgRecord*> esg_by_key;
  for (const auto& r : esg) esg_by_key[{r.ticker, r.year}] = &r;
  std::map<Key, std::size_t> sent_by_key;
  for (std::size_t r = 0; r < sentiment.rows(); ++r) sent_by_key[{sentiment.tickers()[r], sentiment.years()[r]}] = r;

  std::vector<std::string> columns;
  for (auto c : kEsgColumns) columns.emplace_back(c);
  columns.insert(columns.end(), sentiment.columns().begin(), sentiment.columns().end());
  columns.emplace_back(kReturnColumn);
  Panel panel(columns);

  JoinReport rep;
  rep.esg_keys = esg_by_key.size();
  rep.sentiment_keys = sent_by_key.size();
  rep.return_keys = returns.size();
  std::vector<double> values(columns.size());
  for (const auto& [key, e] : esg_by_key) {
    const auto s = sent_by_key.find(key);
    const auto ret = returns.find(key);
    if (s == sent_by_key.end() || ret == returns.end()) continue;
    std::size_t c = 0;
    for (const auto& score : e->scores) values[c++] = score ? *score : kMissing;
    for (std::size_t k = 0; k < sentiment.cols(); ++k) values[c++] = sentiment.at(s->second, k);
    values[c++] = ret->second;
    panel.add_row(key.first, key.second, values);
  }
  rep.joined = panel.rows();
  rep.esg_only_excluded = rep.esg_keys - rep.joined;
  rep.sentiment_only_excluded = rep.sentiment_keys - rep.joined;
  rep.return_only_excluded = rep.return_keys - rep.joined;
  if (report) *report = rep;
  return panel;
}

std::vector<DroppedColumn> drop_overmissing(Panel& panel, double threshold) {
  std::vector<DroppedColumn> dropped;
  if (panel.rows() == 0) return dropped;
  for (std::size_t c = panel.cols(); c-- > 0;) {
    const auto col = panel.column(c);
    const auto missing = static_cast<std::size_t>(std::count_if(col.begin(), col.end(), is_missing));
    const double fraction = static_cast<double>(missing) / static_cast<double>(panel.rows());
    if (fraction > threshold) {
      dropped.push_back({panel.columns()[c], fraction});
      log().warn("panel: dropping '{}' ({:.1f}% missing)", panel.columns()[c], 100.0 * fraction);
      panel.drop_column(c);
    }
  }
  std::reverse(dropped.begin(), dropped.end());
  return dropped;
}

void ImputeConfig::validate() const {
  if (sweeps < 1) throw ConfigError("imputation sweeps must be >= 1");
  if (donors < 1) throw ConfigError("imputation donors must be >= 1");
}

namespace {

/// One firm's block of rows, imputed in place.
void impute_group(Panel& panel, const std::vector<std::size_t>& rows, const std::string& ticker,
                  const ImputeConfig& config, std::mt19937_64& rng, ImputationReport& report) {
  const std::size_t n = rows.size();
  const std::size_t p = panel.cols();

  // Observed masks for this group.
  std::vector<std::vector<bool>> observed(p, std::vector<bool>(n, true));
  std::vector<std::size_t> incomplete;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t n_obs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      observed[c][i] = !is_missing(panel.at(rows[i], c));
      n_obs += observed[c][i];
    }
    if (n_obs == n) continue;
    if (n_obs < static_cast<std::size_t>(config.donors) + 1) {
      throw DataError("imputation: ticker '" + ticker + "' has " + std::to_string(n_obs) + " observed values in '" +
                      panel.columns()[c] + "', need at least " + std::to_string(config.donors + 1));
    }
    incomplete.push_back(c);
  }
  if (incomplete.empty()) return;

  // Initial fill: random draw from the column's observed values.
  for (std::size_t c : incomplete) {
    std::vector<double> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (observed[c][i]) pool.push_back(panel.at(rows[i], c));
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (!observed[c][i]) panel.at(rows[i], c) = pool[pick(rng)];
    }
  }

  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    for (std::size_t target : incomplete) {
      // Design: intercept + every other column at current completed values.
      Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
      for (std::size_t i = 0; i < n; ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        Eigen::Index k = 1;
        for (std::size_t c = 0; c < p; ++c) {
          if (c == target) continue;
          X(static_cast<Eigen::Index>(i), k++) = panel.at(rows[i], c);
        }
      }
      std::vector<Eigen::Index> obs_idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (observed[target][i]) obs_idx.push_back(static_cast<Eigen::Index>(i));
      }
      Eigen::MatrixXd Xo(static_cast<Eigen::Index>(obs_idx.size()), X.cols());
      Eigen::VectorXd yo(static_cast<Eigen::Index>(obs_idx.size()));
      for (std::size_t k = 0; k < obs_idx.size(); ++k) {
        Xo.row(static_cast<Eigen::Index>(k)) = X.row(obs_idx[k]);
        yo(static_cast<Eigen::Index>(k)) = panel.at(rows[static_cast<std::size_t>(obs_idx[k])], target);
      }
      Eigen::MatrixXd xtx = Xo.transpose() * Xo;
      xtx.diagonal().array() += kImputationRidge;
      const Eigen::VectorXd beta = xtx.ldlt().solve(Xo.transpose() * yo);
      const Eigen::VectorXd predicted = X * beta;

      for (std::size_t i = 0; i < n; ++i) {
        if (observed[target][i]) continue;
        const double yhat = predicted(static_cast<Eigen::Index>(i));
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(obs_idx.size());
        for (auto o : obs_idx) dist.emplace_back(std::fabs(predicted(o) - yhat), static_cast<std::size_t>(o));
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.donors), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        const std::size_t donor = dist[pick(rng)].second;
        panel.at(rows[i], target) = panel.at(rows[donor], target);
      }
    }
  }

  for (std::size_t c : incomplete) {
    const auto count = static_cast<std::size_t>(std::count(observed[c].begin(), observed[c].end(), false));
    report.cells_imputed += count;
    report.per_column[panel.columns()[c]] += count;
  }
}

}  // namespace

Panel impute_mice_pmm(const Panel& panel, const ImputeConfig& config, ImputationReport* report) {
  config.validate();
  Panel out = panel;
  ImputationReport rep;
  if (panel.missing_cells() == 0) {
    log().info("imputation: no missing cells, nothing to do");
    if (report) *report = rep;
    return out;
  }
  const auto tickers = panel.distinct_tickers();
  for (std::size_t g = 0; g < tickers.size(); ++g) {
    // Per-group stream so a group's draws do not depend on other groups.
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(g)};
    std::mt19937_64 rng(seq);
    impute_group(out, panel.rows_for(tickers[g]), tickers[g], config, rng, rep);
  }
  if (report) *report = rep;
  return out;
}

Panel min_max_normalize(const Panel& panel, std::vector<ColumnRange>* ranges) {
  if (panel.missing_cells() != 0) throw DataError("normalization requires a complete panel");
  Panel out = panel;
  std::vector<ColumnRange> rs;
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    const auto col = panel.column(c);
    ColumnRange range{panel.columns()[c], 0.0, 0.0, false};
    if (!col.empty()) {
      const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      range.min = *lo;
      range.max = *hi;
    }
    auto dst = out.column(c);
    if (!(range.max > range.min)) {
      range.constant = true;
      if (!col.empty()) log().warn("normalization: column '{}' is constant, set to 0.5", range.name);
      std::fill(dst.begin(), dst.end(), 0.5);
    } else {
      const double span = range.max - range.min;
      for (std::size_t r = 0; r < col.size(); ++r) dst[r] = (col[r] - range.min) / span;
    }
    rs.push_back(range);
  }
  out.state = NormalizationState::normalized;
  if (ranges) *ranges = std::move(rs);
  return out;
}

}  // namespace emoesg
