#include "emoesg/regress.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "emoesg/numeric.hpp"
#include "emoesg/panel.hpp"
#include "emoesg/stats.hpp"

namespace emoesg {

Emotion ModelSpec::emotion() const {
  for (bool d : {false, true}) {
    for (Emotion e : kAllEmotions) {
      if (emoesg::sentiment_column(family, e, d) == sentiment_column) return e;
    }
  }
  throw std::invalid_argument("not a sentiment column: " + sentiment_column);
}

bool ModelSpec::davg() const {
  constexpr std::string_view suffix = "_DAvg";
  return sentiment_column.size() >= suffix.size() &&
         std::string_view(sentiment_column).substr(sentiment_column.size() - suffix.size()) == suffix;
}

std::variant<Design, Skip> build_design(const Panel& panel, const ModelSpec& spec) {
  const auto esg = panel.column_index(spec.esg_column);
  if (!esg) return Skip{"column '" + spec.esg_column + "' not in panel"};
  const auto sent = panel.column_index(spec.sentiment_column);
  if (!sent) return Skip{"column '" + spec.sentiment_column + "' not in panel"};
  const auto ret = panel.column_index(kReturnColumn);
  if (!ret) return Skip{"return column not in panel"};

  const auto rows = panel.rows_for(spec.ticker);
  if (rows.size() < kMinObservations) {
    return Skip{"only " + std::to_string(rows.size()) + " observations, need " + std::to_string(kMinObservations)};
  }
  Design d;
  d.y.reserve(rows.size());
  d.X.reserve(rows.size());
  for (std::size_t r : rows) {
    const double e = panel.at(r, *esg);
    const double s = panel.at(r, *sent);
    d.y.push_back(panel.at(r, *ret));
    d.X.push_back({1.0, e, s, e * s});
  }
  return d;
}

std::variant<RegressionFit, Skip> fit_ols(std::span<const double> y, std::span<const std::array<double, 4>> X) {
  const std::size_t n = y.size();
  if (X.size() != n) return Skip{"design and response sizes differ"};
  if (n < kMinObservations) {
    return Skip{"only " + std::to_string(n) + " observations, need " + std::to_string(kMinObservations)};
  }
  for (double v : y) {
    if (!std::isfinite(v)) return Skip{"non-finite response"};
  }

  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double v = X[i][static_cast<std::size_t>(j)];
      if (!std::isfinite(v)) return Skip{"non-finite design value"};
      A(static_cast<Eigen::Index>(i), j) = v;
    }
    b(static_cast<Eigen::Index>(i)) = y[i];
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxConditionNumber)) {
    return Skip{"rank-deficient design (condition number " + format_real(cond) + ")"};
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd beta = qr.solve(b);
  const Eigen::Matrix4d R = qr.matrixQR().topLeftCorner(4, 4).triangularView<Eigen::Upper>();
  const Eigen::Matrix4d Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::Matrix4d::Identity());
  const Eigen::Matrix4d xtx_inv = Rinv * Rinv.transpose();

  RegressionFit fit;
  fit.n = n;
  fit.condition_number = cond;
  fit.residuals.resize(n);
  CompensatedSum rss, ysum;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < 4; ++j) pred += X[i][j] * beta(static_cast<Eigen::Index>(j));
    fit.residuals[i] = y[i] - pred;
    rss.add(fit.residuals[i] * fit.residuals[i]);
    ysum.add(y[i]);
  }
  const double ybar = ysum.value() / static_cast<double>(n);
  CompensatedSum tss;
  for (double v : y) tss.add((v - ybar) * (v - ybar));

  fit.rss = rss.value();
  const double df = static_cast<double>(n - 4);
  const double sigma2 = fit.rss / df;
  for (std::size_t j = 0; j < 4; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    fit.coef[j] = beta(jj);
    fit.se[j] = std::sqrt(std::max(0.0, sigma2 * xtx_inv(jj, jj)));
    if (fit.se[j] > 0.0) {
      fit.t[j] = fit.coef[j] / fit.se[j];
    } else {
      fit.t[j] = fit.coef[j] == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.coef[j]);
    }
    fit.p[j] = stats::student_t_two_sided_p(fit.t[j], df);
  }
  const double tss_v = tss.value();
  fit.r_squared = tss_v > 0.0 ? std::clamp(1.0 - fit.rss / tss_v, 0.0, 1.0) : 0.0;
  fit.adj_r_squared = 1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / df;
  return fit;
}

bool triple_filter(const RegressionFit& fit, double level) {
  return fit.p[kEsg] < level && fit.p[kSentiment] < level && fit.p[kInteraction] < level;
}

std::string_view h3_verdict_name(H3Verdict v) {
  switch (v) {
    case H3Verdict::correct:
      return "correct";
    case H3Verdict::contradictory:
      return "contradictory";
    case H3Verdict::excluded_neutral:
      return "excluded-neutral";
  }
  return "excluded-neutral";
}

H3Classification classify_h3(const ModelSpec& spec, const RegressionFit& fit) {
  H3Classification c;
  c.polarity = polarity_of(spec.emotion());
  const double b3 = fit.coef[kInteraction];
  switch (c.polarity) {
    case Polarity::neutral:
      c.verdict = H3Verdict::excluded_neutral;
      break;
    case Polarity::positive:
      c.verdict = b3 > 0.0 ? H3Verdict::correct : H3Verdict::contradictory;
      break;
    case Polarity::negative:
      c.verdict = b3 < 0.0 ? H3Verdict::correct : H3Verdict::contradictory;
      break;
  }
  return c;
}

std::vector<GridEntry> run_grid(const Panel& panel, SentimentFamily family, const GridOptions& options) {
  std::vector<std::string> tickers = panel.distinct_tickers();
  tickers.emplace_back(kAllFirms);
  const auto sentiments = sentiment_columns(family);

  std::vector<GridEntry> grid;
  grid.reserve(tickers.size() * kEsgColumns.size() * sentiments.size());
  for (const auto& t : tickers) {
    for (auto esg : kEsgColumns) {
      for (const auto& s : sentiments) {
        GridEntry e;
        e.spec = ModelSpec{t, std::string(esg), s, family};
        grid.push_back(std::move(e));
      }
    }
  }

  auto fit_cell = [&](GridEntry& e) {
    auto design = build_design(panel, e.spec);
    if (auto* skip = std::get_if<Skip>(&design)) {
      e.skip_reason = skip->reason;
      return;
    }
    const auto& d = std::get<Design>(design);
    auto result = fit_ols(d.y, d.X);
    if (auto* skip = std::get_if<Skip>(&result)) {
      e.skip_reason = skip->reason;
      return;
    }
    e.fit = std::move(std::get<RegressionFit>(result));
    e.triple = triple_filter(*e.fit, options.level);
    e.interaction_significant = e.fit->p[kInteraction] < options.level;
    if (e.interaction_significant) e.h3 = classify_h3(e.spec, *e.fit);
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(grid.size()));
  if (threads <= 1) {
    for (auto& e : grid) fit_cell(e);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += threads) fit_cell(grid[i]);
      });
    }
  }
  return grid;
}

WeightedEffect weighted_average(std::span<const Effect> effects, std::string label) {
  if (effects.empty()) throw std::invalid_argument("weighted_average: empty effect list");
  CompensatedSum wsum, wbeta;
  for (const auto& e : effects) {
    if (!(e.se > 0.0) || !std::isfinite(e.se)) throw std::invalid_argument("weighted_average: SE must be positive");
    const double w = 1.0 / (e.se * e.se);
    wsum.add(w);
    wbeta.add(w * e.beta);
  }
  WeightedEffect out;
  out.label = std::move(label);
  out.count = effects.size();
  out.weighted_average = wbeta.value() / wsum.value();
  out.se = std::sqrt(1.0 / wsum.value());
  out.z = out.weighted_average / out.se;
  out.p_value = stats::normal_two_sided_p(out.z);
  return out;
}

}  // namespace emoesg
