#include "emoesg/summary.hpp"

#include <cmath>
#include <limits>

#include "emoesg/csv.hpp"
#include "emoesg/numeric.hpp"
#include "emoesg/panel.hpp"

namespace emoesg {

namespace {

class StatsAcc {
 public:
  void add(const GridEntry& e) {
    if (!e.fit) return;
    ++models_;
    r2_all_.push_back(e.fit->r_squared);
    adj_all_.push_back(e.fit->adj_r_squared);
    if (e.triple) {
      r2_triple_.push_back(e.fit->r_squared);
      adj_triple_.push_back(e.fit->adj_r_squared);
    }
  }

  FitStats finish() const {
    FitStats s;
    s.models = models_;
    s.triple_significant = r2_triple_.size();
    s.mean_r2_all = opt_mean(r2_all_);
    s.mean_adj_r2_all = opt_mean(adj_all_);
    s.mean_r2_triple = opt_mean(r2_triple_);
    s.mean_adj_r2_triple = opt_mean(adj_triple_);
    return s;
  }

 private:
  static std::optional<double> opt_mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    return mean(xs);
  }

  std::size_t models_ = 0;
  std::vector<double> r2_all_, adj_all_, r2_triple_, adj_triple_;
};

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

nlohmann::ordered_json effect_json(const std::string& subset, const std::optional<WeightedEffect>& e) {
  nlohmann::ordered_json j;
  j["subset"] = subset;
  j["interactions"] = e ? e->count : 0;
  j["weighted_avg_coefficient"] = e ? opt(e->weighted_average) : opt(std::nullopt);
  j["standard_error"] = e ? opt(e->se) : opt(std::nullopt);
  j["z"] = e ? opt(e->z) : opt(std::nullopt);
  j["p_value"] = e ? opt(e->p_value) : opt(std::nullopt);
  return j;
}

nlohmann::ordered_json split_json(const FitStats& s) {
  nlohmann::ordered_json j;
  j["models"] = s.models;
  j["triple_significant"] = s.triple_significant;
  j["average_r2_triple_significant"] = opt(s.mean_r2_triple);
  j["average_r2_all"] = opt(s.mean_r2_all);
  j["average_adj_r2_triple_significant"] = opt(s.mean_adj_r2_triple);
  j["average_adj_r2_all"] = opt(s.mean_adj_r2_all);
  return j;
}

}  // namespace

std::string sentiment_label(const ModelSpec& spec) {
  std::string label(emotion_name(spec.emotion()));
  if (spec.davg()) label += "_DAvg";
  return label;
}

FamilySummary summarize_family(const std::vector<GridEntry>& grid, SentimentFamily family) {
  FamilySummary fs;
  fs.family = family;
  fs.grid_size = grid.size();

  StatsAcc overall, davg, non_davg;
  std::map<std::string, StatsAcc> per_ticker;
  std::map<std::pair<std::string, std::string>, StatsAcc> per_sent, per_emotion;
  std::vector<Effect> all, consistent, contradictory;

  for (const auto& e : grid) {
    const auto& t = e.spec.ticker;
    if (fs.ticker_order.empty() || fs.ticker_order.back() != t) fs.ticker_order.push_back(t);
    if (!e.fit) {
      ++fs.skipped;
      continue;
    }
    overall.add(e);
    (e.spec.davg() ? davg : non_davg).add(e);
    per_ticker[t].add(e);
    per_sent[{sentiment_label(e.spec), e.spec.esg_column}].add(e);
    per_emotion[{std::string(emotion_name(e.spec.emotion())), e.spec.esg_column}].add(e);
    if (e.triple) ++fs.per_ticker_esg_counts[t][e.spec.esg_column];

    if (e.interaction_significant && e.h3) {
      ++fs.h3.significant_interactions;
      auto& counts = fs.h3_per_ticker[t];
      const Effect eff{e.fit->coef[kInteraction], e.fit->se[kInteraction]};
      switch (e.h3->verdict) {
        case H3Verdict::excluded_neutral:
          ++fs.h3.excluded_neutral;
          ++counts[2];
          break;
        case H3Verdict::correct:
          ++fs.h3.correct;
          ++counts[0];
          all.push_back(eff);
          consistent.push_back(eff);
          break;
        case H3Verdict::contradictory:
          ++fs.h3.contradictory;
          ++counts[1];
          all.push_back(eff);
          contradictory.push_back(eff);
          break;
      }
    }
  }
  fs.overall = overall.finish();
  fs.davg = davg.finish();
  fs.non_davg = non_davg.finish();
  for (auto& [k, acc] : per_ticker) fs.per_ticker[k] = acc.finish();
  for (auto& [k, acc] : per_sent) fs.per_sentiment_esg[k] = acc.finish();
  for (auto& [k, acc] : per_emotion) fs.per_emotion_esg[k] = acc.finish();

  auto pooled = [](const std::vector<Effect>& v, const char* label) -> std::optional<WeightedEffect> {
    std::vector<Effect> usable;
    for (const auto& e : v) {
      if (e.se > 0.0 && std::isfinite(e.se)) usable.push_back(e);
    }
    if (usable.empty()) return std::nullopt;
    return weighted_average(usable, label);
  };
  fs.h3.all = pooled(all, "all_significant");
  fs.h3.consistent = pooled(consistent, "h3_consistent");
  fs.h3.contradictory_effect = pooled(contradictory, "h3_contradictory");
  return fs;
}

void correlation_matrix(const Panel& panel, std::vector<std::string>& names, std::vector<std::vector<double>>& r) {
  names = panel.columns();
  const std::size_t p = panel.cols();
  const std::size_t n = panel.rows();
  std::vector<double> means(p), sds(p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = panel.column(c);
    means[c] = n ? mean(col) : 0.0;
    CompensatedSum ss;
    for (double x : col) ss.add((x - means[c]) * (x - means[c]));
    sds[c] = std::sqrt(ss.value());
  }
  r.assign(p, std::vector<double>(p, std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      if (!(sds[a] > 0.0) || !(sds[b] > 0.0)) continue;
      CompensatedSum cross;
      const auto ca = panel.column(a);
      const auto cb = panel.column(b);
      for (std::size_t i = 0; i < n; ++i) cross.add((ca[i] - means[a]) * (cb[i] - means[b]));
      const double v = std::clamp(cross.value() / (sds[a] * sds[b]), -1.0, 1.0);
      r[a][b] = r[b][a] = (a == b) ? 1.0 : v;
    }
  }
}

InteractionSummary summarize(const std::map<SentimentFamily, std::vector<GridEntry>>& grids, const Panel& panel,
                             double level) {
  InteractionSummary s;
  s.level = level;
  for (const auto& [family, grid] : grids) s.families.push_back(summarize_family(grid, family));
  correlation_matrix(panel, s.correlation_columns, s.correlation);
  return s;
}

nlohmann::ordered_json summary_to_json(const InteractionSummary& summary) {
  nlohmann::ordered_json root;
  root["significance_level"] = summary.level;
  root["families"] = nlohmann::ordered_json::array();
  for (const auto& fs : summary.families) {
    nlohmann::ordered_json f;
    f["family"] = std::string(family_name(fs.family));
    f["grid_size"] = fs.grid_size;
    f["fitted"] = fs.grid_size - fs.skipped;
    f["skipped"] = fs.skipped;

    nlohmann::ordered_json cmp;
    cmp["average_r2_triple_significant"] = opt(fs.overall.mean_r2_triple);
    cmp["average_r2_all_interactions"] = opt(fs.overall.mean_r2_all);
    cmp["total_triple_significant_interactions"] = fs.overall.triple_significant;
    cmp["average_adj_r2_triple_significant"] = opt(fs.overall.mean_adj_r2_triple);
    cmp["average_adj_r2_all_interactions"] = opt(fs.overall.mean_adj_r2_all);
    f["comparison"] = cmp;

    nlohmann::ordered_json split;
    split["davg"] = split_json(fs.davg);
    split["non_davg"] = split_json(fs.non_davg);
    f["aggregation_split"] = split;

    nlohmann::ordered_json h3;
    h3["significant_interactions"] = fs.h3.significant_interactions;
    h3["excluded_neutral"] = fs.h3.excluded_neutral;
    h3["classified"] = fs.h3.correct + fs.h3.contradictory;
    h3["correct"] = fs.h3.correct;
    h3["contradictory"] = fs.h3.contradictory;
    h3["weighted_effects"] = nlohmann::ordered_json::array(
        {effect_json("all_significant", fs.h3.all), effect_json("h3_consistent", fs.h3.consistent),
         effect_json("h3_contradictory", fs.h3.contradictory_effect)});
    f["h3"] = h3;

    const auto fitted = static_cast<double>(fs.grid_size - fs.skipped);
    nlohmann::ordered_json fp;
    fp["informational"] = true;
    fp["note"] =
        "No multiple-comparison correction is applied. Expected counts under the global null treat terms as "
        "independent, which fits sharing a response are not.";
    fp["expected_significant_per_term"] = fitted * summary.level;
    fp["expected_triple_significant_if_independent"] = fitted * std::pow(summary.level, 3);
    f["expected_false_positives"] = fp;

    root["families"].push_back(f);
  }
  return root;
}

void write_grid_csv(std::ostream& out, const std::vector<GridEntry>& grid) {
  static const char* terms[4] = {"alpha", "beta1", "beta2", "beta3"};
  std::vector<std::string> header = {"family", "ticker", "esg_column", "sentiment_column", "status", "skip_reason", "n"};
  for (const char* prefix : {"", "se_", "t_", "p_"}) {
    for (const char* t : terms) header.push_back(std::string(prefix) + t);
  }
  for (const char* h : {"r_squared", "adj_r_squared", "condition_number", "triple_significant",
                        "interaction_significant", "h3_polarity", "h3_verdict"}) {
    header.emplace_back(h);
  }
  csv::write_row(out, header);

  for (const auto& e : grid) {
    std::vector<std::string> f = {std::string(family_name(e.spec.family)), e.spec.ticker, e.spec.esg_column,
                                  e.spec.sentiment_column};
    if (!e.fit) {
      f.emplace_back("skipped");
      f.push_back(e.skip_reason);
      f.resize(header.size());
      csv::write_row(out, f);
      continue;
    }
    const auto& fit = *e.fit;
    f.emplace_back("fitted");
    f.emplace_back();
    f.push_back(std::to_string(fit.n));
    for (const auto* arr : {&fit.coef, &fit.se, &fit.t, &fit.p}) {
      for (double v : *arr) f.push_back(format_real(v));
    }
    f.push_back(format_real(fit.r_squared));
    f.push_back(format_real(fit.adj_r_squared));
    f.push_back(format_real(fit.condition_number));
    f.emplace_back(e.triple ? "1" : "0");
    f.emplace_back(e.interaction_significant ? "1" : "0");
    f.emplace_back(e.h3 ? polarity_name(e.h3->polarity) : "");
    f.emplace_back(e.h3 ? h3_verdict_name(e.h3->verdict) : "");
    csv::write_row(out, f);
  }
}

void write_per_ticker_counts(std::ostream& out, const InteractionSummary& s) {
  std::vector<std::string> header = {"family", "ticker", "models", "triple_significant", "mean_r2_triple",
                                     "mean_adj_r2_triple"};
  for (auto c : kEsgColumns) header.push_back("triple_" + std::string(c));
  csv::write_row(out, header);
  for (const auto& fs : s.families) {
    for (const auto& t : fs.ticker_order) {
      const auto it = fs.per_ticker.find(t);
      const FitStats st = it == fs.per_ticker.end() ? FitStats{} : it->second;
      std::vector<std::string> row = {std::string(family_name(fs.family)), t, std::to_string(st.models),
                                      std::to_string(st.triple_significant), opt_cell(st.mean_r2_triple),
                                      opt_cell(st.mean_adj_r2_triple)};
      const auto ct = fs.per_ticker_esg_counts.find(t);
      for (auto c : kEsgColumns) {
        std::size_t n = 0;
        if (ct != fs.per_ticker_esg_counts.end()) {
          const auto ce = ct->second.find(std::string(c));
          if (ce != ct->second.end()) n = ce->second;
        }
        row.push_back(std::to_string(n));
      }
      csv::write_row(out, row);
    }
  }
}

void write_emotion_by_esg_counts(std::ostream& out, const InteractionSummary& s) {
  csv::write_row(out, {"family", "sentiment", "esg_column", "models", "triple_significant", "mean_r2_triple"});
  for (const auto& fs : s.families) {
    for (bool davg : {false, true}) {
      for (Emotion e : kAllEmotions) {
        std::string label(emotion_name(e));
        if (davg) label += "_DAvg";
        for (auto c : kEsgColumns) {
          const auto it = fs.per_sentiment_esg.find({label, std::string(c)});
          if (it == fs.per_sentiment_esg.end()) continue;
          csv::write_row(out, {std::string(family_name(fs.family)), label, std::string(c),
                               std::to_string(it->second.models), std::to_string(it->second.triple_significant),
                               opt_cell(it->second.mean_r2_triple)});
        }
      }
    }
  }
}

void write_r2_heatmap(std::ostream& out, const InteractionSummary& s) {
  std::vector<std::string> header = {"family", "esg_column"};
  for (Emotion e : kAllEmotions) header.emplace_back(emotion_name(e));
  header.emplace_back("all_emotions");
  csv::write_row(out, header);
  for (const auto& fs : s.families) {
    for (auto c : kEsgColumns) {
      std::vector<std::string> row = {std::string(family_name(fs.family)), std::string(c)};
      std::vector<double> pooled;
      for (Emotion e : kAllEmotions) {
        const auto it = fs.per_emotion_esg.find({std::string(emotion_name(e)), std::string(c)});
        if (it == fs.per_emotion_esg.end() || !it->second.mean_r2_triple) {
          row.emplace_back();
          continue;
        }
        row.push_back(format_real(*it->second.mean_r2_triple));
        for (std::size_t k = 0; k < it->second.triple_significant; ++k) pooled.push_back(*it->second.mean_r2_triple);
      }
      row.push_back(pooled.empty() ? std::string() : format_real(mean(pooled)));
      csv::write_row(out, row);
    }
  }
}

void write_h3_counts_per_ticker(std::ostream& out, const InteractionSummary& s) {
  csv::write_row(out, {"family", "ticker", "correct", "contradictory", "excluded_neutral", "correct_ratio",
                       "contradictory_ratio"});
  for (const auto& fs : s.families) {
    for (const auto& t : fs.ticker_order) {
      const auto it = fs.h3_per_ticker.find(t);
      const std::array<std::size_t, 3> c = it == fs.h3_per_ticker.end() ? std::array<std::size_t, 3>{} : it->second;
      const std::size_t classified = c[0] + c[1];
      std::vector<std::string> row = {std::string(family_name(fs.family)), t, std::to_string(c[0]),
                                      std::to_string(c[1]), std::to_string(c[2])};
      if (classified) {
        row.push_back(format_real(static_cast<double>(c[0]) / static_cast<double>(classified)));
        row.push_back(format_real(static_cast<double>(c[1]) / static_cast<double>(classified)));
      } else {
        row.emplace_back();
        row.emplace_back();
      }
      csv::write_row(out, row);
    }
  }
}

void write_correlation_matrix(std::ostream& out, const InteractionSummary& s) {
  std::vector<std::string> header = {"variable"};
  header.insert(header.end(), s.correlation_columns.begin(), s.correlation_columns.end());
  csv::write_row(out, header);
  for (std::size_t a = 0; a < s.correlation_columns.size(); ++a) {
    std::vector<std::string> row = {s.correlation_columns[a]};
    for (double v : s.correlation[a]) row.push_back(std::isnan(v) ? std::string() : format_real(v));
    csv::write_row(out, row);
  }
}

}  // namespace emoesg
