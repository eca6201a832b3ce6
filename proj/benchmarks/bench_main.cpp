#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "emoesg/embeddings.hpp"
#include "emoesg/log.hpp"
#include "emoesg/panel.hpp"
#include "emoesg/pipeline.hpp"
#include "emoesg/regress.hpp"
#include "emoesg/scoring.hpp"
#include "emoesg/synth.hpp"

using namespace emoesg;

namespace {

EmbeddingTable random_table(std::size_t extra_words, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  EmbeddingTable t(dim);
  std::vector<double> v(dim);
  auto add = [&](const std::string& w) {
    if (t.contains(w)) return;
    for (auto& x : v) x = n01(rng);
    t.add(w, v);
  };
  const auto lex = default_synonym_lexicon();
  for (Emotion e : kAllEmotions) {
    add(std::string(emotion_name(e)));
    for (const auto& s : lex.synonyms(e)) {
      if (s.find(' ') == std::string::npos) add(s);
    }
  }
  for (std::size_t i = 0; i < extra_words; ++i) add("w" + std::to_string(i));
  return t;
}

Panel random_panel(std::size_t firms, std::size_t years) {
  std::vector<std::string> cols;
  for (auto c : kEsgColumns) cols.emplace_back(c);
  for (const auto& c : sentiment_columns(SentimentFamily::retro)) cols.push_back(c);
  cols.emplace_back(kReturnColumn);
  Panel p(cols);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  std::vector<double> row(cols.size());
  for (std::size_t f = 0; f < firms; ++f) {
    for (std::size_t y = 0; y < years; ++y) {
      for (auto& x : row) x = u(rng);
      p.add_row("F" + std::to_string(100 + f), 2008 + static_cast<int>(y), row);
    }
  }
  return p;
}

void BM_Retrofit(benchmark::State& state) {
  log().set_level(spdlog::level::off);
  std::mt19937_64 rng(1);
  const auto table = random_table(static_cast<std::size_t>(state.range(0)), 300, rng);
  const auto lex = default_synonym_lexicon();
  for (auto _ : state) benchmark::DoNotOptimize(retrofit(table, lex, RetrofitConfig{}));
}
BENCHMARK(BM_Retrofit)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_ScoreFirmYears(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto table = random_table(5000, 100, rng);
  std::vector<Headline> hs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < hs.size(); ++i) {
    hs[i].ticker = "T" + std::to_string(i % 17);
    hs[i].date = Date(std::chrono::sys_days(std::chrono::year(2010) / 1 / 1) + std::chrono::days(rng() % 4000));
    hs[i].title = "w" + std::to_string(rng() % 5000) + " trust w" + std::to_string(rng() % 5000);
  }
  tokenize_headlines(hs, {}, table);
  ScoringOptions opt;
  opt.nrc = false;
  for (auto _ : state) benchmark::DoNotOptimize(score_firm_years(hs, table, nullptr, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreFirmYears)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FitOls(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  std::vector<std::array<double, 4>> X(13);
  std::vector<double> y(13);
  for (std::size_t i = 0; i < 13; ++i) {
    const double e = u(rng), s = u(rng);
    X[i] = {1.0, e, s, e * s};
    y[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(y, X));
}
BENCHMARK(BM_FitOls);

void BM_Grid(benchmark::State& state) {
  const auto panel = random_panel(16, 13);
  for (auto _ : state) benchmark::DoNotOptimize(run_grid(panel, SentimentFamily::retro, {0.1, 1}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid_size(16)));
}
BENCHMARK(BM_Grid)->Unit(benchmark::kMillisecond);

void BM_ImputeMicePmm(benchmark::State& state) {
  auto panel = random_panel(16, 13);
  std::mt19937_64 rng(4);
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    for (std::size_t r = 0; r < panel.rows(); ++r) {
      if (rng() % 10 == 0) panel.at(r, c) = std::nan("");
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(impute_mice_pmm(panel, ImputeConfig{}));
}
BENCHMARK(BM_ImputeMicePmm)->Unit(benchmark::kMillisecond);

void BM_RunAllSynth(benchmark::State& state) {
  log().set_level(spdlog::level::off);
  const auto dir = std::filesystem::temp_directory_path() / "emoesg-bench-synth";
  SynthConfig sc;
  sc.n_firms = 16;
  write_synth(generate_synth(sc), dir);
  const auto config = load_run_config(dir / "config.json");
  for (auto _ : state) {
    RunManifest m("run-all", config);
    run_all(config, m);
  }
  std::filesystem::remove_all(dir);
}
BENCHMARK(BM_RunAllSynth)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
