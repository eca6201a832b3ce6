#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emoesg/errors.hpp"
#include "emoesg/pipeline.hpp"
#include "emoesg/regress.hpp"
#include "emoesg/synth.hpp"
#include "test_support.hpp"

using namespace emoesg;
namespace fs = std::filesystem;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

const std::string kTrust = "InpageTitle_Retro_trust_similarity";

fs::path make_fixture(const TempDir& dir, const SynthConfig& cfg) {
  write_synth(generate_synth(cfg), dir.path());
  return dir.path() / "config.json";
}

std::string set_path(const std::string& key, const fs::path& p) {
  return "paths." + key + "=" + nlohmann::json(p.string()).dump();
}

RunConfig config_for(const fs::path& config_file, const fs::path& out, std::vector<std::string> extra = {}) {
  extra.push_back(set_path("output_dir", out));
  return load_run_config(config_file, extra);
}

nlohmann::json run_all_at(const RunConfig& config) {
  RunManifest m("run-all", config);
  run_all(config, m);
  m.write(config.paths.output_dir);
  return nlohmann::json::parse(m.json().dump());
}

std::map<std::string, std::string> outputs_of(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("manifest_", 0) == 0) continue;
    out[name] = read_file(e.path());
  }
  return out;
}

void strip_clock(nlohmann::json& manifest) {
  for (auto& s : manifest["stages"]) s.erase("wall_clock_seconds");
}

const nlohmann::json& stage(const nlohmann::json& manifest, const std::string& name) {
  for (const auto& s : manifest["stages"]) {
    if (s["stage"] == name) return s;
  }
  FAIL("no stage " << name);
  return manifest;
}

bool grid_row(const fs::path& grid_csv, const std::string& ticker, const std::string& esg,
                                  const std::string& sentiment, double& beta3, double& p3, bool& triple,
                                  std::string& verdict) {
  std::istringstream in(read_file(grid_csv));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 30 || f[0] != "retro" || f[1] != ticker || f[2] != esg || f[3] != sentiment) continue;
    beta3 = std::stod(f[10]);
    p3 = std::stod(f[22]);
    triple = f[26] == "1";
    verdict = f[29];
    return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("config loading and validation") {
    TempDir dir;
    const auto file = make_fixture(dir, {});
    const auto c = load_run_config(file);
    CHECK(c.paths.embeddings == dir.path() / "embeddings.txt");
    CHECK(c.paths.output_dir == dir.path() / "out");
    CHECK(c.significance_level == 0.1);
    CHECK(c.retrofit.iterations == 10);
    validate_config(c, {Stage::retrofit, Stage::score, Stage::panel, Stage::regress});

    const auto round = RunConfig::from_json(nlohmann::json::parse(c.to_json().dump()), "/");
    CHECK(round.to_json().dump() == c.to_json().dump());

    CHECK(load_run_config(file, {"retrofit.iterations=5"}).retrofit.iterations == 5);
    CHECK(load_run_config(file, {"families=[\"retro\"]"}).nrc == false);
    CHECK(load_run_config(file, {"retrofit.mode=faruqui"}).retrofit.mode == RetrofitMode::faruqui);

    CHECK_THROWS_AS(load_run_config(file, {"retrofit.iterations=0"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"significance_level=1.5"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"significance_level=0"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"study_window.start_year=2021"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"retrofit.colour=1"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"families=[]"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(file, {"no_equals"}), ConfigError);
    CHECK_THROWS_AS(load_run_config(dir.path() / "missing.json"), ConfigError);

    auto doc = nlohmann::json::parse(read_file(file));
    doc["extra"] = 1;
    write_file(dir / "bad.json", doc.dump());
    CHECK_THROWS_WITH_AS(load_run_config(dir / "bad.json"), doctest::Contains("unknown config key 'extra'"),
                         ConfigError);

    const auto gone = load_run_config(file, {set_path("esg", dir / "nope.csv")});
    CHECK_THROWS_AS(validate_config(gone, {Stage::panel}), ConfigError);
    CHECK_NOTHROW(validate_config(gone, {Stage::retrofit}));
  }

  TEST_CASE("retrofit stage output matches the module") {
    TempDir dir;
    const auto file = make_fixture(dir, {});
    const auto config = config_for(file, dir / "o");
    RunManifest m("retrofit", config);
    run_retrofit(config, m);
    const auto written = load_embeddings_file((dir.path() / "o" / outputs::kRetrofitted).string());
    const auto direct = retrofit(load_embeddings_file(config.paths.embeddings.string()),
                                 load_synonym_lexicon_file(config.paths.synonyms.string()), config.retrofit);
    REQUIRE(written.size() == direct.size());
    for (const auto& t : direct.tokens()) {
      const auto a = written.at(t), b = direct.at(t);
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
    }
    const auto first = read_file(dir.path() / "o" / outputs::kRetrofitted);
    RunManifest again("retrofit", config);
    run_retrofit(config, again);
    CHECK(read_file(dir.path() / "o" / outputs::kRetrofitted) == first);
  }

  TEST_CASE("stage subcommands equal run-all") {
    TempDir dir;
    SynthConfig sc;
    sc.seed = 3;
    sc.esg_missing_fraction = 0.2;
    const auto file = make_fixture(dir, sc);
    run_all_at(config_for(file, dir / "all"));
    const auto staged = config_for(file, dir / "staged");
    for (auto fn : {run_retrofit, run_score, run_panel, run_regress}) {
      RunManifest m("stage", staged);
      fn(staged, m);
    }
    const auto a = outputs_of(dir / "all");
    const auto b = outputs_of(dir / "staged");
    CHECK(a.size() == 13);
    CHECK(a == b);
  }

  TEST_CASE("end-to-end determinism and manifest") {
    TempDir dir;
    SynthConfig sc;
    sc.seed = 11;
    sc.esg_missing_fraction = 0.25;
    const auto file = make_fixture(dir, sc);
    const auto config = config_for(file, dir / "out");
    auto m1 = run_all_at(config);
    const auto first = outputs_of(dir / "out");
    auto m2 = run_all_at(config);
    CHECK(outputs_of(dir / "out") == first);
    REQUIRE(m1["stages"].size() == 4);
    for (const auto& s : m1["stages"]) CHECK(s["wall_clock_seconds"].is_number());
    strip_clock(m1);
    strip_clock(m2);
    CHECK(m1 == m2);

    CHECK(m1["tool"] == "emoesg");
    CHECK(m1["version"] == kToolVersion);
    CHECK(m1["seed"] == 11);
    CHECK(m1["config_sha256"] == sha256_hex(config.to_json().dump()));
    bool saw_headlines = false;
    for (const auto& in : m1["inputs"]) {
      if (in["role"] == "headlines") {
        saw_headlines = true;
        CHECK(in["sha256"] == sha256_file(config.paths.headlines));
      }
    }
    CHECK(saw_headlines);
    CHECK(fs::exists(dir / "out" / "manifest_run-all.json"));

    // A different seed changes only what imputation touches.
    const auto reseeded = config_for(file, dir / "out2", {"imputation.seed=12"});
    run_all_at(reseeded);
    const auto other = outputs_of(dir / "out2");
    CHECK(other.at(outputs::kSentiment) == first.at(outputs::kSentiment));
    CHECK(other.at(outputs::kPanelJoined) == first.at(outputs::kPanelJoined));
    CHECK(other.at(outputs::kPanelImputed) != first.at(outputs::kPanelImputed));
  }

  TEST_CASE("exclusion tallies account for every row") {
    TempDir dir;
    SynthConfig sc;
    sc.seed = 5;
    sc.n_firms = 5;
    sc.esg_missing_fraction = 0.2;
    const auto file = make_fixture(dir, sc);
    const auto m = run_all_at(config_for(file, dir / "out"));

    const auto& score = stage(m, "score")["counts"];
    CHECK(score["malformed_rows"] == 1);
    CHECK(score["outside_window"].get<int>() > 0);
    CHECK(score["headline_rows"].get<int>() ==
          score["malformed_rows"].get<int>() + score["outside_window"].get<int>() +
              score["empty_after_preprocess"].get<int>() + score["no_vector"].get<int>() + score["scored"].get<int>());

    const auto& panel = stage(m, "panel")["counts"];
    const int joined = panel["joined_rows"];
    CHECK(panel["esg_rows"].get<int>() == joined + panel["esg_only_excluded"].get<int>());
    CHECK(panel["sentiment_rows"].get<int>() == joined + panel["sentiment_only_excluded"].get<int>());
    CHECK(panel["return_firm_years"].get<int>() == joined + panel["return_only_excluded"].get<int>());
    CHECK(panel["rows_out"] == joined);
    CHECK(panel["cells_imputed"].get<int>() > 0);
    CHECK(panel["cells_imputed"] == panel["missing_cells"]);
    CHECK(score["firm_years_out"] == panel["sentiment_rows"]);

    const auto& regress = stage(m, "regress")["counts"];
    for (const std::string fam : {"retro", "nrc"}) {
      CHECK(regress[fam + "_cells"] == grid_size(5));
      CHECK(regress[fam + "_cells"].get<int>() ==
            regress[fam + "_fitted"].get<int>() + regress[fam + "_skipped"].get<int>());
    }

    const auto report = nlohmann::json::parse(read_file(dir / "out" / outputs::kPanelReport));
    CHECK(report["imputation"]["no_op"] == false);
    std::istringstream norm(read_file(dir / "out" / outputs::kPanelNormalized));
    const auto p = read_panel_csv(norm, "n.csv");
    CHECK(p.missing_cells() == 0);
    for (std::size_t c = 0; c < p.cols(); ++c) {
      for (double x : p.column(c)) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
      }
    }
  }

  TEST_CASE("complete panel imputation is a no-op") {
    TempDir dir;
    const auto file = make_fixture(dir, {});
    run_all_at(config_for(file, dir / "out"));
    const auto report = nlohmann::json::parse(read_file(dir / "out" / outputs::kPanelReport));
    CHECK(report["imputation"]["no_op"] == true);
    CHECK(read_file(dir / "out" / outputs::kPanelJoined) == read_file(dir / "out" / outputs::kPanelImputed));
  }

  TEST_CASE("an over-missing ESG column is dropped") {
    TempDir dir;
    const auto file = make_fixture(dir, {});
    std::istringstream in(read_file(dir / "esg.csv"));
    std::ostringstream out;
    std::string line;
    std::getline(in, line);
    out << line << "\n";
    int i = 0;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      f.resize(7);
      if (i++ % 5 < 3) f[3].clear();
      for (std::size_t k = 0; k < f.size(); ++k) out << (k ? "," : "") << f[k];
      out << "\n";
    }
    write_file(dir / "esg.csv", out.str());
    run_all_at(config_for(file, dir / "out"));
    const auto report = nlohmann::json::parse(read_file(dir / "out" / outputs::kPanelReport));
    REQUIRE(report["dropped_columns"]["columns"].size() == 1);
    CHECK(report["dropped_columns"]["columns"][0]["column"] == "econ_score");
    CHECK(read_file(dir / "out" / outputs::kPanelNormalized).find("econ_score") == std::string::npos);
  }

  TEST_CASE("empty join and missing intermediates") {
    TempDir dir;
    const auto file = make_fixture(dir, {});
    const auto config = config_for(file, dir / "out");
    RunManifest m("regress", config);
    CHECK_THROWS_WITH_AS(run_regress(config, m), doctest::Contains("run the panel stage first"), DataError);
    RunManifest s("score", config);
    CHECK_THROWS_AS(run_score(config, s), DataError);

    write_file(dir / "esg.csv",
               "ticker,year,overall_score,econ_score,envrn_score,corpgov_score,social_score\nZZZ,2010,1,2,3,4,5\n");
    RunManifest all("run-all", config);
    CHECK_THROWS_WITH_AS(run_all(config, all), doctest::Contains("join is empty"), DataError);
  }

  TEST_CASE("planted interaction signs classify through the pipeline") {
    for (double sign : {1.0, -1.0}) {
      TempDir dir;
      SynthConfig sc;
      sc.seed = 21;
      sc.noise_sd = 0.01;
      const std::array<double, 4> coef =
          sign > 0 ? std::array<double, 4>{0.05, 0.1, 0.05, 0.8} : std::array<double, 4>{0.9, 0.1, 0.05, -0.8};
      sc.plants.push_back({"FIRM02", "overall_score", kTrust, coef});
      const auto file = make_fixture(dir, sc);
      run_all_at(config_for(file, dir / "out"));
      double b3 = 0, p3 = 1;
      bool triple = false;
      std::string verdict;
      REQUIRE(grid_row(dir / "out" / outputs::kGrid, "FIRM02", "overall_score", kTrust, b3, p3, triple, verdict));
      CHECK(b3 == doctest::Approx(0.8 * sign).epsilon(0.1));
      CHECK(triple);
      CHECK(verdict == (sign > 0 ? "correct" : "contradictory"));
    }
  }

  TEST_CASE("synthetic generator") {
    SynthConfig a;
    a.seed = 9;
    const auto d1 = generate_synth(a);
    CHECK(generate_synth(a).files == d1.files);
    SynthConfig b = a;
    b.seed = 10;
    const auto d2 = generate_synth(b);
    REQUIRE(d1.files.size() == d2.files.size());
    for (const auto& [name, content] : d1.files) {
      REQUIRE(d2.files.count(name));
      const auto header = [](const std::string& s) { return s.substr(0, s.find('\n')); };
      if (name == "headlines.csv" || name == "prices.csv" || name == "esg.csv") {
        CHECK(content != d2.files.at(name));
        CHECK(header(content) == header(d2.files.at(name)));
      }
    }

    SynthConfig bad;
    bad.n_years = 5;
    CHECK_THROWS_AS(generate_synth(bad), ConfigError);
    bad = {};
    bad.plants.push_back({"FIRM09", "overall_score", kTrust, {}});
    CHECK_THROWS_AS(generate_synth(bad), ConfigError);
    bad = {};
    bad.n_firms = 2;
    bad.plants.push_back({"FIRM01", "overall_score", kTrust, {}});
    bad.plants.push_back({"FIRM02", "overall_score", kTrust, {}});
    CHECK_THROWS_AS(generate_synth(bad), ConfigError);
    bad = {};
    bad.esg_missing_fraction = 0.7;
    CHECK_THROWS_AS(generate_synth(bad), ConfigError);
  }

  TEST_CASE("noiseless plant is recovered exactly") {
    TempDir dir;
    SynthConfig sc;
    sc.seed = 4;
    sc.plants.push_back({"FIRM01", "overall_score", kTrust, {0.1, 0.5, 0.2, -0.3}});
    const auto file = make_fixture(dir, sc);
    const auto config = config_for(file, dir / "out", {"families=[\"retro\"]"});
    run_all_at(config);
    std::istringstream in(read_file(dir / "out" / outputs::kPanelNormalized));
    const auto panel = read_panel_csv(in, "p.csv");
    const auto design = std::get<Design>(build_design(panel, {"FIRM01", "overall_score", kTrust, SentimentFamily::retro}));
    const auto fit = std::get<RegressionFit>(fit_ols(design.y, design.X));
    const std::array<double, 4> want = {0.1, 0.5, 0.2, -0.3};
    for (int k = 0; k < 4; ++k) CHECK(std::fabs(fit.coef[k] - want[k]) < 1e-6);
    CHECK(fit.r_squared >= 1.0 - 1e-9);
  }
}
