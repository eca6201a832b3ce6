#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>

#include "emoesg/errors.hpp"
#include "emoesg/log.hpp"
#include "emoesg/panel.hpp"
#include "emoesg/pipeline.hpp"
#include "emoesg/synth.hpp"

namespace {

using namespace emoesg;

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kInternal = 3 };

struct StageOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> level;
};

void add_stage_options(CLI::App* cmd, StageOptions& o) {
  cmd->add_option("-c,--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. retrofit.iterations=5");
  cmd->add_option("-o,--output-dir", o.output_dir, "Override paths.output_dir");
  cmd->add_option("--seed", o.seed, "Override imputation.seed");
  cmd->add_option("--threads", o.threads, "Override threads (0: all cores)");
  cmd->add_option("--level", o.level, "Override significance_level");
}

RunConfig load(const StageOptions& o) {
  std::vector<std::string> overrides;
  if (!o.output_dir.empty()) overrides.push_back("paths.output_dir=" + nlohmann::json(o.output_dir).dump());
  if (o.seed) overrides.push_back("imputation.seed=" + std::to_string(*o.seed));
  if (o.threads) overrides.push_back("threads=" + std::to_string(*o.threads));
  if (o.level) overrides.push_back("significance_level=" + nlohmann::json(*o.level).dump());
  overrides.insert(overrides.end(), o.overrides.begin(), o.overrides.end());
  return load_run_config(o.config, overrides);
}

PlantedModel parse_plant(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 7) {
    throw ConfigError("--plant expects TICKER,ESG_COLUMN,SENTIMENT_COLUMN,alpha,beta1,beta2,beta3; got '" + text + "'");
  }
  PlantedModel p{parts[0], parts[1], parts[2], {}};
  for (std::size_t i = 0; i < 4; ++i) {
    try {
      std::size_t used = 0;
      p.coef[i] = std::stod(parts[3 + i], &used);
      if (used != parts[3 + i].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("--plant: bad coefficient '" + parts[3 + i] + "'");
    }
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Emotion-moderated ESG/return regression toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  StageOptions retrofit_o, score_o, panel_o, regress_o, all_o, validate_o;
  auto* retrofit_cmd = app.add_subcommand("retrofit", "Retrofit emotion vectors to their synonym neighbors");
  add_stage_options(retrofit_cmd, retrofit_o);
  auto* score_cmd = app.add_subcommand("score", "Score headlines into firm-year sentiment features");
  add_stage_options(score_cmd, score_o);
  auto* panel_cmd = app.add_subcommand("panel", "Join, screen, impute and normalize the firm-year panel");
  add_stage_options(panel_cmd, panel_o);
  auto* regress_cmd = app.add_subcommand("regress", "Fit the interaction grid and write summaries");
  add_stage_options(regress_cmd, regress_o);
  auto* all_cmd = app.add_subcommand("run-all", "Run every stage in order");
  add_stage_options(all_cmd, all_o);
  auto* validate_cmd = app.add_subcommand("validate-config", "Check a configuration and its input paths");
  add_stage_options(validate_cmd, validate_o);

  SynthConfig synth;
  std::string synth_out;
  std::vector<std::string> plants;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic fixture dataset with planted coefficients");
  synth_cmd->add_option("-o,--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--firms", synth.n_firms, "Number of firms")->capture_default_str();
  synth_cmd->add_option("--years", synth.n_years, "Number of years (>= 6)")->capture_default_str();
  synth_cmd->add_option("--start-year", synth.start_year, "First year")->capture_default_str();
  synth_cmd->add_option("--noise-sd", synth.noise_sd, "Noise on normalized returns")->capture_default_str();
  synth_cmd->add_option("--plant", plants, "TICKER,ESG_COLUMN,SENTIMENT_COLUMN,alpha,beta1,beta2,beta3");
  synth_cmd->add_option("--headlines-per-year", synth.headlines_per_year)->capture_default_str();
  synth_cmd->add_option("--trading-days", synth.trading_days_per_year)->capture_default_str();
  synth_cmd->add_option("--missing-fraction", synth.esg_missing_fraction, "ESG missingness in unplanted firms")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    auto run = [](const StageOptions& o, const char* command, auto&& body) {
      const RunConfig config = load(o);
      RunManifest manifest(command, config);
      body(config, manifest);
      const auto path = manifest.write(config.paths.output_dir);
      log().info("manifest written to {}", path.string());
    };
    if (*retrofit_cmd) run(retrofit_o, "retrofit", run_retrofit);
    if (*score_cmd) run(score_o, "score", run_score);
    if (*panel_cmd) run(panel_o, "panel", run_panel);
    if (*regress_cmd) run(regress_o, "regress", run_regress);
    if (*all_cmd) run(all_o, "run-all", run_all);
    if (*validate_cmd) {
      const RunConfig config = load(validate_o);
      validate_config(config, {Stage::retrofit, Stage::score, Stage::panel, Stage::regress});
      std::cout << "config ok: " << sha256_hex(config.to_json().dump()) << "\n";
    }
    if (*synth_cmd) {
      for (const auto& p : plants) synth.plants.push_back(parse_plant(p));
      write_synth(generate_synth(synth), synth_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
