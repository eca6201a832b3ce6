#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace emoesg {

/// y = alpha + beta1 E + beta2 S + beta3 E S + noise, in normalized units,
/// for one firm's (ESG column, sentiment column) pair.
struct PlantedModel {
  std::string ticker;
  std::string esg_column;
  std::string sentiment_column;
  std::array<double, 4> coef{};  // alpha, beta1, beta2, beta3
};

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_firms = 4;
  int n_years = 13;
  int start_year = 2008;
  double noise_sd = 0.0;
  std::vector<PlantedModel> plants;
  int headlines_per_year = 8;
  int trading_days_per_year = 24;
  double esg_missing_fraction = 0.0;  // unplanted firms only

  /// Throws ConfigError on out-of-range parameters or an invalid plant.
  void validate() const;
};

/// Ticker of the i-th synthetic firm (0-based): FIRM01, FIRM02, ...
std::string synth_ticker(int i);

struct SynthDataset {
  /// File name -> content; every input the pipeline reads plus config.json
  /// and planted.csv.
  std::map<std::string, std::string> files;
  /// Per plant, the realized normalized (E, S) rows and the noise-free and
  /// noisy targets, in panel row order.
  struct Realization {
    std::vector<int> years;
    std::vector<double> esg;
    std::vector<double> sentiment;
    std::vector<double> expected;  // noise-free model value
    std::vector<double> target;    // expected + noise
  };
  std::vector<Realization> realizations;
};

/// Builds a complete fixture. Headlines draw on emotion-word pools so the
/// sentiment features vary across firm-years; prices are generated so that
/// each firm-year's normalized return equals the planted model (or a
/// uniform draw for unplanted firms). The generator replays the retrofit,
/// scoring and normalization steps on its own output, so recovery is exact
/// when noise_sd is 0 and the pipeline runs with the emitted config.
SynthDataset generate_synth(const SynthConfig& config);

void write_synth(const SynthDataset& data, const std::filesystem::path& dir);

}  // namespace emoesg
