#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aamsupcon/eval.hpp"
#include "aamsupcon/synthdata.hpp"
#include "aamsupcon/training.hpp"

namespace aamsupcon::cli {

struct EvalSettings {
  std::size_t holdout_per_speaker = 5;
  std::size_t trials_per_speaker = 200;
  std::uint64_t seed = 1;
  DcfParams dcf;
  EmbeddingSpace space = EmbeddingSpace::kProjection;
};

struct GradCheckSettings {
  std::size_t batches = 20;
  double step = 1e-6;
  double tolerance = 1e-5;
  double model_tolerance = 1e-4;
  std::uint64_t seed = 1;
};

struct SweepSettings {
  std::vector<std::size_t> sizes{4, 8, 16};
  std::vector<std::uint64_t> seeds{1, 2, 3};
};

/// Everything a command can be configured with. Input width and class count
/// of the network are taken from the dataset, not from the file.
struct Config {
  DatasetSpec data;
  TrainConfig train;
  EvalSettings eval;
  GradCheckSettings gradcheck;
  SweepSettings sweep;
};

/// INI text with sections [data] [model] [loss] [train] [augment] [eval]
/// [gradcheck] [sweep]. Unknown sections or keys, malformed values and out of
/// range values raise ConfigError naming "[section] key".
Config parse_config(std::istream& is);
Config load_config(const std::filesystem::path& path);

/// Replaces every seed in the config (the sweep's seed list becomes {seed}).
void override_seed(Config& config, std::uint64_t seed);

nlohmann::ordered_json config_to_json(const Config& config);

}  // namespace aamsupcon::cli
