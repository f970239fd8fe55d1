#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fdp/data.hpp"
#include "fdp/inr.hpp"
#include "fdp/process.hpp"
#include "fdp/sampler.hpp"
#include "fdp/train.hpp"

namespace fdp {

struct SpectrumConfig {
  /// toy1d | image2d | table
  std::string preset = "toy1d";
  std::size_t max_frequency = 50;
  /// Per-|k| tables used when preset = table.
  std::vector<double> b;
  std::vector<double> r;
  double drift_bound = 10.0;
  std::size_t tail_start = 1;

  OperatorSpectrum build() const;
};

struct DatasetConfig {
  /// quadratic (generated) | directory (a saved dataset) | csv (one 1D sample per row)
  std::string kind = "quadratic";
  std::string path;
  QuadraticDatasetSpec quadratic;
};

/// Every knob of a run; serialized as YAML with one mapping per section.
struct RunConfig {
  SpectrumConfig spectrum;
  TimeSchedule schedule;
  InrArchitecture network;
  std::size_t skip_every = 2;
  TrainConfig train;
  SamplerConfig sampler;
  std::size_t sample_count = 64;
  std::uint64_t sample_seed = 11;
  DatasetConfig dataset;
  std::string output_dir = "runs/default";
};

/// Applies the defaults above, then the document; unknown keys and bad values raise Config errors naming the line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Applies "section.key=value" assignments (value in YAML syntax) on top of cfg.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);
/// Full effective config; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const RunConfig& cfg);

/// Architecture with the skip pattern filled in from skip_every.
InrArchitecture network_architecture(const RunConfig& cfg);
DiffusionProcess make_process(const RunConfig& cfg);
std::vector<GridFunction> load_training_data(const RunConfig& cfg);

}  // namespace fdp
