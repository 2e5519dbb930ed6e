#pragma once

#include <string>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/evaluator.hpp"
#include "alrn/trainer.hpp"

namespace alrn::cli {

// One configuration document for every subcommand. Values resolve in
// order: struct defaults, then preset, then config file, then command
// line flags.
struct RunConfig {
  TrainConfig train;  // carries ModelConfig and LossConfig
  GzslConfig gzsl;
  SynthSpec synth;
  std::string manifest;
  std::string checkpoint;
  std::string out_dir;
  // set when the file or flags pinned gzsl.tau explicitly; otherwise it
  // follows the loss temperature
  bool gzsl_tau_explicit = false;

  // applies the shared-seed convention: one seed drives both training
  // and generation unless a section overrides it
  void set_seed(std::uint64_t seed) {
    train.seed = seed;
    synth.seed = seed;
  }
};

const std::vector<std::string>& preset_names();  // cub, sun, awa2, synth-default
void apply_preset(RunConfig& config, const std::string& name);

// Strict parser: unknown keys anywhere in the document are errors. A
// top-level "preset" key is applied before the file's own sections.
void apply_config_file(RunConfig& config, const std::string& path);

// Resolves deferred defaults (gzsl tau tracking the loss tau).
void finalize(RunConfig& config);

// Fills in model shape fields from the dataset when they were left 0,
// and cross-checks them when they were not.
void infer_model_shape(ModelConfig& model, const Dataset& dataset);

// "2.5" or "begin:end:step" with step > 0 and begin <= end
struct MuSweep {
  double begin = 0.0;
  double end = 0.0;
  double step = 1.0;
  bool is_sweep = false;

  std::vector<double> values() const;
};
MuSweep parse_mu(const std::string& text);

}  // namespace alrn::cli
