#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alrn/tensor.hpp"

namespace alrn {

// train_seen and test_seen samples belong to seen classes, test_unseen
// samples to unseen classes.
enum class SplitTag { kTrainSeen, kTestSeen, kTestUnseen };

const char* split_tag_name(SplitTag tag);
SplitTag split_tag_from_name(const std::string& name);

struct Sample {
  Tensor3 features;
  int class_id = 0;
  SplitTag split = SplitTag::kTrainSeen;
};

struct Dataset {
  int num_attributes = 0;
  int num_classes = 0;
  Matrix semantics;  // [num_attributes x num_classes], column i = class i
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;
  std::vector<Sample> samples;
};

// One planted local-attribute patch: a size x size square with its
// top-left corner at (row, col) inside a specific sample.
struct PlantedPatch {
  int sample_index = 0;
  int attribute = 0;
  int row = 0;
  int col = 0;
  int size = 0;
};

// Construction record of a synthetic dataset: which attributes are
// local, each attribute's channel-space signal direction, and every
// planted patch.
struct GroundTruth {
  std::vector<std::uint8_t> attribute_is_local;
  Matrix directions;  // [num_attributes x channels], unit rows
  std::vector<PlantedPatch> patches;

  bool empty() const { return attribute_is_local.empty(); }
};

// Planted-attribute generator settings. Images are noise plus, for
// each attribute active in the class, that attribute's direction
// scaled by signal_strength * semantic value * (1 + jitter) and placed
// either in a random patch (local attributes) or uniformly everywhere
// (holistic ones).
struct SynthSpec {
  int num_classes = 16;
  int num_seen = 12;
  int samples_per_class = 20;
  int num_attributes = 24;
  int channels = 32;
  int height = 7;
  int width = 7;
  double local_fraction = 0.5;
  int patch_size = 2;
  double signal_strength = 4.0;
  double variation = 0.5;  // jitter drawn from Uniform(-variation, variation)
  double noise_level = 0.4;
  double train_fraction = 0.75;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset dataset;
  GroundTruth ground_truth;
};

// Deterministic under spec.seed: one seeded stream drives every draw
// in a fixed order.
SyntheticData generate_synthetic(const SynthSpec& spec);

// Writes semantics, per-sample feature tensors, ground truth (when
// present), and manifest.json into dir.
void save_dataset(const SyntheticData& data, const std::filesystem::path& dir);

// Loads a manifest.json (or a directory containing one) and every file
// it references, validating shapes and split-tag consistency.
SyntheticData load_dataset(const std::filesystem::path& manifest_or_dir);

// Indices into dataset.samples by split tag.
std::vector<int> split_indices(const Dataset& dataset, SplitTag tag);

}  // namespace alrn
