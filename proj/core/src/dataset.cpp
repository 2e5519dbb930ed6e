#include "alrn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "alrn/rng.hpp"
#include "alrn/tensor_file.hpp"

namespace alrn {

using nlohmann::json;

const char* split_tag_name(SplitTag tag) {
  switch (tag) {
    case SplitTag::kTrainSeen: return "train_seen";
    case SplitTag::kTestSeen: return "test_seen";
    case SplitTag::kTestUnseen: return "test_unseen";
  }
  throw ConfigError("unknown split tag");
}

SplitTag split_tag_from_name(const std::string& name) {
  if (name == "train_seen") return SplitTag::kTrainSeen;
  if (name == "test_seen") return SplitTag::kTestSeen;
  if (name == "test_unseen") return SplitTag::kTestUnseen;
  throw FormatError("unknown split tag \"" + name + "\"");
}

namespace {

void validate_spec(const SynthSpec& s) {
  if (s.num_classes < 2) throw ConfigError("need at least 2 classes");
  if (s.num_seen < 1 || s.num_seen >= s.num_classes)
    throw ConfigError("seen class count " + std::to_string(s.num_seen) +
                      " must be in [1, " + std::to_string(s.num_classes) + ")");
  if (s.samples_per_class < 2) throw ConfigError("need at least 2 samples per class");
  if (s.num_attributes < 1 || s.channels < 1 || s.height < 1 || s.width < 1)
    throw ConfigError("attribute, channel, and grid counts must be positive");
  if (s.patch_size < 1 || s.patch_size > s.height || s.patch_size > s.width)
    throw ConfigError("patch size " + std::to_string(s.patch_size) +
                      " does not fit a " + std::to_string(s.height) + "x" +
                      std::to_string(s.width) + " grid");
  if (s.local_fraction < 0.0 || s.local_fraction > 1.0)
    throw ConfigError("local fraction must lie in [0,1]");
  if (s.variation < 0.0) throw ConfigError("variation must be non-negative");
  if (s.noise_level < 0.0) throw ConfigError("noise level must be non-negative");
  if (s.signal_strength < 0.0) throw ConfigError("signal strength must be non-negative");
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0,1)");
}

}  // namespace

SyntheticData generate_synthetic(const SynthSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed, "synth");

  SyntheticData out;
  Dataset& d = out.dataset;
  d.num_attributes = spec.num_attributes;
  d.num_classes = spec.num_classes;
  d.seen_classes.resize(spec.num_seen);
  std::iota(d.seen_classes.begin(), d.seen_classes.end(), 0);
  d.unseen_classes.resize(spec.num_classes - spec.num_seen);
  std::iota(d.unseen_classes.begin(), d.unseen_classes.end(), spec.num_seen);

  // Local-attribute subset: a shuffled prefix of the attribute ids.
  const int num_local =
      static_cast<int>(std::lround(spec.local_fraction * spec.num_attributes));
  std::vector<int> attr_order(spec.num_attributes);
  std::iota(attr_order.begin(), attr_order.end(), 0);
  rng.shuffle(attr_order);
  out.ground_truth.attribute_is_local.assign(spec.num_attributes, 0);
  for (int i = 0; i < num_local; ++i)
    out.ground_truth.attribute_is_local[attr_order[i]] = 1;

  // Unit signal direction per attribute in channel space.
  out.ground_truth.directions = Matrix(spec.num_attributes, spec.channels);
  for (int n = 0; n < spec.num_attributes; ++n) {
    double norm2 = 0.0;
    for (int c = 0; c < spec.channels; ++c) {
      const double v = rng.normal();
      out.ground_truth.directions.at(n, c) = v;
      norm2 += v * v;
    }
    const double inv = 1.0 / std::max(std::sqrt(norm2), 1e-12);
    for (int c = 0; c < spec.channels; ++c) out.ground_truth.directions.at(n, c) *= inv;
  }

  // Per-class semantics: each attribute present with probability 1/2,
  // strength uniform in [0,1].
  d.semantics = Matrix(spec.num_attributes, spec.num_classes);
  for (int i = 0; i < spec.num_classes; ++i)
    for (int n = 0; n < spec.num_attributes; ++n)
      d.semantics.at(n, i) = rng.uniform() < 0.5 ? rng.uniform() : 0.0;

  const int train_count = std::clamp<int>(
      static_cast<int>(std::lround(spec.train_fraction * spec.samples_per_class)), 1,
      spec.samples_per_class - 1);
  const int hw = spec.height * spec.width;

  d.samples.reserve(static_cast<std::size_t>(spec.num_classes) * spec.samples_per_class);
  for (int i = 0; i < spec.num_classes; ++i) {
    const bool seen = i < spec.num_seen;
    for (int j = 0; j < spec.samples_per_class; ++j) {
      Sample s;
      s.class_id = i;
      s.split = !seen              ? SplitTag::kTestUnseen
                : j < train_count  ? SplitTag::kTrainSeen
                                   : SplitTag::kTestSeen;
      s.features = Tensor3(spec.channels, spec.height, spec.width);
      for (double& v : s.features.data) v = spec.noise_level * rng.normal();

      const int sample_index = static_cast<int>(d.samples.size());
      for (int n = 0; n < spec.num_attributes; ++n) {
        const double strength = d.semantics.at(n, i);
        if (strength == 0.0) continue;
        const double jitter = rng.uniform(-spec.variation, spec.variation);
        const double amp = spec.signal_strength * strength * (1.0 + jitter);
        if (out.ground_truth.attribute_is_local[n]) {
          const int row = rng.uniform_int(spec.height - spec.patch_size + 1);
          const int col = rng.uniform_int(spec.width - spec.patch_size + 1);
          for (int c = 0; c < spec.channels; ++c) {
            const double add = amp * out.ground_truth.directions.at(n, c);
            for (int di = 0; di < spec.patch_size; ++di)
              for (int dj = 0; dj < spec.patch_size; ++dj)
                s.features.at(c, row + di, col + dj) += add;
          }
          out.ground_truth.patches.push_back({sample_index, n, row, col, spec.patch_size});
        } else {
          for (int c = 0; c < spec.channels; ++c) {
            const double add = amp * out.ground_truth.directions.at(n, c);
            double* ch = s.features.channel(c);
            for (int p = 0; p < hw; ++p) ch[p] += add;
          }
        }
      }
      d.samples.push_back(std::move(s));
    }
  }
  return out;
}

namespace {

std::string sample_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%05d.alrt", index);
  return buf;
}

}  // namespace

void save_dataset(const SyntheticData& data, const std::filesystem::path& dir) {
  const Dataset& d = data.dataset;
  std::filesystem::create_directories(dir / "samples");
  write_matrix_file(dir / "semantics.alrt", d.semantics);

  json manifest;
  manifest["num_attributes"] = d.num_attributes;
  manifest["num_classes"] = d.num_classes;
  manifest["semantics"] = "semantics.alrt";
  manifest["seen_classes"] = d.seen_classes;
  manifest["unseen_classes"] = d.unseen_classes;
  json samples = json::array();
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const std::string rel = "samples/" + sample_file_name(static_cast<int>(i));
    write_tensor3_file(dir / rel, d.samples[i].features);
    samples.push_back({{"features", rel},
                       {"class_id", d.samples[i].class_id},
                       {"split", split_tag_name(d.samples[i].split)}});
  }
  manifest["samples"] = std::move(samples);

  if (!data.ground_truth.empty()) {
    write_matrix_file(dir / "directions.alrt", data.ground_truth.directions);
    json gt;
    json locals = json::array();
    for (std::size_t n = 0; n < data.ground_truth.attribute_is_local.size(); ++n)
      if (data.ground_truth.attribute_is_local[n]) locals.push_back(n);
    gt["local_attributes"] = std::move(locals);
    gt["directions"] = "directions.alrt";
    json patches = json::array();
    for (const PlantedPatch& p : data.ground_truth.patches)
      patches.push_back({{"sample", p.sample_index},
                         {"attribute", p.attribute},
                         {"row", p.row},
                         {"col", p.col},
                         {"size", p.size}});
    gt["patches"] = std::move(patches);
    manifest["ground_truth"] = std::move(gt);
  }

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
  if (!out) throw FormatError("short write to " + (dir / "manifest.json").string());
}

SyntheticData load_dataset(const std::filesystem::path& manifest_or_dir) {
  std::filesystem::path manifest_path = manifest_or_dir;
  if (std::filesystem::is_directory(manifest_path)) manifest_path /= "manifest.json";
  const std::filesystem::path dir = manifest_path.parent_path();

  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open " + manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  SyntheticData out;
  Dataset& d = out.dataset;
  try {
    d.num_attributes = manifest.at("num_attributes").get<int>();
    d.num_classes = manifest.at("num_classes").get<int>();
    d.seen_classes = manifest.at("seen_classes").get<std::vector<int>>();
    d.unseen_classes = manifest.at("unseen_classes").get<std::vector<int>>();
    d.semantics = read_matrix_file(dir / manifest.at("semantics").get<std::string>());

    std::set<int> seen(d.seen_classes.begin(), d.seen_classes.end());
    std::set<int> unseen(d.unseen_classes.begin(), d.unseen_classes.end());
    for (int c : seen)
      if (unseen.count(c))
        throw FormatError("class " + std::to_string(c) + " is both seen and unseen");
    if (d.semantics.rows != d.num_attributes || d.semantics.cols != d.num_classes)
      throw FormatError("semantics matrix is " + std::to_string(d.semantics.rows) + "x" +
                        std::to_string(d.semantics.cols) + ", expected " +
                        std::to_string(d.num_attributes) + "x" +
                        std::to_string(d.num_classes));

    int channels = -1, height = -1, width = -1;
    for (const json& rec : manifest.at("samples")) {
      Sample s;
      s.class_id = rec.at("class_id").get<int>();
      s.split = split_tag_from_name(rec.at("split").get<std::string>());
      if (s.class_id < 0 || s.class_id >= d.num_classes)
        throw FormatError("sample class id " + std::to_string(s.class_id) +
                          " out of range");
      const bool in_seen = seen.count(s.class_id) > 0;
      const bool in_unseen = unseen.count(s.class_id) > 0;
      if (s.split == SplitTag::kTestUnseen ? !in_unseen : !in_seen)
        throw FormatError("sample of class " + std::to_string(s.class_id) +
                          " has inconsistent split tag " + split_tag_name(s.split));
      s.features = read_tensor3_file(dir / rec.at("features").get<std::string>());
      if (channels < 0) {
        channels = s.features.channels;
        height = s.features.height;
        width = s.features.width;
      } else if (s.features.channels != channels || s.features.height != height ||
                 s.features.width != width) {
        throw FormatError("sample feature shapes disagree");
      }
      d.samples.push_back(std::move(s));
    }

    if (manifest.contains("ground_truth")) {
      const json& gt = manifest.at("ground_truth");
      out.ground_truth.attribute_is_local.assign(d.num_attributes, 0);
      for (int n : gt.at("local_attributes").get<std::vector<int>>()) {
        if (n < 0 || n >= d.num_attributes)
          throw FormatError("local attribute id " + std::to_string(n) + " out of range");
        out.ground_truth.attribute_is_local[n] = 1;
      }
      out.ground_truth.directions =
          read_matrix_file(dir / gt.at("directions").get<std::string>());
      for (const json& rec : gt.at("patches")) {
        PlantedPatch p;
        p.sample_index = rec.at("sample").get<int>();
        p.attribute = rec.at("attribute").get<int>();
        p.row = rec.at("row").get<int>();
        p.col = rec.at("col").get<int>();
        p.size = rec.at("size").get<int>();
        if (p.sample_index < 0 ||
            p.sample_index >= static_cast<int>(d.samples.size()))
          throw FormatError("patch sample index " + std::to_string(p.sample_index) +
                            " out of range");
        out.ground_truth.patches.push_back(p);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return out;
}

std::vector<int> split_indices(const Dataset& dataset, SplitTag tag) {
  std::vector<int> out;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i)
    if (dataset.samples[i].split == tag) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace alrn
