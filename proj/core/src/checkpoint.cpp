#include "alrn/checkpoint.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "alrn/tensor_file.hpp"

namespace alrn {

using nlohmann::ordered_json;

namespace {

const char* activation_name(RevisionActivation a) {
  return a == RevisionActivation::kSoftmax ? "softmax" : "sigmoid";
}

RevisionActivation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return RevisionActivation::kSigmoid;
  if (name == "softmax") return RevisionActivation::kSoftmax;
  throw FormatError("unknown revision activation \"" + name + "\"");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ParameterSet& params,
                     const ModelConfig& config) {
  std::filesystem::create_directories(dir);

  ordered_json header;
  header["num_attributes"] = config.num_attributes;
  header["feature_channels"] = config.feature_channels;
  header["adapter_channels"] = config.adapter_channels;
  header["use_scu"] = config.use_scu;
  header["use_global"] = config.use_global;
  header["use_arm"] = config.use_arm;
  header["revision_activation"] = activation_name(config.revision_activation);

  ordered_json buffers = ordered_json::array();
  for (const auto& ref : parameter_buffers(params)) {
    const std::string file = std::string(ref.name) + ".alrt";
    write_tensor_file(dir / file, {static_cast<std::uint32_t>(ref.values->size())},
                      *ref.values);
    buffers.push_back({{"name", ref.name}, {"file", file}});
  }
  header["buffers"] = std::move(buffers);

  std::ofstream out(dir / "header.json", std::ios::trunc);
  if (!out) throw FormatError("cannot write " + (dir / "header.json").string());
  out << header.dump(2) << "\n";
  if (!out) throw FormatError("short write to " + (dir / "header.json").string());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "header.json");
  if (!in) throw FormatError("cannot open " + (dir / "header.json").string());
  ordered_json header;
  try {
    in >> header;
  } catch (const ordered_json::exception& e) {
    throw FormatError((dir / "header.json").string() + ": " + e.what());
  }

  Checkpoint ck;
  try {
    ck.config.num_attributes = header.at("num_attributes").get<int>();
    ck.config.feature_channels = header.at("feature_channels").get<int>();
    ck.config.adapter_channels = header.at("adapter_channels").get<int>();
    ck.config.use_scu = header.at("use_scu").get<bool>();
    ck.config.use_global = header.at("use_global").get<bool>();
    ck.config.use_arm = header.at("use_arm").get<bool>();
    ck.config.revision_activation =
        activation_from_name(header.at("revision_activation").get<std::string>());

    const int na = ck.config.num_attributes;
    const int c = ck.config.feature_channels;
    ck.params.attention_weight = Matrix(na, c);
    ck.params.attention_bias.assign(na, 0.0);
    ck.params.saliency_weight = Matrix(na, c);
    ck.params.saliency_bias.assign(na, 0.0);
    ck.params.gate_weight = Matrix(na, c);
    ck.params.gate_bias.assign(na, 0.0);
    ck.params.revision_weight = Matrix(na, c);
    ck.params.revision_bias.assign(na, 0.0);
    if (ck.config.has_adapter()) {
      ck.params.adapter_weight = Matrix(c, ck.config.adapter_channels);
      ck.params.adapter_bias.assign(c, 0.0);
    }

    auto refs = parameter_buffers(ck.params);
    const ordered_json& buffers = header.at("buffers");
    if (buffers.size() != refs.size())
      throw FormatError("checkpoint lists " + std::to_string(buffers.size()) +
                        " buffers, model needs " + std::to_string(refs.size()));
    for (std::size_t r = 0; r < refs.size(); ++r) {
      const ordered_json& rec = buffers.at(r);
      if (rec.at("name").get<std::string>() != refs[r].name)
        throw FormatError("checkpoint buffer " + std::to_string(r) + " is \"" +
                          rec.at("name").get<std::string>() + "\", expected \"" +
                          refs[r].name + "\"");
      TensorData t = read_tensor_file(dir / rec.at("file").get<std::string>());
      if (t.values.size() != refs[r].values->size())
        throw FormatError(std::string("buffer ") + refs[r].name + " has " +
                          std::to_string(t.values.size()) + " values, expected " +
                          std::to_string(refs[r].values->size()));
      *refs[r].values = std::move(t.values);
    }
  } catch (const ordered_json::exception& e) {
    throw FormatError((dir / "header.json").string() + ": " + e.what());
  }
  return ck;
}

}  // namespace alrn
