#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skindet/mlp.hpp"

namespace skindet {

// Model document, format version 1. Weights are stored in the pack_params
// order (hidden weights row-major, hidden biases, output weights, output
// bias); nlohmann prints doubles with shortest-round-trip precision, so a
// load reproduces the weights bit-exactly. `input` is "chroma" for networks
// fed from pixel features and "raw" for networks fed unit-interval values
// directly (the stacking combiner).
inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const Network& n, const std::string& name) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = "mlp";
  j["name"] = name;
  j["topology"] = {{"inputs", n.topo.inputs},
                   {"hidden", n.topo.hidden},
                   {"outputs", n.topo.outputs}};
  j["input"] = n.feature_kinds.empty() ? "raw" : "chroma";
  nlohmann::json feats = nlohmann::json::array();
  nlohmann::json norms = nlohmann::json::array();
  for (FeatureKind k : n.feature_kinds) {
    feats.push_back(feature_kind_name(k));
    const FeatureRange r = feature_range(k);
    norms.push_back({{"offset", r.offset}, {"scale", r.scale}});
  }
  j["features"] = feats;
  j["normalization"] = norms;
  // Eigen is column-major by default; persist row-major as declared.
  {
    std::vector<double> hw;
    hw.reserve(static_cast<std::size_t>(n.topo.hidden) * n.topo.inputs);
    for (int k = 0; k < n.topo.hidden; ++k)
      for (int c = 0; c < n.topo.inputs; ++c) hw.push_back(n.hidden_weights(k, c));
    j["hidden_weights"] = hw;
  }
  j["hidden_bias"] =
      std::vector<double>(n.hidden_bias.data(), n.hidden_bias.data() + n.hidden_bias.size());
  j["output_weights"] = std::vector<double>(n.output_weights.data(),
                                            n.output_weights.data() + n.output_weights.size());
  j["output_bias"] = n.output_bias;
  j["provenance"] = {{"seed", n.prov.seed},       {"data_file", n.prov.data_file},
                     {"epochs", n.prov.epochs},   {"train_mse", n.prov.train_mse},
                     {"val_mse", n.prov.val_mse}, {"trained", n.prov.trained}};
  return j;
}

inline void save_model(const Network& n, const std::string& name,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path.string());
  out << model_to_json(n, name).dump(2) << "\n";
}

struct NamedNetwork {
  Network net;
  std::string name;
};

inline NamedNetwork model_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw std::invalid_argument(where + ": missing format_version");
  if (j["format_version"].get<int>() != kModelFormatVersion)
    throw std::invalid_argument(where + ": unknown model format version " +
                                j["format_version"].dump());
  if (j.value("kind", "") != "mlp")
    throw std::invalid_argument(where + ": not a model document");
  NamedNetwork r;
  r.name = j.value("name", "");
  Network& n = r.net;
  n.topo.inputs = j.at("topology").at("inputs").get<int>();
  n.topo.hidden = j.at("topology").at("hidden").get<int>();
  n.topo.outputs = j.at("topology").at("outputs").get<int>();
  n.topo.validate();

  for (const auto& f : j.at("features"))
    n.feature_kinds.push_back(parse_feature_kind(f.get<std::string>()));
  if (!n.feature_kinds.empty() &&
      static_cast<int>(n.feature_kinds.size()) != n.topo.inputs)
    throw std::invalid_argument(where + ": feature list does not match input count");
  const auto& norms = j.at("normalization");
  if (norms.size() != n.feature_kinds.size())
    throw std::invalid_argument(where + ": normalization list does not match features");
  for (std::size_t i = 0; i < n.feature_kinds.size(); ++i) {
    const FeatureRange expect = feature_range(n.feature_kinds[i]);
    if (norms[i].at("offset").get<double>() != expect.offset ||
        norms[i].at("scale").get<double>() != expect.scale)
      throw std::invalid_argument(where + ": normalization constants do not match feature kind");
  }

  const auto hw = j.at("hidden_weights").get<std::vector<double>>();
  const auto hb = j.at("hidden_bias").get<std::vector<double>>();
  const auto ow = j.at("output_weights").get<std::vector<double>>();
  const int C = n.topo.inputs, H = n.topo.hidden;
  if (static_cast<int>(hw.size()) != C * H || static_cast<int>(hb.size()) != H ||
      static_cast<int>(ow.size()) != H)
    throw std::invalid_argument(where + ": weight array size mismatch");
  n.hidden_weights.resize(H, C);
  for (int k = 0; k < H; ++k)
    for (int c = 0; c < C; ++c) n.hidden_weights(k, c) = hw[static_cast<std::size_t>(k) * C + c];
  n.hidden_bias = Eigen::Map<const Eigen::VectorXd>(hb.data(), H);
  n.output_weights = Eigen::Map<const Eigen::VectorXd>(ow.data(), H);
  n.output_bias = j.at("output_bias").get<double>();

  const auto& p = j.at("provenance");
  n.prov.seed = p.at("seed").get<std::uint64_t>();
  n.prov.data_file = p.at("data_file").get<std::string>();
  n.prov.epochs = p.at("epochs").get<int>();
  n.prov.train_mse = p.at("train_mse").get<double>();
  n.prov.val_mse = p.at("val_mse").get<double>();
  n.prov.trained = p.value("trained", false);
  return r;
}

inline NamedNetwork load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed model file " + path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j, path.string());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace skindet
