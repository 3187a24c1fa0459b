#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uvkit/error.hpp"
#include "uvkit/train.hpp"

namespace uvkit {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json model_json(const ModelConfig& c) {
  return {{"width_divisor", c.width_divisor},     {"embed_uv", c.embed_uv},
          {"embed_position", c.embed_position},   {"embed_normal", c.embed_normal},
          {"embed_curvature", c.embed_curvature}, {"embed_degree", c.embed_degree},
          {"graph_width", c.graph_width},         {"graph_layers", c.graph_layers},
          {"heads", c.heads},                     {"encoder_layers", c.encoder_layers},
          {"ffn_width", c.ffn_width},             {"attention_window", c.attention_window},
          {"head_init_scale", c.head_init_scale}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.width_divisor = j.at("width_divisor").get<int>();
  c.embed_uv = j.at("embed_uv").get<int>();
  c.embed_position = j.at("embed_position").get<int>();
  c.embed_normal = j.at("embed_normal").get<int>();
  c.embed_curvature = j.at("embed_curvature").get<int>();
  c.embed_degree = j.at("embed_degree").get<int>();
  c.graph_width = j.at("graph_width").get<int>();
  c.graph_layers = j.at("graph_layers").get<int>();
  c.heads = j.at("heads").get<int>();
  c.encoder_layers = j.at("encoder_layers").get<int>();
  c.ffn_width = j.at("ffn_width").get<int>();
  c.attention_window = j.at("attention_window").get<int>();
  c.head_init_scale = j.at("head_init_scale").get<double>();
  c.validate();
  return c;
}

json train_json(const TrainConfig& c) {
  return {{"weights",
           {{"recon", c.weights.recon},
            {"silhouette", c.weights.silhouette},
            {"distortion", c.weights.distortion},
            {"overlap", c.weights.overlap}}},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"seed", c.seed},
          {"raster_resolution", c.raster.resolution},
          {"raster_sharpness", c.raster.sharpness},
          {"width_divisor", c.width_divisor},
          {"threads", c.threads}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  const json& w = j.at("weights");
  c.weights.recon = w.at("recon").get<double>();
  c.weights.silhouette = w.at("silhouette").get<double>();
  c.weights.distortion = w.at("distortion").get<double>();
  c.weights.overlap = w.at("overlap").get<double>();
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.steps = j.at("steps").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.raster.resolution = j.at("raster_resolution").get<int>();
  c.raster.sharpness = j.at("raster_sharpness").get<double>();
  c.width_divisor = j.at("width_divisor").get<int>();
  c.threads = j.at("threads").get<int>();
  return c;
}

}  // namespace

std::string format_checkpoint(const RefinerParams& params, const TrainConfig& config) {
  json doc;
  doc["format"] = "uvkit-refiner";
  doc["version"] = kFormatVersion;
  doc["model"] = model_json(params.config);
  doc["feature_stats"] = {{"degree_mean", params.stats.degree_mean},
                          {"degree_std", params.stats.degree_std},
                          {"curvature_mean", params.stats.curvature_mean},
                          {"curvature_std", params.stats.curvature_std}};
  doc["train_config"] = train_json(config);
  json layers = json::array();
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const ad::Matrix& m = params.tensors[i];
    json values = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    }
    layers.push_back({{"name", params.names[i]}, {"shape", {m.rows(), m.cols()}}, {"values", std::move(values)}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const RefinerParams& params, const TrainConfig& config) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw_input("cannot write " + path.string());
  f << format_checkpoint(params, config);
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint ck;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "uvkit-refiner") throw_input("checkpoint: unknown format");
    if (doc.at("version").get<int>() != kFormatVersion) throw_input("checkpoint: unsupported version");
    ck.config = train_from_json(doc.at("train_config"));
    ck.params = zero_params(model_from_json(doc.at("model")));
    const json& fs = doc.at("feature_stats");
    ck.params.stats.degree_mean = fs.at("degree_mean").get<double>();
    ck.params.stats.degree_std = fs.at("degree_std").get<double>();
    ck.params.stats.curvature_mean = fs.at("curvature_mean").get<double>();
    ck.params.stats.curvature_std = fs.at("curvature_std").get<double>();
    const json& layers = doc.at("layers");
    if (layers.size() != ck.params.tensors.size()) throw_input("checkpoint: layer count does not match model");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const json& l = layers[i];
      ad::Matrix& m = ck.params.tensors[i];
      if (l.at("name").get<std::string>() != ck.params.names[i])
        throw_input("checkpoint: expected layer '" + ck.params.names[i] + "'");
      const auto shape = l.at("shape").get<std::vector<long>>();
      if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols())
        throw_input("checkpoint: shape mismatch for '" + ck.params.names[i] + "'");
      const auto values = l.at("values").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(values.size()) != m.size())
        throw_input("checkpoint: value count mismatch for '" + ck.params.names[i] + "'");
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = values[static_cast<std::size_t>(r * m.cols() + c)];
      }
    }
  } catch (const json::exception& e) {
    throw_input(std::string("checkpoint: ") + e.what());
  }
  if (!ck.params.all_finite()) throw_numerical("checkpoint: non-finite weights");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_input("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace uvkit
