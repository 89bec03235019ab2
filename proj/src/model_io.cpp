#include "coopnoma/model_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "coopnoma/errors.hpp"

namespace coopnoma {

using nlohmann::json;

namespace {

json vector_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector<double> vector_from(const json& j, Eigen::Index expected, const char* what) {
  const auto values = j.get<std::vector<double>>();
  require(static_cast<Eigen::Index>(values.size()) == expected,
          std::string("model: ") + what + " has the wrong length");
  return Eigen::Map<const Vector<double>>(values.data(), expected);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string serialize_model(const StoredModel& model) {
  json layers = json::array();
  for (const auto& l : model.net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    layers.push_back({{"inputs", l.inputs()}, {"outputs", l.outputs()}, {"weights", w},
                      {"bias", vector_json(l.bias)}});
  }
  json j;
  j["format"] = "coopnoma-mlp";
  j["version"] = kModelFormatVersion;
  j["hidden_activation"] = "relu";
  j["squash"] = {{"lo", model.net.range().lo}, {"hi", model.net.range().hi}};
  j["normalization"] = {{"mean", vector_json(model.stats.mean)},
                        {"scale", vector_json(model.stats.scale)}};
  j["layers"] = std::move(layers);
  return j.dump(1) + "\n";
}

StoredModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: not valid JSON: ") + e.what());
  }
  try {
    require(j.at("format") == "coopnoma-mlp", "model: unknown format tag");
    require(j.at("version") == kModelFormatVersion, "model: unsupported format version");
    std::vector<DenseLayer<double>> layers;
    for (const auto& lj : j.at("layers")) {
      const auto in = lj.at("inputs").get<Eigen::Index>();
      const auto out = lj.at("outputs").get<Eigen::Index>();
      require(in > 0 && out > 0, "model: layer dimensions must be positive");
      DenseLayer<double> l;
      const auto w = vector_from(lj.at("weights"), in * out, "weights");
      l.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), out, in);
      l.bias = vector_from(lj.at("bias"), out, "bias");
      layers.push_back(std::move(l));
    }
    Squash range{j.at("squash").at("lo").get<double>(), j.at("squash").at("hi").get<double>()};
    StoredModel m{Mlp<double>(std::move(layers), range), {}};
    const auto dim = m.net.input_dim();
    m.stats.mean = vector_from(j.at("normalization").at("mean"), dim, "normalization mean");
    m.stats.scale = vector_from(j.at("normalization").at("scale"), dim, "normalization scale");
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: malformed record: ") + e.what());
  }
}

void save_model(const StoredModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path.string());
  out << serialize_model(model);
}

StoredModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace coopnoma
