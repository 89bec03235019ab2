#pragma once

#include <filesystem>
#include <string>

#include "coopnoma/mlp.hpp"
#include "coopnoma/training.hpp"

namespace coopnoma {

inline constexpr int kModelFormatVersion = 1;

/// A trained network together with the feature standardization it expects.
struct StoredModel {
  Mlp<double> net;
  FeatureStats stats;
};

/// Versioned JSON record: layer dimensions, row-major weights, biases,
/// squash range, normalization stats. Doubles are written in shortest
/// round-trip form, so a reload reproduces forward outputs bit-exactly.
std::string serialize_model(const StoredModel& model);
StoredModel deserialize_model(const std::string& text);

void save_model(const StoredModel& model, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

/// Hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);

}  // namespace coopnoma
