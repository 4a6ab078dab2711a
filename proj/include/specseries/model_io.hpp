#pragma once

#include <string>
#include <string_view>

#include "specseries/data.hpp"
#include "specseries/likelihood.hpp"
#include "specseries/ratio.hpp"

namespace specseries {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kModelFormatMajor = 1;
inline constexpr int kModelFormatMinor = 0;

/// FNV-1a 64-bit hash, hex-encoded; stable across platforms.
std::string fnv1a_hex(std::string_view text);

struct ModelProvenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string library_version = kLibraryVersion;
};

struct RatioModelFile {
    RatioModel model;
    ColumnTransform x_transform; // applied to inputs before prediction
    ModelProvenance provenance;
};

struct LikelihoodModelFile {
    LikelihoodModel model;
    ColumnTransform x_transform;
    ParamBox param_box; // the theta prior box (grid and distance standardization)
    ModelProvenance provenance;
};

enum class ModelKind { Ratio, Likelihood };

void save_ratio_model(const std::string& path, const RatioModelFile& file);
void save_likelihood_model(const std::string& path, const LikelihoodModelFile& file);

/// Reads only the header; errors on corrupt files or newer major versions.
ModelKind peek_model_kind(const std::string& path);

RatioModelFile load_ratio_model(const std::string& path);
LikelihoodModelFile load_likelihood_model(const std::string& path);

} // namespace specseries
