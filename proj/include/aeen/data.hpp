#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeen/attributes.hpp"
#include "aeen/mat.hpp"

namespace aeen {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadMagicError : IoError {
  using IoError::IoError;
};
struct VersionError : IoError {
  using IoError::IoError;
};
struct FileSizeError : IoError {
  using IoError::IoError;
};
struct ParseError : IoError {
  using IoError::IoError;
};

struct SplitSpec {
  std::vector<int> seen;
  std::vector<int> unseen;
  std::vector<int> val;  // subset of seen, held out for hyper search

  void validate(int num_classes) const;
  // seen classes that are not validation classes
  std::vector<int> train_classes() const;
};

struct Dataset {
  std::vector<FeatureMap> features;
  std::vector<int> labels;
  AttributeMatrix attributes;
  SplitSpec split;

  int num_classes() const { return attributes.num_classes(); }
  void validate() const;
};

// Feature-map container: magic "AEFM", little-endian u32 version/N/K/H,
// then N*K*H*H little-endian f32 in sample-, channel-, row-major order.
void write_feature_maps(const std::string& path,
                        const std::vector<FeatureMap>& maps);
std::vector<FeatureMap> read_feature_maps(const std::string& path);

// One row per class, comma-separated decimals; a leading line that fails
// numeric parsing is treated as a header and skipped.
AttributeMatrix load_attributes_csv(const std::string& path);
void write_attributes_csv(const std::string& path, const AttributeMatrix& a);

std::vector<int> load_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);

// JSON object with "seen", "unseen", "val" class-index arrays.
SplitSpec load_split(const std::string& path);
void write_split(const std::string& path, const SplitSpec& split);

struct SyntheticSpec {
  int num_classes = 10;
  int samples_per_class = 20;
  int channels = 8;
  int spatial = 12;
  int attr_dim = 8;
  double noise_sigma = 0.0;
  double signal_gain = 1.0;  // impulse height = gain * attribute value
  uint64_t seed = 1;
  int unseen_classes = 2;
  int val_classes = 2;
  // Fixed inputs; generated from the seed when absent. Hot spots are
  // [class][attr] -> (row, col) and must lie inside the spatial grid.
  std::optional<Mat> attributes;
  std::optional<std::vector<std::vector<std::array<int, 2>>>> hot_spots;

  void validate() const;
};

struct GroundTruth {
  std::vector<std::vector<std::array<int, 2>>> hot_spots;
  Mat attributes;
};

// Plants an impulse of height a_y[c] at the per-(class, attribute) hot spot
// on channel c % K, then adds i.i.d. normal noise of scale noise_sigma.
// With zero noise the attribute-to-feature mapping is exactly linear.
std::pair<Dataset, GroundTruth> gen_synthetic(const SyntheticSpec& spec);

SyntheticSpec load_synthetic_spec(const std::string& path);
void write_ground_truth(const std::string& path, const GroundTruth& truth);
GroundTruth load_ground_truth(const std::string& path);

// Conventional filenames inside a dataset directory.
inline constexpr const char* kFeaturesFile = "features.aefm";
inline constexpr const char* kLabelsFile = "labels.csv";
inline constexpr const char* kAttributesFile = "attributes.csv";
inline constexpr const char* kSplitFile = "split.json";
inline constexpr const char* kTruthFile = "truth.json";

Dataset load_dataset(const std::string& dir);
void write_dataset(const std::string& dir, const Dataset& ds);

}  // namespace aeen
