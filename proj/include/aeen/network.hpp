#pragma once

#include <cstdint>
#include <vector>

#include "aeen/mat.hpp"
#include "aeen/rng.hpp"

namespace aeen {

// Attribute-dimension maps produced by the 1x1 aggregation; channels = D.
using LocalizationMaps = FeatureMap;

// K x D weights of a 1x1 aggregation stage.
struct ConvWeights {
  Mat w;

  int in_channels() const { return w.rows; }
  int out_dims() const { return w.cols; }
};

// Shared K -> K 3x3 stage (stride 1, pad 1) with rectification.
struct Conv3x3 {
  int channels = 0;
  std::vector<double> kernel;  // [out][in][3][3]
  std::vector<double> bias;    // [out]

  size_t kidx(int o, int i, int dr, int dc) const {
    return ((static_cast<size_t>(o) * channels + i) * 3 + dr) * 3 + dc;
  }
  void validate() const;
};

// Which side of the per-channel threshold gets its sign flipped by the
// erasing rectifier. kFlipBelow matches the written definition; kFlipAbove
// erases the initially discovered (above-threshold) regions instead.
enum class ErasePolarity { kFlipBelow, kFlipAbove };

struct NetworkParams {
  Conv3x3 shared_conv;
  ConvWeights top_branch;     // erasing branch
  ConvWeights bottom_branch;
  double xi = 0.01;           // per-channel threshold ratio
  Mat class_matrix;           // num_classes x D, fixed during training
  double dropout_rate = 0.4;
  ErasePolarity polarity = ErasePolarity::kFlipBelow;

  int channels() const { return shared_conv.channels; }
  int dims() const { return top_branch.out_dims(); }
  int num_classes() const { return class_matrix.rows; }
  void validate() const;
};

// He-style random init for the learnable stages; the class matrix is stored
// as given and never updated.
NetworkParams init_params(int channels, Mat class_matrix, double xi,
                          double dropout_rate, uint64_t seed);

FeatureMap conv3x3(const FeatureMap& s, const Conv3x3& conv);

struct CReluResult {
  FeatureMap out;
  std::vector<int8_t> sign_mask;  // theta per element, +1 or -1
};

// out = max(x,0) * theta(x), theta = +1 when x >= xi * channel_max else -1
// (flipped when polarity is kFlipAbove).
CReluResult c_relu(const FeatureMap& s, double xi,
                   ErasePolarity polarity = ErasePolarity::kFlipBelow);

// L_d = sum_k S_k * W[k][d], elementwise over the plane.
LocalizationMaps localize(const FeatureMap& s, const ConvWeights& w);

struct PoolResult {
  LocalizationMaps out;
  std::vector<int> argmax;  // flat source index per pooled cell, first hit on ties
};

// kernel min(5, H), stride 1, no padding.
PoolResult max_pool5(const LocalizationMaps& maps);

// Spatial mean per map; the branch embedding in attribute space.
std::vector<double> aggregate(const LocalizationMaps& pooled);

std::vector<double> class_scores(std::span<const double> embed,
                                 const Mat& class_matrix);

struct ForwardOutput {
  std::vector<double> scores_top, scores_bottom, scores_avg;

  struct Cache {
    FeatureMap input;
    FeatureMap conv_out;  // shared stage output (rectified)
    FeatureMap erased;    // top branch input
    std::vector<int8_t> sign_mask;
    LocalizationMaps loc_top, loc_bottom;
    PoolResult pool_top, pool_bottom;
    std::vector<double> embed_top, embed_bottom;          // pre-dropout
    std::vector<double> embed_top_out, embed_bottom_out;  // post-dropout
    std::vector<uint8_t> drop_top, drop_bottom;           // keep flags, train mode only
    bool train_mode = false;
    bool valid = false;
  } cache;
};

// rng is only consulted in train mode (dropout masks).
ForwardOutput forward(const FeatureMap& s, const NetworkParams& p,
                      bool train_mode, Rng* rng);
inline ForwardOutput forward(const FeatureMap& s, const NetworkParams& p) {
  return forward(s, p, false, nullptr);
}

// Summed softmax cross-entropy of both branches, normalized over the given
// class set only. label must belong to that set.
double loss(const ForwardOutput& out, int label,
            const std::vector<int>& seen_classes);

struct Gradients {
  std::vector<double> conv_kernel, conv_bias;
  Mat top_w, bottom_w;
};

Gradients zero_gradients(const NetworkParams& p);
void accumulate(Gradients& acc, const Gradients& g);
void scale(Gradients& g, double factor);

// Exact reverse-mode gradients of loss(). The sign masks, per-channel
// thresholds, pooling argmax choices and dropout masks are taken from the
// cache and treated as constants; the class matrix receives no gradient.
Gradients backward(const ForwardOutput& out, int label,
                   const NetworkParams& p,
                   const std::vector<int>& seen_classes);

// argmax restricted to candidates; ties go to the lowest class index.
int predict(std::span<const double> scores, const std::vector<int>& candidates);

}  // namespace aeen
