#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aeen/network.hpp"

namespace aeen {

// Grayscale map with values in [0, 1]; row-major, v[y * width + x].
struct HeatMap {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  HeatMap() = default;
  HeatMap(int w, int h, double fill = 0.0)
      : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

  double& at(int y, int x) { return v[static_cast<size_t>(y) * width + x]; }
  double at(int y, int x) const { return v[static_cast<size_t>(y) * width + x]; }
};

// Localization map of one attribute dimension, min-max normalized to [0, 1].
// A constant raw map normalizes to all zeros.
HeatMap attribute_map(const FeatureMap& s, const ConvWeights& w, int attr_index);

// Weighted mean of all attribute maps, weights = softmax(class_attr_row),
// then min-max normalized.
HeatMap average_map(const FeatureMap& s, const ConvWeights& w,
                    std::span<const double> class_attr_row);

// Bilinear with corner alignment; corner values are preserved exactly.
HeatMap upsample(const HeatMap& map, int out_w, int out_h);

// Binary PGM ("P5"), maxval 255, v -> round(255 * v), row-major.
std::string render_pgm(const HeatMap& map);

HeatMap parse_pgm(std::string_view bytes);

}  // namespace aeen
