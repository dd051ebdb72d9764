#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeen {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Dense row-major matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r < 0 ? 0 : r) * static_cast<size_t>(c < 0 ? 0 : c), fill) {
    require(r >= 0 && c >= 0, "Mat: negative dimension");
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {v.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {v.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  bool operator==(const Mat&) const = default;
};

// K x H x H activation tensor; also holds per-dimension localization maps
// (channels = attribute dimensions in that case).
struct FeatureMap {
  int channels = 0;
  int spatial = 0;
  std::vector<double> v;

  FeatureMap() = default;
  FeatureMap(int k, int h, double fill = 0.0)
      : channels(k), spatial(h),
        v(static_cast<size_t>(k < 0 ? 0 : k) * static_cast<size_t>(h < 0 ? 0 : h) *
              static_cast<size_t>(h < 0 ? 0 : h),
          fill) {
    require(k >= 0 && h >= 0, "FeatureMap: negative dimension");
  }

  size_t plane() const { return static_cast<size_t>(spatial) * spatial; }
  size_t idx(int k, int r, int c) const {
    return (static_cast<size_t>(k) * spatial + r) * spatial + c;
  }
  double& at(int k, int r, int c) { return v[idx(k, r, c)]; }
  double at(int k, int r, int c) const { return v[idx(k, r, c)]; }

  void validate(const char* what = "FeatureMap") const {
    require(channels >= 1 && spatial >= 1, std::string(what) + ": empty tensor");
    require(v.size() == static_cast<size_t>(channels) * plane(),
            std::string(what) + ": size does not match shape");
    require(all_finite(v), std::string(what) + ": non-finite entry");
  }

  bool operator==(const FeatureMap&) const = default;
};

inline std::vector<double> softmax(std::span<const double> x) {
  require(!x.empty(), "softmax: empty input");
  double m = x[0];
  for (double e : x) m = std::max(m, e);
  std::vector<double> out(x.size());
  double z = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - m);
    z += out[i];
  }
  for (double& e : out) e /= z;
  return out;
}

}  // namespace aeen
