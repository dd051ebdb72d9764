#include "aeen/heatmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace aeen {

namespace {

void normalize_inplace(HeatMap& map) {
  const auto [lo_it, hi_it] = std::minmax_element(map.v.begin(), map.v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi > lo) {
    const double span = hi - lo;  // divide, so the max lands on exactly 1
    for (double& e : map.v) e = (e - lo) / span;
  } else {
    std::fill(map.v.begin(), map.v.end(), 0.0);
  }
}

HeatMap from_plane(const LocalizationMaps& maps, int index) {
  const int h = maps.spatial;
  HeatMap out(h, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < h; ++c) out.at(r, c) = maps.at(index, r, c);
  return out;
}

}  // namespace

HeatMap attribute_map(const FeatureMap& s, const ConvWeights& w,
                      int attr_index) {
  if (attr_index < 0 || attr_index >= w.out_dims())
    throw std::out_of_range("attribute_map: attribute index " +
                            std::to_string(attr_index) + " out of range");
  const LocalizationMaps maps = localize(s, w);
  HeatMap out = from_plane(maps, attr_index);
  normalize_inplace(out);
  return out;
}

HeatMap average_map(const FeatureMap& s, const ConvWeights& w,
                    std::span<const double> class_attr_row) {
  require(static_cast<int>(class_attr_row.size()) == w.out_dims(),
          "average_map: class attribute row dim mismatch");
  const std::vector<double> weights = softmax(class_attr_row);
  const LocalizationMaps maps = localize(s, w);
  const int h = maps.spatial;
  HeatMap out(h, h, 0.0);
  for (int d = 0; d < maps.channels; ++d)
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < h; ++c) out.at(r, c) += weights[d] * maps.at(d, r, c);
  normalize_inplace(out);
  return out;
}

HeatMap upsample(const HeatMap& map, int out_w, int out_h) {
  require(map.width >= 1 && map.height >= 1, "upsample: empty source map");
  require(out_w >= 1 && out_h >= 1, "upsample: target size must be >= 1");
  require(out_w >= map.width && out_h >= map.height,
          "upsample: target must not shrink the map");
  HeatMap out(out_w, out_h);
  const double sx = out_w > 1 ? static_cast<double>(map.width - 1) / (out_w - 1) : 0.0;
  const double sy = out_h > 1 ? static_cast<double>(map.height - 1) / (out_h - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    const double fy = y * sy;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = x * sx;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double wx = fx - x0;
      const double top = (1.0 - wx) * map.at(y0, x0) + wx * map.at(y0, x1);
      const double bottom = (1.0 - wx) * map.at(y1, x0) + wx * map.at(y1, x1);
      out.at(y, x) = (1.0 - wy) * top + wy * bottom;
    }
  }
  return out;
}

std::string render_pgm(const HeatMap& map) {
  require(map.width >= 1 && map.height >= 1, "render_pgm: empty map");
  for (double e : map.v)
    require(std::isfinite(e) && e >= 0.0 && e <= 1.0,
            "render_pgm: map is not normalized to [0, 1]");
  char header[64];
  std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", map.width,
                map.height);
  std::string out(header);
  out.reserve(out.size() + map.v.size());
  for (double e : map.v)
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(255.0 * e))));
  return out;
}

namespace {

// Skips PGM whitespace/comments and parses one unsigned decimal field.
long parse_pgm_int(std::string_view bytes, size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  require(pos < bytes.size() &&
              std::isdigit(static_cast<unsigned char>(bytes[pos])),
          "parse_pgm: expected an integer field");
  long value = 0;
  while (pos < bytes.size() &&
         std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    ++pos;
  }
  return value;
}

}  // namespace

HeatMap parse_pgm(std::string_view bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5',
          "parse_pgm: not a binary PGM stream");
  size_t pos = 2;
  const long w = parse_pgm_int(bytes, pos);
  const long h = parse_pgm_int(bytes, pos);
  const long maxval = parse_pgm_int(bytes, pos);
  require(w >= 1 && h >= 1, "parse_pgm: bad dimensions");
  require(maxval >= 1 && maxval <= 255, "parse_pgm: unsupported maxval");
  require(pos < bytes.size() &&
              std::isspace(static_cast<unsigned char>(bytes[pos])),
          "parse_pgm: missing separator after header");
  ++pos;
  const size_t expected = static_cast<size_t>(w) * static_cast<size_t>(h);
  require(bytes.size() - pos == expected, "parse_pgm: pixel payload size mismatch");
  HeatMap map(static_cast<int>(w), static_cast<int>(h));
  for (size_t i = 0; i < expected; ++i)
    map.v[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) /
               static_cast<double>(maxval);
  return map;
}

}  // namespace aeen
