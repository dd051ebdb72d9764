#include <doctest.h>

#include <cmath>

#include "aeen/data.hpp"
#include "aeen/heatmap.hpp"
#include "aeen/rng.hpp"

using namespace aeen;

namespace {

ConvWeights round_robin_weights(int channels, int dims) {
  ConvWeights w{Mat(channels, dims, 0.0)};
  for (int c = 0; c < dims; ++c) w.w.at(c % channels, c) = 1.0;
  return w;
}

FeatureMap random_map(int k, int h, uint64_t seed) {
  FeatureMap s(k, h);
  Rng rng(seed);
  for (double& e : s.v) e = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace

TEST_CASE("attribute_map finds a planted hot spot") {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.samples_per_class = 2;
  spec.channels = 5;
  spec.spatial = 10;
  spec.attr_dim = 5;
  spec.noise_sigma = 0.0;
  spec.seed = 90;
  spec.unseen_classes = 1;
  spec.val_classes = 0;
  const auto [ds, truth] = gen_synthetic(spec);
  const ConvWeights w = round_robin_weights(spec.channels, spec.attr_dim);
  for (int y = 0; y < spec.num_classes; ++y) {
    const FeatureMap& s = ds.features[static_cast<size_t>(y) * 2];
    for (int c = 0; c < spec.attr_dim; ++c) {
      const HeatMap map = attribute_map(s, w, c);
      int best = 0;
      for (size_t i = 1; i < map.v.size(); ++i)
        if (map.v[i] > map.v[best]) best = static_cast<int>(i);
      const auto& [r, col] = truth.hot_spots[y][c];
      CHECK(best == r * spec.spatial + col);
      CHECK(map.v[best] == 1.0);
    }
  }
}

TEST_CASE("attribute_map of a zero input is all zeros") {
  const FeatureMap s(3, 4, 0.0);
  const HeatMap map = attribute_map(s, round_robin_weights(3, 3), 1);
  for (double e : map.v) CHECK(e == 0.0);
}

TEST_CASE("attribute_map normalizes non-constant maps to a max of 1") {
  const FeatureMap s = random_map(2, 5, 91);
  const HeatMap map = attribute_map(s, round_robin_weights(2, 2), 0);
  double mx = 0.0, mn = 1.0;
  for (double e : map.v) {
    mx = std::max(mx, e);
    mn = std::min(mn, e);
  }
  CHECK(mx == 1.0);
  CHECK(mn == 0.0);
}

TEST_CASE("attribute_map is invariant to a positive input scale") {
  const FeatureMap s = random_map(3, 6, 92);
  FeatureMap scaled = s;
  for (double& e : scaled.v) e *= 37.5;
  const ConvWeights w = round_robin_weights(3, 3);
  const HeatMap a = attribute_map(s, w, 2);
  const HeatMap b = attribute_map(scaled, w, 2);
  for (size_t i = 0; i < a.v.size(); ++i)
    CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-12));
}

TEST_CASE("attribute_map rejects an out-of-range index") {
  const FeatureMap s = random_map(2, 4, 93);
  CHECK_THROWS_AS(attribute_map(s, round_robin_weights(2, 2), 5),
                  std::out_of_range);
}

TEST_CASE("average_map with a uniform row is the unweighted mean of maps") {
  const FeatureMap s = random_map(3, 5, 94);
  ConvWeights w{Mat(3, 4)};
  Rng rng(95);
  for (double& e : w.w.v) e = rng.uniform(-1.0, 1.0);
  const std::vector<double> uniform_row(4, 0.7);
  const HeatMap avg = average_map(s, w, uniform_row);

  const LocalizationMaps maps = localize(s, w);
  HeatMap want(5, 5, 0.0);
  for (int d = 0; d < 4; ++d)
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) want.at(r, c) += 0.25 * maps.at(d, r, c);
  const auto [mn_it, mx_it] = std::minmax_element(want.v.begin(), want.v.end());
  for (size_t i = 0; i < want.v.size(); ++i) {
    const double norm = (want.v[i] - *mn_it) / (*mx_it - *mn_it);
    CHECK(avg.v[i] == doctest::Approx(norm).epsilon(1e-10));
  }
}

TEST_CASE("average_map converges to the dominant attribute's map") {
  const FeatureMap s = random_map(2, 6, 96);
  ConvWeights w{Mat(2, 3)};
  Rng rng(97);
  for (double& e : w.w.v) e = rng.uniform(-1.0, 1.0);
  std::vector<double> row{0.0, 1e4, 0.0};
  const HeatMap avg = average_map(s, w, row);
  const HeatMap single = attribute_map(s, w, 1);
  for (size_t i = 0; i < avg.v.size(); ++i)
    CHECK(avg.v[i] == doctest::Approx(single.v[i]).epsilon(1e-10));
}

TEST_CASE("average_map matches an explicit weighted-sum oracle") {
  const FeatureMap s = random_map(4, 4, 98);
  ConvWeights w{Mat(4, 5)};
  Rng rng(99);
  for (double& e : w.w.v) e = rng.uniform(-1.0, 1.0);
  std::vector<double> row(5);
  for (double& e : row) e = rng.uniform(-2.0, 2.0);
  const HeatMap avg = average_map(s, w, row);

  const std::vector<double> weights = softmax(row);
  double wsum = 0.0;
  for (double e : weights) wsum += e;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

  const LocalizationMaps maps = localize(s, w);
  std::vector<double> raw(16, 0.0);
  for (int d = 0; d < 5; ++d)
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        raw[static_cast<size_t>(r) * 4 + c] += weights[d] * maps.at(d, r, c);
  const auto [mn_it, mx_it] = std::minmax_element(raw.begin(), raw.end());
  for (size_t i = 0; i < raw.size(); ++i)
    CHECK(avg.v[i] ==
          doctest::Approx((raw[i] - *mn_it) / (*mx_it - *mn_it)).epsilon(1e-10));
}

TEST_CASE("average_map rejects a row of the wrong width") {
  const FeatureMap s = random_map(2, 4, 100);
  CHECK_THROWS_AS(average_map(s, round_robin_weights(2, 3), std::vector<double>(4, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("upsample to the same size is the identity") {
  HeatMap map(3, 3);
  Rng rng(101);
  for (double& e : map.v) e = rng.uniform(0.0, 1.0);
  const HeatMap out = upsample(map, 3, 3);
  for (size_t i = 0; i < map.v.size(); ++i)
    CHECK(out.v[i] == doctest::Approx(map.v[i]).epsilon(1e-15));
}

TEST_CASE("upsample 2x2 -> 3x3 centre is the corner mean") {
  HeatMap map(2, 2);
  map.v = {0.0, 1.0, 0.4, 0.6};
  const HeatMap out = upsample(map, 3, 3);
  CHECK(out.at(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.at(0, 0) == 0.0);
  CHECK(out.at(0, 2) == 1.0);
  CHECK(out.at(2, 0) == 0.4);
  CHECK(out.at(2, 2) == 0.6);
}

TEST_CASE("upsample preserves monotonicity along an axis") {
  HeatMap map(4, 1);
  map.v = {0.0, 0.2, 0.7, 1.0};
  const HeatMap out = upsample(map, 11, 1);
  for (int x = 1; x < 11; ++x) CHECK(out.at(0, x) >= out.at(0, x - 1));
}

TEST_CASE("upsample rejects shrinking and empty targets") {
  HeatMap map(3, 3, 0.5);
  CHECK_THROWS_AS(upsample(map, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(upsample(map, 0, 3), std::invalid_argument);
}

TEST_CASE("render_pgm pixel values and header") {
  HeatMap one(1, 1);
  one.v = {1.0};
  const std::string hi = render_pgm(one);
  CHECK(hi == std::string("P5\n1 1\n255\n") + '\xff');

  one.v = {0.0};
  const std::string lo = render_pgm(one);
  CHECK(lo.back() == '\0');

  HeatMap wide(3, 2, 0.5);
  const std::string out = render_pgm(wide);
  CHECK(out.rfind("P5\n3 2\n255\n", 0) == 0);
  CHECK(out.size() == 11 + 6);
}

TEST_CASE("render then parse round-trips within 1/255") {
  HeatMap map(7, 5);
  Rng rng(102);
  for (double& e : map.v) e = rng.uniform(0.0, 1.0);
  const HeatMap back = parse_pgm(render_pgm(map));
  REQUIRE(back.width == 7);
  REQUIRE(back.height == 5);
  for (size_t i = 0; i < map.v.size(); ++i)
    CHECK(std::fabs(back.v[i] - map.v[i]) <= 1.0 / 255.0);
}

TEST_CASE("render_pgm requires a normalized map") {
  HeatMap map(2, 2, 1.5);
  CHECK_THROWS_AS(render_pgm(map), std::invalid_argument);
}
