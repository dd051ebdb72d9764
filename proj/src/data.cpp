#include "aeen/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "aeen/rng.hpp"
#include "io_util.hpp"

namespace aeen {

using nlohmann::json;

void SplitSpec::validate(int num_classes) const {
  std::vector<int8_t> mark(static_cast<size_t>(num_classes), 0);
  auto check_range = [&](int y, const char* set) {
    if (y < 0 || y >= num_classes)
      throw std::invalid_argument("split: " + std::string(set) + " class " +
                                  std::to_string(y) + " out of range");
  };
  for (int y : seen) {
    check_range(y, "seen");
    if (mark[y])
      throw std::invalid_argument("split: duplicate seen class " +
                                  std::to_string(y));
    mark[y] = 1;
  }
  for (int y : unseen) {
    check_range(y, "unseen");
    if (mark[y] == 1)
      throw std::invalid_argument("split: class " + std::to_string(y) +
                                  " appears in both seen and unseen");
    if (mark[y] == 2)
      throw std::invalid_argument("split: duplicate unseen class " +
                                  std::to_string(y));
    mark[y] = 2;
  }
  for (int y : val) {
    check_range(y, "val");
    if (mark[y] != 1)
      throw std::invalid_argument("split: validation class " +
                                  std::to_string(y) +
                                  " is not a seen class");
  }
}

std::vector<int> SplitSpec::train_classes() const {
  std::vector<int> out;
  for (int y : seen)
    if (std::find(val.begin(), val.end(), y) == val.end()) out.push_back(y);
  return out;
}

void Dataset::validate() const {
  attributes.validate();
  require(features.size() == labels.size(),
          "dataset: features/labels size mismatch");
  for (size_t i = 0; i < features.size(); ++i) {
    features[i].validate("dataset feature map");
    require(features[i].channels == features.front().channels &&
                features[i].spatial == features.front().spatial,
            "dataset: non-uniform feature map shapes");
    require(labels[i] >= 0 && labels[i] < num_classes(),
            "dataset: label out of range at sample " + std::to_string(i));
  }
  split.validate(num_classes());
}

namespace {
constexpr char kFeatureMagic[4] = {'A', 'E', 'F', 'M'};
constexpr uint32_t kFeatureVersion = 1;
}  // namespace

void write_feature_maps(const std::string& path,
                        const std::vector<FeatureMap>& maps) {
  require(!maps.empty(), "write_feature_maps: no samples");
  const int k = maps.front().channels, h = maps.front().spatial;
  for (const FeatureMap& m : maps) {
    m.validate("write_feature_maps");
    require(m.channels == k && m.spatial == h,
            "write_feature_maps: non-uniform shapes");
  }
  std::string out;
  out.reserve(16 + maps.size() * maps.front().v.size() * 4);
  out.append(kFeatureMagic, 4);
  detail::append_u32(out, kFeatureVersion);
  detail::append_u32(out, static_cast<uint32_t>(maps.size()));
  detail::append_u32(out, static_cast<uint32_t>(k));
  detail::append_u32(out, static_cast<uint32_t>(h));
  for (const FeatureMap& m : maps)
    for (double e : m.v) detail::append_f32(out, static_cast<float>(e));
  detail::write_file(path, out);
}

std::vector<FeatureMap> read_feature_maps(const std::string& path) {
  const std::string data = detail::read_file(path);
  detail::ByteReader r(data, path);
  r.magic(kFeatureMagic);
  const uint32_t version = r.u32();
  if (version != kFeatureVersion)
    throw VersionError(path + ": unsupported version " +
                       std::to_string(version));
  const uint32_t n = r.u32(), k = r.u32(), h = r.u32();
  if (n == 0 || k == 0 || h == 0)
    throw ParseError(path + ": zero dimension in header");
  const uint64_t per_sample = static_cast<uint64_t>(k) * h * h;
  if (per_sample > (1ULL << 31))
    throw ParseError(path + ": implausibly large sample shape");
  if (r.remaining() != 4 * n * per_sample)
    throw FileSizeError(path + ": payload is " + std::to_string(r.remaining()) +
                        " bytes, expected " + std::to_string(4 * n * per_sample));
  std::vector<FeatureMap> maps;
  maps.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    FeatureMap m(static_cast<int>(k), static_cast<int>(h));
    for (double& e : m.v) e = static_cast<double>(r.f32());
    maps.push_back(std::move(m));
  }
  r.expect_exhausted();
  return maps;
}

namespace {

bool parse_double_field(const std::string& field, double* out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  if (begin == end) return false;
  const auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

AttributeMatrix load_attributes_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first_data_line = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line, ',');
    std::vector<double> row(fields.size());
    bool ok = true;
    for (size_t i = 0; i < fields.size(); ++i)
      ok = ok && parse_double_field(fields[i], &row[i]);
    if (!ok) {
      if (first_data_line) {  // header line
        first_data_line = false;
        continue;
      }
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": non-numeric field");
    }
    first_data_line = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(rows.front().size()) +
                       " fields, found " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no attribute rows");
  AttributeMatrix a;
  a.rows = Mat(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      a.rows.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  a.validate();
  return a;
}

void write_attributes_csv(const std::string& path, const AttributeMatrix& a) {
  a.validate();
  std::string out;
  char buf[64];
  for (int r = 0; r < a.num_classes(); ++r) {
    for (int c = 0; c < a.attr_dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", a.rows.at(r, c));
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  detail::write_file(path, out);
}

std::vector<int> load_labels_csv(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  std::vector<int> labels;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected an integer label");
    labels.push_back(value);
  }
  if (labels.empty()) throw ParseError(path + ": no labels");
  return labels;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::string out;
  for (int y : labels) out += std::to_string(y) + "\n";
  detail::write_file(path, out);
}

namespace {

std::vector<int> json_int_array(const json& j, const std::string& key,
                                const std::string& path) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ParseError(path + ": missing array \"" + key + "\"");
  std::vector<int> out;
  for (const auto& e : j.at(key)) {
    if (!e.is_number_integer())
      throw ParseError(path + ": \"" + key + "\" holds a non-integer");
    out.push_back(e.get<int>());
  }
  return out;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

SplitSpec load_split(const std::string& path) {
  const json j = parse_json_file(path);
  SplitSpec s;
  s.seen = json_int_array(j, "seen", path);
  s.unseen = json_int_array(j, "unseen", path);
  s.val = json_int_array(j, "val", path);
  int max_class = -1;
  for (int y : s.seen) max_class = std::max(max_class, y);
  for (int y : s.unseen) max_class = std::max(max_class, y);
  s.validate(max_class + 1);
  return s;
}

void write_split(const std::string& path, const SplitSpec& split) {
  const json j{{"seen", split.seen}, {"unseen", split.unseen}, {"val", split.val}};
  detail::write_file(path, j.dump(2) + "\n");
}

void SyntheticSpec::validate() const {
  require(num_classes >= 1, "SyntheticSpec: num_classes must be >= 1");
  require(samples_per_class >= 1, "SyntheticSpec: samples_per_class must be >= 1");
  require(channels >= 1, "SyntheticSpec: channels must be >= 1");
  require(spatial >= 1, "SyntheticSpec: spatial must be >= 1");
  require(attr_dim >= 1, "SyntheticSpec: attr_dim must be >= 1");
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0,
          "SyntheticSpec: noise_sigma must be >= 0");
  require(std::isfinite(signal_gain) && signal_gain > 0.0,
          "SyntheticSpec: signal_gain must be > 0");
  require(unseen_classes >= 0 && unseen_classes < num_classes,
          "SyntheticSpec: unseen_classes must leave at least one seen class");
  require(val_classes >= 0 &&
              val_classes < num_classes - unseen_classes,
          "SyntheticSpec: val_classes must leave at least one training class");
  if (attributes) {
    require(attributes->rows == num_classes && attributes->cols == attr_dim,
            "SyntheticSpec: attributes shape mismatch");
    require(all_finite(attributes->v), "SyntheticSpec: non-finite attribute");
  }
  if (hot_spots) {
    require(static_cast<int>(hot_spots->size()) == num_classes,
            "SyntheticSpec: hot_spots class count mismatch");
    for (const auto& per_class : *hot_spots) {
      require(static_cast<int>(per_class.size()) == attr_dim,
              "SyntheticSpec: hot_spots attr count mismatch");
      for (const auto& [r, c] : per_class)
        require(r >= 0 && r < spatial && c >= 0 && c < spatial,
                "SyntheticSpec: hot spot outside the spatial grid");
    }
  }
}

std::pair<Dataset, GroundTruth> gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int nc = spec.num_classes, na = spec.attr_dim;
  const int k = spec.channels, h = spec.spatial;

  GroundTruth truth;
  if (spec.attributes) {
    truth.attributes = *spec.attributes;
  } else {
    // Signature-style rows: a few strong attributes per class over a weak
    // positive floor, normalized to unit length. Strictly positive entries
    // keep every (class, attribute) pair planted; unit rows keep
    // inner-product scoring free of per-class norm bias.
    truth.attributes = Mat(nc, na);
    for (int y = 0; y < nc; ++y) {
      auto row = truth.attributes.row(y);
      double norm2 = 0.0;
      for (double& e : row) {
        e = rng.uniform() < 0.4 ? rng.uniform(0.5, 1.0) : rng.uniform(0.02, 0.15);
        norm2 += e * e;
      }
      for (double& e : row) e /= std::sqrt(norm2);
    }
  }

  if (spec.hot_spots) {
    truth.hot_spots = *spec.hot_spots;
  } else {
    // Auto-placed spots keep a margin of 4 cells when the grid allows, so
    // every spot is covered by a full grid of 5x5 stride-1 windows and the
    // pooled mass does not depend on the spot position.
    const int margin = h >= 9 ? 4 : 0;
    truth.hot_spots.resize(static_cast<size_t>(nc));
    for (int y = 0; y < nc; ++y) {
      truth.hot_spots[y].resize(static_cast<size_t>(na));
      for (int c = 0; c < na; ++c) {
        const int r = rng.uniform_int(margin, h - 1 - margin);
        const int col = rng.uniform_int(margin, h - 1 - margin);
        truth.hot_spots[y][c] = {r, col};
      }
    }
  }

  Dataset ds;
  ds.attributes.rows = truth.attributes;
  ds.features.reserve(static_cast<size_t>(nc) * spec.samples_per_class);
  for (int y = 0; y < nc; ++y) {
    for (int s = 0; s < spec.samples_per_class; ++s) {
      FeatureMap fm(k, h, 0.0);
      for (int c = 0; c < na; ++c) {
        const double a = truth.attributes.at(y, c);
        if (a <= 0.0) continue;
        const auto& [r, col] = truth.hot_spots[y][c];
        fm.at(c % k, r, col) += spec.signal_gain * a;
      }
      if (spec.noise_sigma > 0.0)
        for (double& e : fm.v) e += spec.noise_sigma * rng.normal();
      ds.features.push_back(std::move(fm));
      ds.labels.push_back(y);
    }
  }

  const int num_seen = nc - spec.unseen_classes;
  for (int y = 0; y < num_seen; ++y) ds.split.seen.push_back(y);
  for (int y = num_seen; y < nc; ++y) ds.split.unseen.push_back(y);
  for (int y = num_seen - spec.val_classes; y < num_seen; ++y)
    ds.split.val.push_back(y);
  ds.validate();
  return {std::move(ds), std::move(truth)};
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  const json j = parse_json_file(path);
  SyntheticSpec spec;
  auto get_int = [&](const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
  };
  spec.num_classes = get_int("num_classes", spec.num_classes);
  spec.samples_per_class = get_int("samples_per_class", spec.samples_per_class);
  spec.channels = get_int("channels", spec.channels);
  spec.spatial = get_int("spatial", spec.spatial);
  spec.attr_dim = get_int("attr_dim", spec.attr_dim);
  spec.unseen_classes = get_int("unseen_classes", spec.unseen_classes);
  spec.val_classes = get_int("val_classes", spec.val_classes);
  if (j.contains("noise_sigma")) spec.noise_sigma = j.at("noise_sigma").get<double>();
  if (j.contains("signal_gain")) spec.signal_gain = j.at("signal_gain").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
  if (j.contains("attributes")) {
    const auto& rows = j.at("attributes");
    if (!rows.is_array() || rows.empty())
      throw ParseError(path + ": \"attributes\" must be a non-empty array");
    Mat m(static_cast<int>(rows.size()),
          static_cast<int>(rows.front().size()));
    for (int r = 0; r < m.rows; ++r) {
      const auto& row = rows.at(static_cast<size_t>(r));
      if (!row.is_array() || static_cast<int>(row.size()) != m.cols)
        throw ParseError(path + ": ragged \"attributes\" array");
      for (int c = 0; c < m.cols; ++c)
        m.at(r, c) = row.at(static_cast<size_t>(c)).get<double>();
    }
    spec.attributes = std::move(m);
  }
  if (j.contains("hot_spots")) {
    std::vector<std::vector<std::array<int, 2>>> spots;
    for (const auto& per_class : j.at("hot_spots")) {
      std::vector<std::array<int, 2>> row;
      for (const auto& rc : per_class) {
        if (!rc.is_array() || rc.size() != 2)
          throw ParseError(path + ": hot spot entries must be [row, col]");
        row.push_back({rc.at(0).get<int>(), rc.at(1).get<int>()});
      }
      spots.push_back(std::move(row));
    }
    spec.hot_spots = std::move(spots);
  }
  spec.validate();
  return spec;
}

void write_ground_truth(const std::string& path, const GroundTruth& truth) {
  json spots = json::array();
  for (const auto& per_class : truth.hot_spots) {
    json row = json::array();
    for (const auto& [r, c] : per_class) row.push_back(json::array({r, c}));
    spots.push_back(std::move(row));
  }
  json attrs = json::array();
  for (int r = 0; r < truth.attributes.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < truth.attributes.cols; ++c)
      row.push_back(truth.attributes.at(r, c));
    attrs.push_back(std::move(row));
  }
  const json j{{"hot_spots", spots}, {"attributes", attrs}};
  detail::write_file(path, j.dump(2) + "\n");
}

GroundTruth load_ground_truth(const std::string& path) {
  const json j = parse_json_file(path);
  GroundTruth truth;
  if (!j.contains("hot_spots") || !j.contains("attributes"))
    throw ParseError(path + ": missing hot_spots or attributes");
  for (const auto& per_class : j.at("hot_spots")) {
    std::vector<std::array<int, 2>> row;
    for (const auto& rc : per_class)
      row.push_back({rc.at(0).get<int>(), rc.at(1).get<int>()});
    truth.hot_spots.push_back(std::move(row));
  }
  const auto& rows = j.at("attributes");
  if (!rows.is_array() || rows.empty())
    throw ParseError(path + ": empty attributes");
  truth.attributes =
      Mat(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < truth.attributes.rows; ++r)
    for (int c = 0; c < truth.attributes.cols; ++c)
      truth.attributes.at(r, c) =
          rows.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
  return truth;
}

Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.features = read_feature_maps((fs::path(dir) / kFeaturesFile).string());
  ds.labels = load_labels_csv((fs::path(dir) / kLabelsFile).string());
  ds.attributes = load_attributes_csv((fs::path(dir) / kAttributesFile).string());
  ds.split = load_split((fs::path(dir) / kSplitFile).string());
  ds.validate();
  return ds;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
  namespace fs = std::filesystem;
  ds.validate();
  fs::create_directories(dir);
  write_feature_maps((fs::path(dir) / kFeaturesFile).string(), ds.features);
  write_labels_csv((fs::path(dir) / kLabelsFile).string(), ds.labels);
  write_attributes_csv((fs::path(dir) / kAttributesFile).string(), ds.attributes);
  write_split((fs::path(dir) / kSplitFile).string(), ds.split);
}

}  // namespace aeen
