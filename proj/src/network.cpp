#include "aeen/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aeen {

void Conv3x3::validate() const {
  require(channels >= 1, "Conv3x3: channels must be >= 1");
  require(kernel.size() == static_cast<size_t>(channels) * channels * 9,
          "Conv3x3: kernel size does not match channels");
  require(bias.size() == static_cast<size_t>(channels),
          "Conv3x3: bias size does not match channels");
  require(all_finite(kernel) && all_finite(bias), "Conv3x3: non-finite weight");
}

void NetworkParams::validate() const {
  shared_conv.validate();
  require(top_branch.in_channels() == shared_conv.channels &&
              bottom_branch.in_channels() == shared_conv.channels,
          "NetworkParams: branch in_channels mismatch");
  require(top_branch.out_dims() == bottom_branch.out_dims(),
          "NetworkParams: branch out_dims mismatch");
  require(all_finite(top_branch.w.v) && all_finite(bottom_branch.w.v),
          "NetworkParams: non-finite branch weight");
  require(class_matrix.cols == top_branch.out_dims(),
          "NetworkParams: class matrix dim mismatch");
  require(class_matrix.rows >= 1, "NetworkParams: empty class matrix");
  require(all_finite(class_matrix.v), "NetworkParams: non-finite class matrix");
  require(std::isfinite(xi) && xi >= 0.0, "NetworkParams: xi must be >= 0");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0,
          "NetworkParams: dropout_rate must be in [0, 1)");
}

NetworkParams init_params(int channels, Mat class_matrix, double xi,
                          double dropout_rate, uint64_t seed) {
  require(channels >= 1, "init_params: channels must be >= 1");
  require(class_matrix.rows >= 1 && class_matrix.cols >= 1,
          "init_params: empty class matrix");
  const int k = channels;
  const int d = class_matrix.cols;
  NetworkParams p;
  p.shared_conv.channels = k;
  p.shared_conv.kernel.resize(static_cast<size_t>(k) * k * 9);
  p.shared_conv.bias.assign(k, 0.0);
  Rng rng(seed);
  const double conv_sigma = std::sqrt(2.0 / (9.0 * k));
  for (double& e : p.shared_conv.kernel) e = conv_sigma * rng.normal();
  const double head_sigma = std::sqrt(2.0 / k);
  p.top_branch.w = Mat(k, d);
  for (double& e : p.top_branch.w.v) e = head_sigma * rng.normal();
  p.bottom_branch.w = Mat(k, d);
  for (double& e : p.bottom_branch.w.v) e = head_sigma * rng.normal();
  p.xi = xi;
  p.dropout_rate = dropout_rate;
  p.class_matrix = std::move(class_matrix);
  p.validate();
  return p;
}

FeatureMap conv3x3(const FeatureMap& s, const Conv3x3& conv) {
  s.validate("conv3x3 input");
  conv.validate();
  require(conv.channels == s.channels, "conv3x3: channel mismatch");
  const int k = s.channels, h = s.spatial;
  FeatureMap out(k, h);
  for (int o = 0; o < k; ++o) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < h; ++c) {
        double acc = conv.bias[o];
        for (int i = 0; i < k; ++i) {
          for (int dr = 0; dr < 3; ++dr) {
            const int rr = r + dr - 1;
            if (rr < 0 || rr >= h) continue;
            for (int dc = 0; dc < 3; ++dc) {
              const int cc = c + dc - 1;
              if (cc < 0 || cc >= h) continue;
              acc += s.at(i, rr, cc) * conv.kernel[conv.kidx(o, i, dr, dc)];
            }
          }
        }
        out.at(o, r, c) = acc > 0.0 ? acc : 0.0;
      }
    }
  }
  return out;
}

CReluResult c_relu(const FeatureMap& s, double xi, ErasePolarity polarity) {
  s.validate("c_relu input");
  require(std::isfinite(xi) && xi >= 0.0, "c_relu: xi must be >= 0");
  CReluResult res{FeatureMap(s.channels, s.spatial),
                  std::vector<int8_t>(s.v.size(), 1)};
  const size_t plane = s.plane();
  for (int k = 0; k < s.channels; ++k) {
    const size_t base = static_cast<size_t>(k) * plane;
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < plane; ++i) mx = std::max(mx, s.v[base + i]);
    const double delta = xi * mx;
    for (size_t i = 0; i < plane; ++i) {
      const double x = s.v[base + i];
      int8_t theta = x >= delta ? 1 : -1;
      if (polarity == ErasePolarity::kFlipAbove) theta = -theta;
      res.sign_mask[base + i] = theta;
      res.out.v[base + i] = x > 0.0 ? x * theta : 0.0;
    }
  }
  return res;
}

LocalizationMaps localize(const FeatureMap& s, const ConvWeights& w) {
  s.validate("localize input");
  require(w.in_channels() == s.channels, "localize: channel mismatch");
  require(w.out_dims() >= 1, "localize: no output dims");
  const int d = w.out_dims(), h = s.spatial;
  const size_t plane = s.plane();
  LocalizationMaps maps(d, h, 0.0);
  for (int c = 0; c < d; ++c) {
    const size_t out_base = static_cast<size_t>(c) * plane;
    for (int k = 0; k < s.channels; ++k) {
      const double wk = w.w.at(k, c);
      if (wk == 0.0) continue;
      const size_t in_base = static_cast<size_t>(k) * plane;
      for (size_t i = 0; i < plane; ++i)
        maps.v[out_base + i] += wk * s.v[in_base + i];
    }
  }
  return maps;
}

PoolResult max_pool5(const LocalizationMaps& maps) {
  maps.validate("max_pool5 input");
  const int d = maps.channels, h = maps.spatial;
  const int k = std::min(5, h);
  const int p = h - k + 1;
  PoolResult res{LocalizationMaps(d, p),
                 std::vector<int>(static_cast<size_t>(d) * p * p, -1)};
  for (int m = 0; m < d; ++m) {
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int r = i; r < i + k; ++r) {
          for (int c = j; c < j + k; ++c) {
            const double val = maps.at(m, r, c);
            if (val > best) {
              best = val;
              arg = r * h + c;
            }
          }
        }
        res.out.at(m, i, j) = best;
        res.argmax[(static_cast<size_t>(m) * p + i) * p + j] = arg;
      }
    }
  }
  return res;
}

std::vector<double> aggregate(const LocalizationMaps& pooled) {
  pooled.validate("aggregate input");
  const size_t plane = pooled.plane();
  std::vector<double> embed(pooled.channels, 0.0);
  for (int d = 0; d < pooled.channels; ++d) {
    const size_t base = static_cast<size_t>(d) * plane;
    double acc = 0.0;
    for (size_t i = 0; i < plane; ++i) acc += pooled.v[base + i];
    embed[d] = acc / static_cast<double>(plane);
  }
  return embed;
}

std::vector<double> class_scores(std::span<const double> embed,
                                 const Mat& class_matrix) {
  require(static_cast<int>(embed.size()) == class_matrix.cols,
          "class_scores: embedding dim mismatch");
  std::vector<double> scores(class_matrix.rows, 0.0);
  for (int y = 0; y < class_matrix.rows; ++y) {
    const auto row = class_matrix.row(y);
    double acc = 0.0;
    for (size_t d = 0; d < embed.size(); ++d) acc += embed[d] * row[d];
    scores[y] = acc;
  }
  return scores;
}

namespace {

std::vector<double> apply_dropout(const std::vector<double>& embed, double rate,
                                  bool train_mode, Rng* rng,
                                  std::vector<uint8_t>* mask_out) {
  if (!train_mode) {
    mask_out->clear();
    return embed;
  }
  std::vector<double> out(embed.size());
  mask_out->assign(embed.size(), 1);
  const double keep = 1.0 - rate;
  for (size_t i = 0; i < embed.size(); ++i) {
    const bool kept = rate == 0.0 || rng->uniform() >= rate;
    (*mask_out)[i] = kept ? 1 : 0;
    out[i] = kept ? embed[i] / keep : 0.0;  // inverted scaling
  }
  return out;
}

void check_label(int label, const std::vector<int>& seen, int num_classes) {
  require(!seen.empty(), "seen class set is empty");
  for (int y : seen)
    require(y >= 0 && y < num_classes, "seen class index out of range");
  require(std::find(seen.begin(), seen.end(), label) != seen.end(),
          "label is not a member of the seen class set");
}

// d(cross-entropy)/d(scores): softmax over the seen subset minus one-hot.
std::vector<double> score_grad(const std::vector<double>& scores, int label,
                               const std::vector<int>& seen) {
  std::vector<double> d(scores.size(), 0.0);
  double m = -std::numeric_limits<double>::infinity();
  for (int y : seen) m = std::max(m, scores[y]);
  double z = 0.0;
  for (int y : seen) z += std::exp(scores[y] - m);
  for (int y : seen) d[y] = std::exp(scores[y] - m) / z;
  d[label] -= 1.0;
  return d;
}

double branch_ce(const std::vector<double>& scores, int label,
                 const std::vector<int>& seen) {
  double m = -std::numeric_limits<double>::infinity();
  for (int y : seen) m = std::max(m, scores[y]);
  double z = 0.0;
  for (int y : seen) z += std::exp(scores[y] - m);
  return -(scores[label] - m) + std::log(z);
}

}  // namespace

ForwardOutput forward(const FeatureMap& s, const NetworkParams& p,
                      bool train_mode, Rng* rng) {
  p.validate();
  s.validate("forward input");
  require(s.channels == p.channels(), "forward: channel mismatch");
  require(!train_mode || rng != nullptr, "forward: train mode requires an rng");

  ForwardOutput out;
  auto& c = out.cache;
  c.input = s;
  c.conv_out = conv3x3(s, p.shared_conv);
  CReluResult er = c_relu(c.conv_out, p.xi, p.polarity);
  c.erased = std::move(er.out);
  c.sign_mask = std::move(er.sign_mask);
  c.loc_top = localize(c.erased, p.top_branch);
  c.loc_bottom = localize(c.conv_out, p.bottom_branch);
  c.pool_top = max_pool5(c.loc_top);
  c.pool_bottom = max_pool5(c.loc_bottom);
  c.embed_top = aggregate(c.pool_top.out);
  c.embed_bottom = aggregate(c.pool_bottom.out);
  c.train_mode = train_mode;
  c.embed_top_out =
      apply_dropout(c.embed_top, p.dropout_rate, train_mode, rng, &c.drop_top);
  c.embed_bottom_out = apply_dropout(c.embed_bottom, p.dropout_rate, train_mode,
                                     rng, &c.drop_bottom);
  out.scores_top = class_scores(c.embed_top_out, p.class_matrix);
  out.scores_bottom = class_scores(c.embed_bottom_out, p.class_matrix);
  out.scores_avg.resize(out.scores_top.size());
  for (size_t y = 0; y < out.scores_avg.size(); ++y)
    out.scores_avg[y] = 0.5 * (out.scores_top[y] + out.scores_bottom[y]);
  c.valid = true;
  return out;
}

double loss(const ForwardOutput& out, int label,
            const std::vector<int>& seen_classes) {
  check_label(label, seen_classes, static_cast<int>(out.scores_top.size()));
  return branch_ce(out.scores_top, label, seen_classes) +
         branch_ce(out.scores_bottom, label, seen_classes);
}

Gradients zero_gradients(const NetworkParams& p) {
  Gradients g;
  g.conv_kernel.assign(p.shared_conv.kernel.size(), 0.0);
  g.conv_bias.assign(p.shared_conv.bias.size(), 0.0);
  g.top_w = Mat(p.top_branch.w.rows, p.top_branch.w.cols);
  g.bottom_w = Mat(p.bottom_branch.w.rows, p.bottom_branch.w.cols);
  return g;
}

void accumulate(Gradients& acc, const Gradients& g) {
  for (size_t i = 0; i < acc.conv_kernel.size(); ++i)
    acc.conv_kernel[i] += g.conv_kernel[i];
  for (size_t i = 0; i < acc.conv_bias.size(); ++i)
    acc.conv_bias[i] += g.conv_bias[i];
  for (size_t i = 0; i < acc.top_w.v.size(); ++i) acc.top_w.v[i] += g.top_w.v[i];
  for (size_t i = 0; i < acc.bottom_w.v.size(); ++i)
    acc.bottom_w.v[i] += g.bottom_w.v[i];
}

void scale(Gradients& g, double factor) {
  for (double& e : g.conv_kernel) e *= factor;
  for (double& e : g.conv_bias) e *= factor;
  for (double& e : g.top_w.v) e *= factor;
  for (double& e : g.bottom_w.v) e *= factor;
}

Gradients backward(const ForwardOutput& out, int label, const NetworkParams& p,
                   const std::vector<int>& seen_classes) {
  const auto& c = out.cache;
  if (!c.valid) throw std::logic_error("backward: forward cache missing");
  check_label(label, seen_classes, p.num_classes());

  const int k = p.channels(), d = p.dims(), h = c.input.spatial;
  const size_t plane = c.input.plane();
  Gradients g = zero_gradients(p);

  const std::vector<double> ds_top = score_grad(out.scores_top, label, seen_classes);
  const std::vector<double> ds_bottom =
      score_grad(out.scores_bottom, label, seen_classes);

  // through the fixed class matrix
  std::vector<double> de_top(d, 0.0), de_bottom(d, 0.0);
  for (int y : seen_classes) {
    const auto row = p.class_matrix.row(y);
    for (int j = 0; j < d; ++j) {
      de_top[j] += ds_top[y] * row[j];
      de_bottom[j] += ds_bottom[y] * row[j];
    }
  }

  // dropout (identity in eval mode)
  if (c.train_mode && p.dropout_rate > 0.0) {
    const double scale = 1.0 / (1.0 - p.dropout_rate);
    for (int j = 0; j < d; ++j) {
      de_top[j] = c.drop_top[j] ? de_top[j] * scale : 0.0;
      de_bottom[j] = c.drop_bottom[j] ? de_bottom[j] * scale : 0.0;
    }
  }

  // mean aggregation, then pooling argmax routing
  const int pool_side = c.pool_top.out.spatial;
  const double inv_cells = 1.0 / static_cast<double>(pool_side * pool_side);
  LocalizationMaps dloc_top(d, h, 0.0), dloc_bottom(d, h, 0.0);
  for (int m = 0; m < d; ++m) {
    const double gt = de_top[m] * inv_cells;
    const double gb = de_bottom[m] * inv_cells;
    const size_t base = static_cast<size_t>(m) * pool_side * pool_side;
    const size_t map_base = static_cast<size_t>(m) * plane;
    for (int cell = 0; cell < pool_side * pool_side; ++cell) {
      dloc_top.v[map_base + c.pool_top.argmax[base + cell]] += gt;
      dloc_bottom.v[map_base + c.pool_bottom.argmax[base + cell]] += gb;
    }
  }

  // 1x1 stage: weight gradients and gradients into the branch inputs
  FeatureMap dconv(k, h, 0.0);
  for (int ch = 0; ch < k; ++ch) {
    const size_t in_base = static_cast<size_t>(ch) * plane;
    for (int m = 0; m < d; ++m) {
      const size_t map_base = static_cast<size_t>(m) * plane;
      double acc_top = 0.0, acc_bottom = 0.0;
      const double wt = p.top_branch.w.at(ch, m);
      const double wb = p.bottom_branch.w.at(ch, m);
      for (size_t i = 0; i < plane; ++i) {
        const double dt = dloc_top.v[map_base + i];
        const double db = dloc_bottom.v[map_base + i];
        acc_top += c.erased.v[in_base + i] * dt;
        acc_bottom += c.conv_out.v[in_base + i] * db;
        // erasing backward: theta where the input was positive, else blocked
        if (c.conv_out.v[in_base + i] > 0.0)
          dconv.v[in_base + i] += wt * dt * c.sign_mask[in_base + i];
        dconv.v[in_base + i] += wb * db;
      }
      g.top_w.at(ch, m) = acc_top;
      g.bottom_w.at(ch, m) = acc_bottom;
    }
  }

  // shared stage rectification gate, then 3x3 kernel/bias gradients
  for (size_t i = 0; i < dconv.v.size(); ++i)
    if (c.conv_out.v[i] <= 0.0) dconv.v[i] = 0.0;

  for (int o = 0; o < k; ++o) {
    for (int r = 0; r < h; ++r) {
      for (int col = 0; col < h; ++col) {
        const double dz = dconv.at(o, r, col);
        if (dz == 0.0) continue;
        g.conv_bias[o] += dz;
        for (int i = 0; i < k; ++i) {
          for (int dr = 0; dr < 3; ++dr) {
            const int rr = r + dr - 1;
            if (rr < 0 || rr >= h) continue;
            for (int dc = 0; dc < 3; ++dc) {
              const int cc = col + dc - 1;
              if (cc < 0 || cc >= h) continue;
              g.conv_kernel[p.shared_conv.kidx(o, i, dr, dc)] +=
                  c.input.at(i, rr, cc) * dz;
            }
          }
        }
      }
    }
  }
  return g;
}

int predict(std::span<const double> scores, const std::vector<int>& candidates) {
  require(!candidates.empty(), "predict: empty candidate set");
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int y : candidates) {
    require(y >= 0 && y < static_cast<int>(scores.size()),
            "predict: candidate index out of range");
    if (scores[y] > best_score || (scores[y] == best_score && y < best)) {
      best = y;
      best_score = scores[y];
    }
  }
  return best;
}

}  // namespace aeen
