#include "aeen/gzsl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <unordered_map>

#include "aeen/mat.hpp"

namespace aeen {

double harmonic(double tr, double te) {
  require(tr >= 0.0 && te >= 0.0, "harmonic: inputs must be >= 0");
  const double sum = tr + te;
  if (sum == 0.0) return 0.0;
  return 2.0 * tr * te / sum;
}

double per_class_accuracy(const std::vector<int>& predictions,
                          const std::vector<int>& truths,
                          const std::vector<int>& class_set) {
  require(predictions.size() == truths.size(),
          "per_class_accuracy: predictions/truths size mismatch");
  require(!class_set.empty(), "per_class_accuracy: empty class set");

  std::unordered_map<int, std::pair<long, long>> counts;  // class -> (correct, total)
  for (int y : class_set) counts.emplace(y, std::make_pair(0L, 0L));
  for (size_t i = 0; i < truths.size(); ++i) {
    auto it = counts.find(truths[i]);
    if (it == counts.end()) continue;
    it->second.second += 1;
    if (predictions[i] == truths[i]) it->second.first += 1;
  }

  double acc = 0.0;
  int used = 0;
  for (int y : class_set) {
    const auto& [correct, total] = counts.at(y);
    if (total == 0) {
      std::cerr << "warning: class " << y
                << " has no samples and is excluded from per-class accuracy\n";
      continue;
    }
    acc += static_cast<double>(correct) / static_cast<double>(total);
    ++used;
  }
  require(used > 0, "per_class_accuracy: no class in class_set has samples");
  return acc / static_cast<double>(used);
}

namespace {

struct ReducedSample {
  double seen_best = 0.0, unseen_best = 0.0;
  int seen_class = -1, unseen_class = -1;
  int true_label = 0;
  bool from_seen = false;
};

void check_sets(size_t num_scores, const std::vector<int>& seen,
                const std::vector<int>& unseen) {
  require(!seen.empty() && !unseen.empty(),
          "gzsl: seen and unseen sets must be non-empty");
  std::vector<int8_t> mark(num_scores, 0);
  for (int y : seen) {
    require(y >= 0 && y < static_cast<int>(num_scores),
            "gzsl: seen class " + std::to_string(y) + " out of range");
    require(mark[y] == 0, "gzsl: duplicate seen class " + std::to_string(y));
    mark[y] = 1;
  }
  for (int y : unseen) {
    require(y >= 0 && y < static_cast<int>(num_scores),
            "gzsl: unseen class " + std::to_string(y) + " out of range");
    require(mark[y] != 1,
            "gzsl: class " + std::to_string(y) + " is in both seen and unseen");
    require(mark[y] == 0, "gzsl: duplicate unseen class " + std::to_string(y));
    mark[y] = 2;
  }
  for (size_t y = 0; y < num_scores; ++y)
    require(mark[y] != 0, "gzsl: class " + std::to_string(y) +
                              " is in neither seen nor unseen");
}

std::vector<ReducedSample> reduce(const std::vector<ScoredSample>& samples,
                                  const std::vector<int>& seen,
                                  const std::vector<int>& unseen) {
  require(!samples.empty(), "gzsl: no samples");
  check_sets(samples.front().scores.size(), seen, unseen);
  std::vector<ReducedSample> out;
  out.reserve(samples.size());
  for (const ScoredSample& s : samples) {
    require(s.scores.size() == samples.front().scores.size(),
            "gzsl: inconsistent score vector length");
    require(all_finite(s.scores), "gzsl: non-finite score");
    require(s.true_label >= 0 &&
                s.true_label < static_cast<int>(s.scores.size()),
            "gzsl: true_label out of range");
    ReducedSample r;
    r.true_label = s.true_label;
    r.from_seen = s.from_seen;
    r.seen_best = -std::numeric_limits<double>::infinity();
    r.unseen_best = -std::numeric_limits<double>::infinity();
    for (int y : seen) {
      if (s.scores[y] > r.seen_best ||
          (s.scores[y] == r.seen_best && y < r.seen_class)) {
        r.seen_best = s.scores[y];
        r.seen_class = y;
      }
    }
    for (int y : unseen) {
      if (s.scores[y] > r.unseen_best ||
          (s.scores[y] == r.unseen_best && y < r.unseen_class)) {
        r.unseen_best = s.scores[y];
        r.unseen_class = y;
      }
    }
    out.push_back(r);
  }
  return out;
}

// Prediction after subtracting offset from seen scores; equal adjusted
// scores go to the lower class index, matching a plain argmax.
int predict_reduced(const ReducedSample& r, double offset) {
  const double adjusted = r.seen_best - offset;
  if (adjusted > r.unseen_best) return r.seen_class;
  if (adjusted < r.unseen_best) return r.unseen_class;
  return std::min(r.seen_class, r.unseen_class);
}

GzslPoint eval_reduced(const std::vector<ReducedSample>& reduced,
                       double offset) {
  std::vector<int> pred_seen, truth_seen, pred_unseen, truth_unseen;
  std::vector<int> classes_seen, classes_unseen;
  for (const ReducedSample& r : reduced) {
    const int pred = predict_reduced(r, offset);
    if (r.from_seen) {
      pred_seen.push_back(pred);
      truth_seen.push_back(r.true_label);
    } else {
      pred_unseen.push_back(pred);
      truth_unseen.push_back(r.true_label);
    }
  }
  auto present_classes = [](const std::vector<int>& truths) {
    std::vector<int> cs(truths);
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    return cs;
  };
  GzslPoint pt;
  pt.tr = truth_seen.empty() ? 0.0
                             : per_class_accuracy(pred_seen, truth_seen,
                                                  present_classes(truth_seen));
  pt.te = truth_unseen.empty()
              ? 0.0
              : per_class_accuracy(pred_unseen, truth_unseen,
                                   present_classes(truth_unseen));
  pt.h = harmonic(pt.tr, pt.te);
  return pt;
}

}  // namespace

GzslPoint eval_at_offset(const std::vector<ScoredSample>& samples,
                         const std::vector<int>& seen,
                         const std::vector<int>& unseen, double offset) {
  require(!std::isnan(offset), "eval_at_offset: offset is NaN");
  return eval_reduced(reduce(samples, seen, unseen), offset);
}

std::vector<double> candidate_offsets(const std::vector<ScoredSample>& samples,
                                      const std::vector<int>& seen,
                                      const std::vector<int>& unseen) {
  const std::vector<ReducedSample> reduced = reduce(samples, seen, unseen);
  std::vector<double> margins;
  margins.reserve(reduced.size());
  for (const ReducedSample& r : reduced)
    margins.push_back(r.seen_best - r.unseen_best);
  std::sort(margins.begin(), margins.end());
  margins.erase(std::unique(margins.begin(), margins.end()), margins.end());

  std::vector<double> offsets;
  offsets.reserve(2 * margins.size() + 1);
  offsets.push_back(margins.front() - 1.0);
  for (size_t i = 0; i < margins.size(); ++i) {
    offsets.push_back(margins[i]);
    if (i + 1 < margins.size())
      offsets.push_back(0.5 * (margins[i] + margins[i + 1]));
  }
  offsets.push_back(margins.back() + 1.0);
  return offsets;
}

CalibrationCurve sweep(const std::vector<ScoredSample>& samples,
                       const std::vector<int>& seen,
                       const std::vector<int>& unseen) {
  const std::vector<ReducedSample> reduced = reduce(samples, seen, unseen);
  const std::vector<double> offsets = candidate_offsets(samples, seen, unseen);
  CalibrationCurve curve;
  curve.offsets = offsets;
  curve.tr_acc.reserve(offsets.size());
  curve.te_acc.reserve(offsets.size());
  curve.h.reserve(offsets.size());
  for (double off : offsets) {
    const GzslPoint pt = eval_reduced(reduced, off);
    curve.tr_acc.push_back(pt.tr);
    curve.te_acc.push_back(pt.te);
    curve.h.push_back(pt.h);
  }
  return curve;
}

RectifyResult select_offset(const CalibrationCurve& curve,
                            RectifyCriterion criterion) {
  require(curve.size() > 0, "select_offset: empty curve");
  require(curve.tr_acc.size() == curve.size() &&
              curve.te_acc.size() == curve.size() &&
              curve.h.size() == curve.size(),
          "select_offset: ragged curve");
  size_t best = 0;
  for (size_t i = 1; i < curve.size(); ++i) {
    if (criterion == RectifyCriterion::kMaxHarmonic) {
      if (curve.h[i] > curve.h[best]) best = i;
    } else {
      const double di = std::fabs(curve.tr_acc[i] - curve.te_acc[i]);
      const double db = std::fabs(curve.tr_acc[best] - curve.te_acc[best]);
      if (di < db || (di == db && curve.h[i] > curve.h[best])) best = i;
    }
  }
  return RectifyResult{curve.offsets[best], curve.tr_acc[best],
                       curve.te_acc[best], curve.h[best], criterion};
}

std::string curve_to_csv(const CalibrationCurve& curve) {
  std::string out = "offset,tr,te,H\n";
  char buf[160];
  for (size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n",
                  curve.offsets[i], curve.tr_acc[i], curve.te_acc[i],
                  curve.h[i]);
    out += buf;
  }
  return out;
}

}  // namespace aeen
