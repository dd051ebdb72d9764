#pragma once

#include <string>
#include <vector>

namespace aeen {

// Per-sample class scores over all (seen + unseen) classes.
struct ScoredSample {
  std::vector<double> scores;
  int true_label = 0;
  bool from_seen = false;
};

// H = 2*tr*te / (tr + te); zero when both are zero.
double harmonic(double tr, double te);

// Top-1 accuracy averaged over classes rather than samples. Classes from
// class_set with no samples are excluded with a warning on stderr.
double per_class_accuracy(const std::vector<int>& predictions,
                          const std::vector<int>& truths,
                          const std::vector<int>& class_set);

struct GzslPoint {
  double tr = 0.0;  // per-class accuracy over seen-origin samples
  double te = 0.0;  // per-class accuracy over unseen-origin samples
  double h = 0.0;
};

// Predicts every sample by argmax over all classes after subtracting offset
// from the seen-class scores.
GzslPoint eval_at_offset(const std::vector<ScoredSample>& samples,
                         const std::vector<int>& seen,
                         const std::vector<int>& unseen, double offset);

// Flip margins (best seen score minus best unseen score) per sample,
// deduplicated and sorted, plus midpoints between neighbours and one
// sentinel on each side. Sweeping these visits every reachable (tr, te).
std::vector<double> candidate_offsets(const std::vector<ScoredSample>& samples,
                                      const std::vector<int>& seen,
                                      const std::vector<int>& unseen);

struct CalibrationCurve {
  std::vector<double> offsets;  // ascending
  std::vector<double> tr_acc, te_acc, h;

  size_t size() const { return offsets.size(); }
};

CalibrationCurve sweep(const std::vector<ScoredSample>& samples,
                       const std::vector<int>& seen,
                       const std::vector<int>& unseen);

enum class RectifyCriterion { kMaxHarmonic, kEqualize };

struct RectifyResult {
  double offset = 0.0;
  double tr = 0.0, te = 0.0, h = 0.0;
  RectifyCriterion criterion = RectifyCriterion::kMaxHarmonic;
};

// kMaxHarmonic maximizes H (ties -> smallest offset); kEqualize minimizes
// |tr - te| (ties -> larger H, then smallest offset).
RectifyResult select_offset(const CalibrationCurve& curve,
                            RectifyCriterion criterion);

std::string curve_to_csv(const CalibrationCurve& curve);

}  // namespace aeen
