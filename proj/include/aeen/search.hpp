#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace aeen {

struct HyperConfig {
  double lr_max = 0.0;
  double xi = 0.0;
  double gamma = 0.0;
};

// lr_max and xi sample log-uniformly, gamma uniformly.
struct SearchSpace {
  double lr_lo = 1e-4, lr_hi = 1e-2;
  double xi_lo = 1e-3, xi_hi = 0.1;
  double gamma_lo = 0.3, gamma_hi = 4.0;

  void validate() const;
};

struct StagePlan {
  struct Stage {
    int num_configs = 0;
    int epochs = 0;
  };
  std::vector<Stage> stages;

  static StagePlan default_plan();  // 100x1 -> 10x10 -> 1x30
  void validate() const;
  long long total_trial_epochs() const;
};

struct TrialResult {
  int stage = 0;
  int config_index = 0;  // index into the stage-1 sample list, stable across stages
  HyperConfig config;
  double accuracy = 0.0;
  int epochs = 0;
  uint64_t seed = 0;
  std::string error;  // non-empty when the evaluator failed (accuracy forced to 0)
};

// Maps (config, epoch budget, trial seed) to validation accuracy in [0, 1].
using Evaluator = std::function<double(const HyperConfig&, int epochs, uint64_t seed)>;

std::vector<HyperConfig> sample_configs(const SearchSpace& space, int count,
                                        uint64_t seed);

// Evaluates every config (trial seed = mix_seed(master_seed, config_index))
// and returns results sorted by accuracy descending, config index ascending
// on ties. Evaluator exceptions score 0 instead of aborting the stage.
// jobs > 1 runs trials concurrently; the ranking does not depend on it.
std::vector<TrialResult> run_stage(
    const std::vector<std::pair<int, HyperConfig>>& configs, int stage,
    int epochs, const Evaluator& evaluator, uint64_t master_seed, int jobs = 1);

struct SearchResult {
  HyperConfig best;
  TrialResult final_trial;
  std::vector<TrialResult> audit;  // every trial, in execution order
};

// Staged narrowing: stage s keeps the top stages[s+1].num_configs results as
// the next stage's candidates; the last stage's winner is the result.
SearchResult search(const SearchSpace& space, const StagePlan& plan,
                    const Evaluator& evaluator, uint64_t master_seed,
                    int jobs = 1);

std::string trial_to_json(const TrialResult& t);

}  // namespace aeen
