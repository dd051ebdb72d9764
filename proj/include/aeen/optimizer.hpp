#pragma once

#include <cstdint>
#include <vector>

#include "aeen/network.hpp"

namespace aeen {

struct SgdConfig {
  double lr_max = 0.003;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int batch_size = 64;

  void validate() const;
};

enum class LrMode { kCycling, kConstant, kStep };

// Warm-restart cosine state. cycle_pos accumulates fractional epochs since
// the last restart; cycle_len grows by cycle_mul at every restart.
// total_epochs drives the step baseline (x0.1 every 30 epochs).
struct CycleSchedule {
  LrMode mode = LrMode::kCycling;
  double cycle_len = 10.0;
  double cycle_mul = 2.0;
  double cycle_pos = 0.0;
  double total_epochs = 0.0;

  void validate() const;
};

double lr_at(const CycleSchedule& sched, const SgdConfig& cfg);

// cycle_pos += fraction; on reaching cycle_len the position resets to zero
// and the cycle length is multiplied. A 1e-9 slack absorbs accumulated
// rounding from per-batch fractions so restarts stay on epoch boundaries.
void advance(CycleSchedule& sched, double fraction_of_epoch);

struct TrainState {
  NetworkParams params;
  Gradients velocity;  // mirrors the learnable tensors, starts at zero
  int epoch = 0;
  CycleSchedule schedule;
};

TrainState init_train_state(NetworkParams params, CycleSchedule schedule);

// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
// Touches the shared conv and both branch weights only, never the class
// matrix.
void sgd_step(TrainState& state, const Gradients& grads, double lr,
              const SgdConfig& cfg);

struct EpochMetrics {
  int epoch = 0;
  double lr_first_batch = 0.0;
  double mean_loss = 0.0;
  double seen_acc = 0.0;
};

// One pass over sample_indices in seeded-shuffle order (derived from
// master_seed and the state's epoch counter). The schedule advances by
// batch/N after each step; labels must all belong to train_classes.
EpochMetrics train_epoch(const std::vector<FeatureMap>& features,
                         const std::vector<int>& labels,
                         const std::vector<int>& sample_indices,
                         const std::vector<int>& train_classes,
                         TrainState& state, const SgdConfig& cfg,
                         uint64_t master_seed);

}  // namespace aeen
