#include "aeen/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aeen {

namespace {
constexpr double kRestartSlack = 1e-9;
}

void SgdConfig::validate() const {
  require(std::isfinite(lr_max) && lr_max > 0.0, "SgdConfig: lr_max must be > 0");
  require(momentum >= 0.0 && momentum < 1.0,
          "SgdConfig: momentum must be in [0, 1)");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0,
          "SgdConfig: weight_decay must be >= 0");
  require(batch_size >= 1, "SgdConfig: batch_size must be >= 1");
}

void CycleSchedule::validate() const {
  require(std::isfinite(cycle_len) && cycle_len > 0.0,
          "CycleSchedule: cycle_len must be > 0");
  require(std::isfinite(cycle_mul) && cycle_mul >= 1.0,
          "CycleSchedule: cycle_mul must be >= 1");
  require(cycle_pos >= 0.0 && cycle_pos <= cycle_len,
          "CycleSchedule: cycle_pos out of range");
  require(total_epochs >= 0.0, "CycleSchedule: total_epochs must be >= 0");
}

double lr_at(const CycleSchedule& sched, const SgdConfig& cfg) {
  sched.validate();
  cfg.validate();
  switch (sched.mode) {
    case LrMode::kConstant:
      return cfg.lr_max;
    case LrMode::kStep:
      return cfg.lr_max * std::pow(0.1, std::floor(sched.total_epochs / 30.0));
    case LrMode::kCycling:
      break;
  }
  const double phase = sched.cycle_pos / sched.cycle_len;
  return 0.5 * cfg.lr_max * (1.0 + std::cos(std::numbers::pi * phase));
}

void advance(CycleSchedule& sched, double fraction_of_epoch) {
  require(std::isfinite(fraction_of_epoch) && fraction_of_epoch > 0.0,
          "advance: fraction must be > 0");
  sched.total_epochs += fraction_of_epoch;
  sched.cycle_pos += fraction_of_epoch;
  if (sched.cycle_pos >= sched.cycle_len - kRestartSlack) {
    sched.cycle_pos = 0.0;
    sched.cycle_len *= sched.cycle_mul;
  }
}

TrainState init_train_state(NetworkParams params, CycleSchedule schedule) {
  params.validate();
  schedule.validate();
  TrainState st;
  st.velocity = zero_gradients(params);
  st.params = std::move(params);
  st.schedule = schedule;
  return st;
}

namespace {

void update_tensor(std::span<double> param, std::span<double> vel,
                   std::span<const double> grad, double lr,
                   const SgdConfig& cfg) {
  require(param.size() == vel.size() && param.size() == grad.size(),
          "sgd_step: shape mismatch");
  for (size_t i = 0; i < param.size(); ++i) {
    vel[i] = cfg.momentum * vel[i] + grad[i] + cfg.weight_decay * param[i];
    param[i] -= lr * vel[i];
  }
}

}  // namespace

void sgd_step(TrainState& state, const Gradients& grads, double lr,
              const SgdConfig& cfg) {
  cfg.validate();
  require(std::isfinite(lr) && lr >= 0.0, "sgd_step: lr must be >= 0");
  update_tensor(state.params.shared_conv.kernel, state.velocity.conv_kernel,
                grads.conv_kernel, lr, cfg);
  update_tensor(state.params.shared_conv.bias, state.velocity.conv_bias,
                grads.conv_bias, lr, cfg);
  update_tensor(state.params.top_branch.w.v, state.velocity.top_w.v,
                grads.top_w.v, lr, cfg);
  update_tensor(state.params.bottom_branch.w.v, state.velocity.bottom_w.v,
                grads.bottom_w.v, lr, cfg);
}

EpochMetrics train_epoch(const std::vector<FeatureMap>& features,
                         const std::vector<int>& labels,
                         const std::vector<int>& sample_indices,
                         const std::vector<int>& train_classes,
                         TrainState& state, const SgdConfig& cfg,
                         uint64_t master_seed) {
  require(!sample_indices.empty(), "train_epoch: empty dataset");
  require(features.size() == labels.size(),
          "train_epoch: features/labels size mismatch");
  cfg.validate();

  std::vector<int> order = sample_indices;
  const uint64_t epoch_seed = mix_seed(master_seed, static_cast<uint64_t>(state.epoch));
  Rng shuffle_rng(mix_seed(epoch_seed, 0));
  Rng dropout_rng(mix_seed(epoch_seed, 1));
  shuffle_rng.shuffle(order);

  const size_t n = order.size();
  const size_t batch = static_cast<size_t>(cfg.batch_size);
  EpochMetrics metrics;
  metrics.epoch = state.epoch;
  metrics.lr_first_batch = lr_at(state.schedule, cfg);

  double loss_sum = 0.0;
  size_t correct = 0;
  for (size_t start = 0; start < n; start += batch) {
    const size_t end = std::min(n, start + batch);
    Gradients acc = zero_gradients(state.params);
    for (size_t i = start; i < end; ++i) {
      const int s = order[i];
      const ForwardOutput out =
          forward(features[s], state.params, true, &dropout_rng);
      loss_sum += loss(out, labels[s], train_classes);
      accumulate(acc, backward(out, labels[s], state.params, train_classes));
      if (predict(out.scores_avg, train_classes) == labels[s]) ++correct;
    }
    scale(acc, 1.0 / static_cast<double>(end - start));
    const double lr = lr_at(state.schedule, cfg);
    sgd_step(state, acc, lr, cfg);
    advance(state.schedule,
            static_cast<double>(end - start) / static_cast<double>(n));
  }

  metrics.mean_loss = loss_sum / static_cast<double>(n);
  metrics.seen_acc = static_cast<double>(correct) / static_cast<double>(n);
  state.epoch += 1;
  return metrics;
}

}  // namespace aeen
