#pragma once

#include <cstdint>
#include <string>

#include "aeen/network.hpp"

namespace aeen {

// How the class matrix in a checkpoint was built; enough to recompute the
// augmentation for a fresh attribute file.
struct CheckpointMeta {
  bool use_hoa = false;
  double gamma = 1.0;
  uint64_t hoa_seed = 0;
  bool grp_unit_rows = false;
  int attr_dim = 0;  // first-order dimension of the class matrix
};

struct Checkpoint {
  NetworkParams params;
  CheckpointMeta meta;
};

// Binary container: magic "AECP", little-endian fields, f64 tensors.
void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aeen
