#pragma once

#include <cstdint>
#include <vector>

#include "aeen/mat.hpp"

namespace aeen {

// Per-class semantic vectors, one row per class. Class y maps to rows.row(y).
struct AttributeMatrix {
  Mat rows;

  int num_classes() const { return rows.rows; }
  int attr_dim() const { return rows.cols; }
  void validate() const;
};

struct HighOrderConfig {
  double gamma = 1.0;       // reduced dim = round(gamma * attr_dim)
  uint64_t seed = 0;
  bool normalize_rows = false;  // rescale projection rows to unit length
};

// Random projection, entries i.i.d. normal(0, 1/out_dim).
struct ProjectionMatrix {
  Mat m;  // out_dim x in_dim

  int out_dim() const { return m.rows; }
  int in_dim() const { return m.cols; }
};

// Rows are concat(projected outer product, original vector).
struct AugmentedAttributeMatrix {
  Mat rows;
  int high_order_dim = 0;   // leading block
  int first_order_dim = 0;  // trailing block, equals the source attr_dim

  int num_classes() const { return rows.rows; }
  int aug_dim() const { return rows.cols; }
};

// Row-major vectorization of x * x^T; out[i*n + j] = x[i]*x[j].
std::vector<double> outer_vec(std::span<const double> x);

ProjectionMatrix build_grp(int in_dim, int out_dim, uint64_t seed,
                           bool normalize_rows = false);

int reduced_dim(double gamma, int attr_dim);

AugmentedAttributeMatrix augment_attributes(const AttributeMatrix& a,
                                            const HighOrderConfig& cfg);

}  // namespace aeen
