#include "aeen/attributes.hpp"

#include <cmath>

#include "aeen/rng.hpp"

namespace aeen {

void AttributeMatrix::validate() const {
  require(rows.rows >= 1, "AttributeMatrix: no classes");
  require(rows.cols >= 1, "AttributeMatrix: attr_dim must be >= 1");
  require(rows.v.size() == static_cast<size_t>(rows.rows) * rows.cols,
          "AttributeMatrix: storage does not match shape");
  require(all_finite(rows.v), "AttributeMatrix: non-finite entry");
}

std::vector<double> outer_vec(std::span<const double> x) {
  require(!x.empty(), "outer_vec: empty input vector");
  require(all_finite(x), "outer_vec: non-finite entry");
  const size_t n = x.size();
  std::vector<double> out(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) out[i * n + j] = x[i] * x[j];
  return out;
}

ProjectionMatrix build_grp(int in_dim, int out_dim, uint64_t seed,
                           bool normalize_rows) {
  require(in_dim >= 1, "build_grp: in_dim must be >= 1");
  require(out_dim >= 1, "build_grp: out_dim must be >= 1");
  ProjectionMatrix p{Mat(out_dim, in_dim)};
  Rng rng(seed);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(out_dim));
  for (double& e : p.m.v) e = sigma * rng.normal();
  if (normalize_rows) {
    for (int r = 0; r < out_dim; ++r) {
      auto row = p.m.row(r);
      double norm2 = 0.0;
      for (double e : row) norm2 += e * e;
      if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& e : row) e *= inv;
      }
    }
  }
  return p;
}

int reduced_dim(double gamma, int attr_dim) {
  require(std::isfinite(gamma) && gamma > 0.0, "reduced_dim: gamma must be > 0");
  require(attr_dim >= 1, "reduced_dim: attr_dim must be >= 1");
  const long long m = std::llround(gamma * attr_dim);
  require(m >= 1, "reduced_dim: round(gamma * attr_dim) must be >= 1");
  return static_cast<int>(m);
}

AugmentedAttributeMatrix augment_attributes(const AttributeMatrix& a,
                                            const HighOrderConfig& cfg) {
  a.validate();
  const int n = a.attr_dim();
  const int m = reduced_dim(cfg.gamma, n);
  const ProjectionMatrix proj =
      build_grp(n * n, m, cfg.seed, cfg.normalize_rows);

  AugmentedAttributeMatrix out;
  out.high_order_dim = m;
  out.first_order_dim = n;
  out.rows = Mat(a.num_classes(), m + n);
  for (int y = 0; y < a.num_classes(); ++y) {
    const std::vector<double> ov = outer_vec(a.rows.row(y));
    for (int r = 0; r < m; ++r) {
      double acc = 0.0;
      const auto prow = proj.m.row(r);
      for (size_t j = 0; j < ov.size(); ++j) acc += prow[j] * ov[j];
      out.rows.at(y, r) = acc;
    }
    for (int j = 0; j < n; ++j) out.rows.at(y, m + j) = a.rows.at(y, j);
  }
  return out;
}

}  // namespace aeen
