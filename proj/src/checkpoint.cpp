#include "aeen/checkpoint.hpp"

#include "aeen/data.hpp"
#include "io_util.hpp"

namespace aeen {

namespace {
constexpr char kMagic[4] = {'A', 'E', 'C', 'P'};
constexpr uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const NetworkParams& params,
                     const CheckpointMeta& meta) {
  params.validate();
  const int k = params.channels(), d = params.dims();
  const int nc = params.num_classes();
  std::string out;
  out.append(kMagic, 4);
  detail::append_u32(out, kVersion);
  detail::append_u32(out, static_cast<uint32_t>(k));
  detail::append_u32(out, static_cast<uint32_t>(d));
  detail::append_u32(out, static_cast<uint32_t>(nc));
  detail::append_u32(out, static_cast<uint32_t>(meta.attr_dim));
  detail::append_u32(out, meta.use_hoa ? 1 : 0);
  detail::append_u32(out, params.polarity == ErasePolarity::kFlipAbove ? 1 : 0);
  detail::append_u32(out, meta.grp_unit_rows ? 1 : 0);
  detail::append_u64(out, meta.hoa_seed);
  detail::append_f64(out, meta.gamma);
  detail::append_f64(out, params.xi);
  detail::append_f64(out, params.dropout_rate);
  for (double e : params.shared_conv.kernel) detail::append_f64(out, e);
  for (double e : params.shared_conv.bias) detail::append_f64(out, e);
  for (double e : params.top_branch.w.v) detail::append_f64(out, e);
  for (double e : params.bottom_branch.w.v) detail::append_f64(out, e);
  for (double e : params.class_matrix.v) detail::append_f64(out, e);
  detail::write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = detail::read_file(path);
  detail::ByteReader r(data, path);
  r.magic(kMagic);
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw VersionError(path + ": unsupported version " + std::to_string(version));
  const uint32_t k = r.u32(), d = r.u32(), nc = r.u32();
  if (k == 0 || d == 0 || nc == 0)
    throw ParseError(path + ": zero dimension in header");

  Checkpoint cp;
  cp.meta.attr_dim = static_cast<int>(r.u32());
  cp.meta.use_hoa = r.u32() != 0;
  const bool flip_above = r.u32() != 0;
  cp.meta.grp_unit_rows = r.u32() != 0;
  cp.meta.hoa_seed = r.u64();
  cp.meta.gamma = r.f64();

  NetworkParams& p = cp.params;
  p.polarity = flip_above ? ErasePolarity::kFlipAbove : ErasePolarity::kFlipBelow;
  p.xi = r.f64();
  p.dropout_rate = r.f64();
  p.shared_conv.channels = static_cast<int>(k);
  p.shared_conv.kernel.resize(static_cast<size_t>(k) * k * 9);
  p.shared_conv.bias.resize(k);
  for (double& e : p.shared_conv.kernel) e = r.f64();
  for (double& e : p.shared_conv.bias) e = r.f64();
  p.top_branch.w = Mat(static_cast<int>(k), static_cast<int>(d));
  for (double& e : p.top_branch.w.v) e = r.f64();
  p.bottom_branch.w = Mat(static_cast<int>(k), static_cast<int>(d));
  for (double& e : p.bottom_branch.w.v) e = r.f64();
  p.class_matrix = Mat(static_cast<int>(nc), static_cast<int>(d));
  for (double& e : p.class_matrix.v) e = r.f64();
  r.expect_exhausted();
  p.validate();
  return cp;
}

}  // namespace aeen
