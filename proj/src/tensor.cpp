#include "teda/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace teda {

namespace {

constexpr double kCodeMax = 32767.0;

std::size_t shape_product(const std::array<std::uint32_t, 4>& shape) {
  std::size_t n = 1;
  for (std::uint32_t d : shape) {
    n *= d;
  }
  return n;
}

}  // namespace

std::size_t Tensor::element_count() const { return shape_product(shape); }

void Tensor::validate() const {
  if (element_count() != data.size()) {
    throw std::invalid_argument("tensor shape product does not match data length");
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("tensor contains a non-finite entry");
    }
  }
}

Tensor Tensor::vector1d(std::vector<float> values) {
  Tensor t;
  t.shape = {1, 1, 1, static_cast<std::uint32_t>(values.size())};
  t.data = std::move(values);
  return t;
}

std::size_t QuantizedTensor::element_count() const { return shape_product(shape); }

void QuantizedTensor::validate() const {
  if (element_count() != data.size()) {
    throw std::invalid_argument("tensor shape product does not match data length");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("quantized tensor scale must be finite and > 0");
  }
  for (std::int16_t c : data) {
    if (c == std::numeric_limits<std::int16_t>::min()) {
      throw std::invalid_argument("quantized tensor holds the excluded code -32768");
    }
  }
}

QuantizedTensor quantize(const Tensor& t) {
  t.validate();

  double max_abs = 0.0;
  for (float v : t.data) {
    max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  }

  QuantizedTensor q;
  q.shape = t.shape;
  q.scale = max_abs > 0.0 ? max_abs / kCodeMax : 1.0;
  q.data.resize(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    // llround is round-half-away-from-zero, which keeps the scheme
    // sign-symmetric; the clamp guards the division's last-ulp wobble.
    const long long code = std::llround(static_cast<double>(t.data[i]) / q.scale);
    q.data[i] = static_cast<std::int16_t>(
        std::clamp<long long>(code, -32767, 32767));
  }
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  q.validate();
  Tensor t;
  t.shape = q.shape;
  t.data.resize(q.data.size());
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    t.data[i] = static_cast<float>(static_cast<double>(q.data[i]) * q.scale);
  }
  return t;
}

LayoutHint layout_hint_from_string(const std::string& name) {
  if (name == "vector") return LayoutHint::vector;
  if (name == "hwc_image") return LayoutHint::hwc_image;
  if (name == "chw_image") return LayoutHint::chw_image;
  if (name == "nchw" || name == "already_nchw") return LayoutHint::already_nchw;
  throw std::invalid_argument("unknown layout hint '" + name + "'");
}

std::string to_string(LayoutHint hint) {
  switch (hint) {
    case LayoutHint::vector: return "vector";
    case LayoutHint::hwc_image: return "hwc_image";
    case LayoutHint::chw_image: return "chw_image";
    case LayoutHint::already_nchw: return "nchw";
  }
  throw std::logic_error("unknown layout hint");
}

bool UnifyPlan::is_identity() const {
  return axis_perm == std::array<int, 4>{0, 1, 2, 3};
}

namespace {

std::vector<float> permute(const std::vector<float>& src,
                           const std::array<std::uint32_t, 4>& src_shape,
                           const std::array<int, 4>& dst_from_src_axis) {
  // dst axis i reads src axis dst_from_src_axis[i]
  std::array<std::size_t, 4> src_stride{};
  std::size_t stride = 1;
  for (int a = 3; a >= 0; --a) {
    src_stride[static_cast<std::size_t>(a)] = stride;
    stride *= src_shape[static_cast<std::size_t>(a)];
  }
  std::array<std::uint32_t, 4> dst_shape{};
  std::array<std::size_t, 4> step{};
  for (int i = 0; i < 4; ++i) {
    dst_shape[static_cast<std::size_t>(i)] =
        src_shape[static_cast<std::size_t>(dst_from_src_axis[static_cast<std::size_t>(i)])];
    step[static_cast<std::size_t>(i)] =
        src_stride[static_cast<std::size_t>(dst_from_src_axis[static_cast<std::size_t>(i)])];
  }
  std::vector<float> out(src.size());
  std::size_t idx = 0;
  for (std::uint32_t i0 = 0; i0 < dst_shape[0]; ++i0) {
    for (std::uint32_t i1 = 0; i1 < dst_shape[1]; ++i1) {
      for (std::uint32_t i2 = 0; i2 < dst_shape[2]; ++i2) {
        for (std::uint32_t i3 = 0; i3 < dst_shape[3]; ++i3) {
          out[idx++] = src[i0 * step[0] + i1 * step[1] + i2 * step[2] + i3 * step[3]];
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<float> UnifyPlan::apply(const std::vector<float>& raw) const {
  if (raw.size() != shape_product(padded_shape)) {
    throw std::invalid_argument("unify: payload size does not match the planned shape");
  }
  if (is_identity()) {
    return raw;
  }
  return permute(raw, padded_shape, axis_perm);
}

std::vector<float> UnifyPlan::invert(const std::vector<float>& unified) const {
  if (unified.size() != shape_product(nchw_shape)) {
    throw std::invalid_argument("unify: payload size does not match the nchw shape");
  }
  if (is_identity()) {
    return unified;
  }
  std::array<int, 4> inverse{};
  for (int i = 0; i < 4; ++i) {
    inverse[static_cast<std::size_t>(axis_perm[static_cast<std::size_t>(i)])] = i;
  }
  return permute(unified, nchw_shape, inverse);
}

UnifyPlan unify_shape(const std::vector<std::uint32_t>& raw_shape, LayoutHint hint) {
  const std::size_t rank = raw_shape.size();
  if (rank < 1 || rank > 4) {
    throw std::invalid_argument("unify_shape: rank must be 1..4, got " +
                                std::to_string(rank));
  }

  UnifyPlan plan;
  auto mismatch = [&]() -> std::invalid_argument {
    return std::invalid_argument("unify_shape: hint '" + to_string(hint) +
                                 "' is inconsistent with rank " +
                                 std::to_string(rank));
  };

  switch (hint) {
    case LayoutHint::vector:
      if (rank == 1) {  // (D) -> (1,1,1,D)
        plan.padded_shape = {1, 1, 1, raw_shape[0]};
      } else if (rank == 2) {  // (N,D) -> (N,1,1,D)
        plan.padded_shape = {raw_shape[0], 1, 1, raw_shape[1]};
      } else {
        throw mismatch();
      }
      plan.nchw_shape = plan.padded_shape;
      break;
    case LayoutHint::hwc_image:
      if (rank == 3) {  // (H,W,C) -> (1,C,H,W)
        plan.padded_shape = {1, raw_shape[0], raw_shape[1], raw_shape[2]};
        plan.axis_perm = {0, 3, 1, 2};
      } else if (rank == 4) {  // (N,H,W,C) -> (N,C,H,W)
        plan.padded_shape = {raw_shape[0], raw_shape[1], raw_shape[2], raw_shape[3]};
        plan.axis_perm = {0, 3, 1, 2};
      } else {
        throw mismatch();
      }
      for (int i = 0; i < 4; ++i) {
        plan.nchw_shape[static_cast<std::size_t>(i)] =
            plan.padded_shape[static_cast<std::size_t>(plan.axis_perm[static_cast<std::size_t>(i)])];
      }
      break;
    case LayoutHint::chw_image:
      if (rank != 3) {
        throw mismatch();
      }
      plan.padded_shape = {1, raw_shape[0], raw_shape[1], raw_shape[2]};
      plan.nchw_shape = plan.padded_shape;
      break;
    case LayoutHint::already_nchw:
      if (rank != 4) {
        throw mismatch();
      }
      plan.padded_shape = {raw_shape[0], raw_shape[1], raw_shape[2], raw_shape[3]};
      plan.nchw_shape = plan.padded_shape;
      break;
  }
  return plan;
}

AccuracyReport accuracy_ratio(const std::vector<Tensor>& ground_truth,
                              const std::vector<Tensor>& reference_preds,
                              const std::vector<Tensor>& candidate_preds) {
  if (ground_truth.empty()) {
    throw std::invalid_argument("accuracy_ratio: needs at least one trial");
  }
  if (reference_preds.size() != ground_truth.size() ||
      candidate_preds.size() != ground_truth.size()) {
    throw std::invalid_argument("accuracy_ratio: trial counts differ");
  }

  double sq_ref = 0.0;
  double sq_cand = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < ground_truth.size(); ++t) {
    const Tensor& gt = ground_truth[t];
    if (reference_preds[t].shape != gt.shape || candidate_preds[t].shape != gt.shape) {
      throw std::invalid_argument("accuracy_ratio: shape mismatch in trial " +
                                  std::to_string(t));
    }
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
      const double dr = static_cast<double>(reference_preds[t].data[i]) - gt.data[i];
      const double dc = static_cast<double>(candidate_preds[t].data[i]) - gt.data[i];
      sq_ref += dr * dr;
      sq_cand += dc * dc;
    }
    n += gt.data.size();
  }

  AccuracyReport report;
  report.trials = static_cast<int>(ground_truth.size());
  report.mse_reference = n > 0 ? sq_ref / static_cast<double>(n) : 0.0;
  report.mse_candidate = n > 0 ? sq_cand / static_cast<double>(n) : 0.0;
  if (report.mse_candidate > 0.0) {
    report.ratio = report.mse_reference / report.mse_candidate;
  } else if (report.mse_reference == 0.0) {
    report.ratio = 1.0;  // identical (possibly perfect) predictions
  }
  return report;
}

}  // namespace teda
