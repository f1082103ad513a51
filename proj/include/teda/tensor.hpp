#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace teda {

/// Dense float32 tensor in N x C x H x W layout, row-major with W fastest.
struct Tensor {
  std::array<std::uint32_t, 4> shape{1, 1, 1, 1};  // N, C, H, W
  std::vector<float> data;

  std::size_t element_count() const;
  void validate() const;  // finite entries, shape product == data length

  static Tensor vector1d(std::vector<float> values);  // (1,1,1,D)
};

/// int16 counterpart of Tensor with one uniform scale. Codes stay inside
/// [-32767, 32767]; -32768 never appears so negation is an exact involution.
struct QuantizedTensor {
  std::array<std::uint32_t, 4> shape{1, 1, 1, 1};
  double scale = 1.0;
  std::vector<std::int16_t> data;

  std::size_t element_count() const;
  void validate() const;
};

/// scale = max|x| / 32767 (1.0 for an all-zero tensor); codes are
/// round-half-away-from-zero(x / scale). Throws on non-finite input.
QuantizedTensor quantize(const Tensor& t);

/// x_hat = code * scale, narrowed back to float32.
Tensor dequantize(const QuantizedTensor& q);

enum class LayoutHint { vector, hwc_image, chw_image, already_nchw };

LayoutHint layout_hint_from_string(const std::string& name);
std::string to_string(LayoutHint hint);

/// How to reorder a raw payload into NCHW: the raw shape padded to rank 4
/// plus the axis permutation such that nchw axis i reads padded axis
/// axis_perm[i]. Identity permutations leave the payload untouched.
struct UnifyPlan {
  std::array<std::uint32_t, 4> padded_shape{1, 1, 1, 1};
  std::array<int, 4> axis_perm{0, 1, 2, 3};
  std::array<std::uint32_t, 4> nchw_shape{1, 1, 1, 1};

  bool is_identity() const;
  std::vector<float> apply(const std::vector<float>& raw) const;
  std::vector<float> invert(const std::vector<float>& unified) const;
};

/// Maps an arbitrary-rank input shape onto N x C x H x W:
///   vector       (D) -> (1,1,1,D);  (N,D) -> (N,1,1,D)
///   hwc_image    (H,W,C) -> (1,C,H,W);  (N,H,W,C) -> (N,C,H,W)
///   chw_image    (C,H,W) -> (1,C,H,W)
///   already_nchw (N,C,H,W) pass-through
/// Throws std::invalid_argument for rank > 4 or a hint/rank mismatch.
UnifyPlan unify_shape(const std::vector<std::uint32_t>& raw_shape, LayoutHint hint);

/// MSE comparison of two prediction sets against a shared ground truth.
struct AccuracyReport {
  double mse_reference = 0.0;   // e0: reference (float) predictions vs truth
  double mse_candidate = 0.0;   // e1: candidate (quantized) predictions vs truth
  std::optional<double> ratio;  // e0 / e1; empty when e1 == 0 < e0
  int trials = 0;
};

AccuracyReport accuracy_ratio(const std::vector<Tensor>& ground_truth,
                              const std::vector<Tensor>& reference_preds,
                              const std::vector<Tensor>& candidate_preds);

}  // namespace teda
