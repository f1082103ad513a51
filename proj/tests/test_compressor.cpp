#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "teda/prng.hpp"
#include "teda/tensor.hpp"

using namespace teda;

namespace {

Tensor random_tensor(SplitMix64& gen, std::size_t n, double magnitude) {
  Tensor t;
  t.shape = {1, 1, 1, static_cast<std::uint32_t>(n)};
  t.data.resize(n);
  for (float& v : t.data) {
    v = static_cast<float>(gen.uniform(-magnitude, magnitude));
  }
  return t;
}

float ulp32(float v) {
  const float av = std::fabs(v);
  return std::nextafterf(av, std::numeric_limits<float>::infinity()) - av;
}

}  // namespace

TEST_CASE("quantize pins the hand-computed codes") {
  const Tensor t = Tensor::vector1d({2.0f, -1.0f, 0.5f});
  const QuantizedTensor q = quantize(t);
  CHECK(q.scale == 2.0 / 32767.0);
  CHECK(q.data[0] == 32767);
  CHECK(q.data[1] == -16384);  // -16383.5 rounds away from zero
  CHECK(q.data[2] == 8192);    // 8191.75 rounds up
}

TEST_CASE("an all-zero tensor quantizes to scale one and zero codes") {
  const Tensor t = Tensor::vector1d({0.0f, 0.0f, 0.0f, 0.0f});
  const QuantizedTensor q = quantize(t);
  CHECK(q.scale == 1.0);
  for (std::int16_t c : q.data) {
    CHECK(c == 0);
  }
  const Tensor back = dequantize(q);
  for (float v : back.data) {
    CHECK(v == 0.0f);
  }
}

TEST_CASE("negating the tensor negates every code exactly") {
  SplitMix64 gen(5);
  for (double magnitude : {1e-6, 1.0, 1e6}) {
    Tensor t = random_tensor(gen, 257, magnitude);
    Tensor neg = t;
    for (float& v : neg.data) {
      v = -v;
    }
    const QuantizedTensor q = quantize(t);
    const QuantizedTensor nq = quantize(neg);
    CHECK(q.scale == nq.scale);
    for (std::size_t i = 0; i < q.data.size(); ++i) {
      CHECK(q.data[i] == -nq.data[i]);
    }
  }
}

TEST_CASE("round trip stays within half a scale step") {
  SplitMix64 gen(9);
  for (double magnitude : {1e-6, 1e-3, 1.0, 1e3, 1e6}) {
    const Tensor t = random_tensor(gen, 4096, magnitude);
    const QuantizedTensor q = quantize(t);
    const Tensor back = dequantize(q);
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const double bound = q.scale / 2.0 + ulp32(std::max(std::fabs(t.data[i]),
                                                          std::fabs(back.data[i])));
      CHECK(std::fabs(static_cast<double>(back.data[i]) - t.data[i]) <= bound);
    }
  }
}

TEST_CASE("the max-magnitude element round-trips exactly") {
  const Tensor t = Tensor::vector1d({2.0f, -1.0f, 0.5f});
  const Tensor back = dequantize(quantize(t));
  CHECK(back.data[0] == 2.0f);
}

TEST_CASE("re-quantizing a round-tripped tensor is byte-stable") {
  SplitMix64 gen(13);
  const Tensor t = random_tensor(gen, 1000, 3.7);
  const QuantizedTensor q1 = quantize(t);
  const QuantizedTensor q2 = quantize(dequantize(q1));
  CHECK(q1.scale == q2.scale);
  CHECK(q1.data == q2.data);
}

TEST_CASE("quantize rejects non-finite input") {
  Tensor t = Tensor::vector1d({1.0f, 2.0f});
  t.data[1] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(quantize(t), std::invalid_argument);
  t.data[1] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(quantize(t), std::invalid_argument);
}

TEST_CASE("unify_shape maps vectors onto the trailing axis") {
  const UnifyPlan plan = unify_shape({7}, LayoutHint::vector);
  CHECK(plan.nchw_shape == std::array<std::uint32_t, 4>{1, 1, 1, 7});
  CHECK(plan.is_identity());

  const UnifyPlan plan2 = unify_shape({1, 9}, LayoutHint::vector);
  CHECK(plan2.nchw_shape == std::array<std::uint32_t, 4>{1, 1, 1, 9});
  CHECK(plan2.is_identity());
}

TEST_CASE("unify_shape moves image channels to the front") {
  const UnifyPlan plan = unify_shape({480, 640, 3}, LayoutHint::hwc_image);
  CHECK(plan.nchw_shape == std::array<std::uint32_t, 4>{1, 3, 480, 640});
  CHECK_FALSE(plan.is_identity());

  // Payload permutation on a small grid: out[c][h][w] == in[h][w][c].
  const UnifyPlan small = unify_shape({2, 2, 3}, LayoutHint::hwc_image);
  std::vector<float> hwc(12);
  for (std::size_t i = 0; i < hwc.size(); ++i) {
    hwc[i] = static_cast<float>(i);
  }
  const std::vector<float> chw = small.apply(hwc);
  for (int c = 0; c < 3; ++c) {
    for (int h = 0; h < 2; ++h) {
      for (int w = 0; w < 2; ++w) {
        CHECK(chw[static_cast<std::size_t>((c * 2 + h) * 2 + w)] ==
              hwc[static_cast<std::size_t>((h * 2 + w) * 3 + c)]);
      }
    }
  }
  CHECK(small.invert(chw) == hwc);
}

TEST_CASE("unify_shape passes through native layouts") {
  const UnifyPlan plan = unify_shape({1, 3, 8, 8}, LayoutHint::already_nchw);
  CHECK(plan.nchw_shape == std::array<std::uint32_t, 4>{1, 3, 8, 8});
  CHECK(plan.is_identity());

  const UnifyPlan chw = unify_shape({3, 16, 16}, LayoutHint::chw_image);
  CHECK(chw.nchw_shape == std::array<std::uint32_t, 4>{1, 3, 16, 16});
  CHECK(chw.is_identity());
}

TEST_CASE("unify_shape rejects bad ranks and mismatched hints") {
  CHECK_THROWS_AS(unify_shape({1, 2, 3, 4, 5}, LayoutHint::vector),
                  std::invalid_argument);
  CHECK_THROWS_AS(unify_shape({}, LayoutHint::vector), std::invalid_argument);
  CHECK_THROWS_AS(unify_shape({4, 4, 3}, LayoutHint::vector), std::invalid_argument);
  CHECK_THROWS_AS(unify_shape({7}, LayoutHint::hwc_image), std::invalid_argument);
  CHECK_THROWS_AS(unify_shape({3, 4, 4}, LayoutHint::already_nchw),
                  std::invalid_argument);
}

TEST_CASE("accuracy_ratio compares candidate and reference errors") {
  Tensor gt = Tensor::vector1d({0.0f});
  Tensor ref = Tensor::vector1d({0.1f});
  Tensor cand = Tensor::vector1d({0.2f});
  const AccuracyReport report = accuracy_ratio({gt}, {ref}, {cand});
  CHECK(report.trials == 1);
  // Inputs are float32 literals, so compare at float32 precision.
  CHECK(report.mse_reference == doctest::Approx(0.01).epsilon(1e-7));
  CHECK(report.mse_candidate == doctest::Approx(0.04).epsilon(1e-7));
  REQUIRE(report.ratio.has_value());
  CHECK(*report.ratio == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("identical predictions give ratio one") {
  Tensor gt = Tensor::vector1d({1.0f, 2.0f});
  Tensor pred = Tensor::vector1d({1.5f, 2.5f});
  const AccuracyReport report = accuracy_ratio({gt}, {pred}, {pred});
  REQUIRE(report.ratio.has_value());
  CHECK(*report.ratio == 1.0);
}

TEST_CASE("a perfect candidate with an imperfect reference has no ratio") {
  Tensor gt = Tensor::vector1d({1.0f});
  Tensor ref = Tensor::vector1d({1.25f});
  const AccuracyReport report = accuracy_ratio({gt}, {ref}, {gt});
  CHECK_FALSE(report.ratio.has_value());
  CHECK(report.mse_candidate == 0.0);
}

TEST_CASE("accuracy_ratio rejects mismatched trials") {
  Tensor gt = Tensor::vector1d({1.0f});
  CHECK_THROWS_AS(accuracy_ratio({gt}, {gt, gt}, {gt}), std::invalid_argument);
  Tensor other;
  other.shape = {1, 1, 1, 2};
  other.data = {1.0f, 2.0f};
  CHECK_THROWS_AS(accuracy_ratio({gt}, {other}, {gt}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy_ratio({}, {}, {}), std::invalid_argument);
}
