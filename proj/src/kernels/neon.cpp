#include <arm_neon.h>

#include <bit>
#include <cassert>

#include "portspill/kernels.hpp"

namespace portspill::kernels::neon {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a.data() + i + 2), vld1q_f64(b.data() + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  std::size_t i = 0;
  if (alpha == 1.0) {
    for (; i + 2 <= n; i += 2) vst1q_f64(y.data() + i, vaddq_f64(vld1q_f64(y.data() + i), vld1q_f64(x.data() + i)));
    for (; i < n; ++i) y[i] += x[i];
    return;
  }
  const float64x2_t va = vdupq_n_f64(alpha);
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y.data() + i, vfmaq_f64(vld1q_f64(y.data() + i), va, vld1q_f64(x.data() + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out) {
  assert(probe.size() >= words && columns.size() >= out.size() * words);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::uint64_t* col = columns.data() + j * words;
    uint64x2_t acc = vdupq_n_u64(0);
    std::size_t w = 0;
    for (; w + 2 <= words; w += 2) {
      const uint8x16_t bits = vreinterpretq_u8_u64(vandq_u64(vld1q_u64(probe.data() + w), vld1q_u64(col + w)));
      acc = vaddq_u64(acc, vpaddlq_u32(vpaddlq_u16(vpaddlq_u8(vcntq_u8(bits)))));
    }
    std::uint64_t count = vgetq_lane_u64(acc, 0) + vgetq_lane_u64(acc, 1);
    for (; w < words; ++w) count += static_cast<std::uint64_t>(std::popcount(probe[w] & col[w]));
    out[j] = static_cast<std::uint32_t>(count);
  }
}

void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram) {
  assert(x.size() >= rows * cols && w.size() >= rows && gram.size() >= cols * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    for (std::size_t a = 0; a < cols; ++a) {
      const double s = w[r] * xr[a];
      const float64x2_t vs = vdupq_n_f64(s);
      double* g = gram.data() + a * cols;
      std::size_t b = a;
      for (; b + 2 <= cols; b += 2) vst1q_f64(g + b, vfmaq_f64(vld1q_f64(g + b), vs, vld1q_f64(xr + b)));
      for (; b < cols; ++b) g[b] += s * xr[b];
    }
  }
  scalar::mirror_upper(gram, cols);
}

}  // namespace portspill::kernels::neon
