// Built with -mavx2 -mfma; only reached through dispatch after a CPU check.

#include <immintrin.h>

#include <bit>
#include <cassert>

#include "portspill/kernels.hpp"

namespace portspill::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Per-64-bit-lane popcount (nibble lookup + horizontal byte sum).
inline __m256i popcount_epi64(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1, 2,
                                       2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  const __m256i counts = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(counts, _mm256_setzero_si256());
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  if (alpha == 1.0) {
    for (; i + 4 <= n; i += 4)
      _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), _mm256_loadu_pd(x.data() + i)));
    for (; i < n; ++i) y[i] += x[i];
    return;
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y.data() + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out) {
  assert(probe.size() >= words && columns.size() >= out.size() * words);
  const std::size_t n = out.size();
  if (words == 1) {
    // One word per column: vectorize across columns.
    const __m256i p = _mm256_set1_epi64x(static_cast<long long>(probe[0]));
    std::size_t j = 0;
    alignas(32) std::uint64_t lanes[4];
    for (; j + 4 <= n; j += 4) {
      const __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(columns.data() + j));
      _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), popcount_epi64(_mm256_and_si256(p, c)));
      for (int k = 0; k < 4; ++k) out[j + k] = static_cast<std::uint32_t>(lanes[k]);
    }
    for (; j < n; ++j) out[j] = static_cast<std::uint32_t>(std::popcount(probe[0] & columns[j]));
    return;
  }
  alignas(32) std::uint64_t lanes[4];
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t* col = columns.data() + j * words;
    __m256i acc = _mm256_setzero_si256();
    std::size_t w = 0;
    for (; w + 4 <= words; w += 4) {
      const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(probe.data() + w));
      const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(col + w));
      acc = _mm256_add_epi64(acc, popcount_epi64(_mm256_and_si256(a, b)));
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    std::uint64_t count = lanes[0] + lanes[1] + lanes[2] + lanes[3];
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
      const __m256d vs = _mm256_set1_pd(s);
      double* g = gram.data() + a * cols;
      std::size_t b = a;
      for (; b + 4 <= cols; b += 4)
        _mm256_storeu_pd(g + b, _mm256_fmadd_pd(vs, _mm256_loadu_pd(xr + b), _mm256_loadu_pd(g + b)));
      for (; b < cols; ++b) g[b] += s * xr[b];
    }
  }
  scalar::mirror_upper(gram, cols);
}

}  // namespace portspill::kernels::avx2
