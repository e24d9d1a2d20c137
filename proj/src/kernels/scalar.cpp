#include <bit>
#include <cassert>

#include "portspill/kernels.hpp"

namespace portspill::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out) {
  assert(probe.size() >= words && columns.size() >= out.size() * words);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::uint64_t* col = columns.data() + j * words;
    std::uint32_t count = 0;
    for (std::size_t w = 0; w < words; ++w) count += static_cast<std::uint32_t>(std::popcount(probe[w] & col[w]));
    out[j] = count;
  }
}

void mirror_upper(std::span<double> gram, std::size_t cols) {
  for (std::size_t a = 0; a < cols; ++a)
    for (std::size_t b = a + 1; b < cols; ++b) gram[b * cols + a] = gram[a * cols + b];
}

void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram) {
  assert(x.size() >= rows * cols && w.size() >= rows && gram.size() >= cols * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    const double wr = w[r];
    for (std::size_t a = 0; a < cols; ++a) {
      const double s = wr * xr[a];
      double* g = gram.data() + a * cols;
      for (std::size_t b = a; b < cols; ++b) g[b] += s * xr[b];
    }
  }
  mirror_upper(gram, cols);
}

}  // namespace portspill::kernels::scalar
