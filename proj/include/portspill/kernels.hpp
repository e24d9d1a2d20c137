#pragma once

// Data-parallel inner loops. Each kernel has a portable scalar reference in
// namespace `scalar` and optional AVX2 / NEON variants; the unqualified entry
// points dispatch once at first use on the running CPU. Set
// PORTSPILL_ISA=scalar to pin the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace portspill::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);
Isa active_isa();
// Best ISA the CPU and build support, ignoring any override.
Isa detected_isa();
// Overrides dispatch (tests, benchmarks). Falls back to Scalar if unsupported.
void force_isa(Isa isa);

// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x. Element-wise, so results are identical across variants
// apart from FMA contraction when alpha != 1.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// out[j] = popcount(probe & columns[j]) summed over `words` 64-bit words.
// `columns` holds out.size() bitsets of `words` words each, back to back.
void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out);

// gram += X^T diag(w) X for row-major X (rows x cols). gram is cols x cols,
// row-major. The upper triangle is accumulated and copied to the lower one,
// so the result is exactly symmetric.
void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram);

namespace scalar {
// Copies the upper triangle of a row-major cols x cols matrix to the lower.
void mirror_upper(std::span<double> gram, std::size_t cols);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out);
void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram);
}  // namespace scalar

#if defined(PORTSPILL_HAVE_AVX2) || defined(PORTSPILL_KERNELS_DECLARE_ALL)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out);
void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram);
}  // namespace avx2
#endif

#if defined(PORTSPILL_HAVE_NEON) || defined(PORTSPILL_KERNELS_DECLARE_ALL)
namespace neon {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out);
void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram);
}  // namespace neon
#endif

}  // namespace portspill::kernels
