#include <atomic>
#include <cstdlib>
#include <string>

#include "portspill/kernels.hpp"

namespace portspill::kernels {

namespace {

Isa detect() {
#if defined(PORTSPILL_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#endif
#if defined(PORTSPILL_HAVE_NEON)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

Isa initial() {
  const Isa best = detect();
  if (const char* env = std::getenv("PORTSPILL_ISA")) {
    const std::string v = env;
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && best == Isa::Avx2) return Isa::Avx2;
    if (v == "neon" && best == Isa::Neon) return Isa::Neon;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

Isa detected_isa() { return detect(); }
Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  current().store(isa == Isa::Scalar || isa == detect() ? isa : Isa::Scalar, std::memory_order_relaxed);
}

#define PORTSPILL_DISPATCH(fn, ...)                          \
  switch (active_isa()) {                                    \
    case Isa::Avx2: PORTSPILL_AVX2_CALL(fn, __VA_ARGS__);    \
    case Isa::Neon: PORTSPILL_NEON_CALL(fn, __VA_ARGS__);    \
    case Isa::Scalar: break;                                 \
  }                                                          \
  return scalar::fn(__VA_ARGS__);

#if defined(PORTSPILL_HAVE_AVX2)
#define PORTSPILL_AVX2_CALL(fn, ...) return avx2::fn(__VA_ARGS__)
#else
#define PORTSPILL_AVX2_CALL(fn, ...) break
#endif
#if defined(PORTSPILL_HAVE_NEON)
#define PORTSPILL_NEON_CALL(fn, ...) return neon::fn(__VA_ARGS__)
#else
#define PORTSPILL_NEON_CALL(fn, ...) break
#endif

double dot(std::span<const double> a, std::span<const double> b) { PORTSPILL_DISPATCH(dot, a, b) }

void axpy(double alpha, std::span<const double> x, std::span<double> y) { PORTSPILL_DISPATCH(axpy, alpha, x, y) }

void and_popcount_many(std::span<const std::uint64_t> probe, std::span<const std::uint64_t> columns,
                       std::size_t words, std::span<std::uint32_t> out) {
  PORTSPILL_DISPATCH(and_popcount_many, probe, columns, words, out)
}

void weighted_gram(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<const double> w,
                   std::span<double> gram) {
  PORTSPILL_DISPATCH(weighted_gram, x, rows, cols, w, gram)
}

}  // namespace portspill::kernels
