#include <atomic>
#include <cstdlib>
#include <string>

#include "rfts/error.hpp"
#include "rfts/kernels.hpp"

namespace rfts::kernels {

namespace {

Isa initial_isa() {
  const Isa best = detect_isa();
  if (const char* env = std::getenv("RFTS_KERNELS")) {
    if (std::string(env) == "scalar") return Isa::kScalar;
  }
  return best;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  if (isa == Isa::kScalar) return true;
#if defined(RFTS_WITH_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect_isa() { return isa_available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw InvalidParameter("kernel variant not available: " + std::string(isa_name(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out) {
#if defined(RFTS_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::row_sq_norms(values, dim, out);
#endif
  scalar::row_sq_norms(values, dim, out);
}

void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out) {
#if defined(RFTS_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::row_norms(values, dim, out);
#endif
  scalar::row_norms(values, dim, out);
}

double sum_squares(std::span<const double> values) {
#if defined(RFTS_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::sum_squares(values);
#endif
  return scalar::sum_squares(values);
}

std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits) {
#if defined(RFTS_WITH_AVX2)
  if (active_isa() == Isa::kAvx2) return avx2::count_le(a, b, hits);
#endif
  return scalar::count_le(a, b, hits);
}

}  // namespace rfts::kernels
