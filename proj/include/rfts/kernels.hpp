#pragma once

// Data-parallel inner loops over sampled grids.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds,
// an AVX2 variant. The variant is chosen once at startup from the CPU
// features (override with RFTS_KERNELS=scalar or set_isa()).
//
// Row-wise kernels (row_sq_norms, row_norms, count_le) are bit-identical
// across variants: each lane performs the same operations in the same order
// as the scalar loop. sum_squares reassociates the sum and agrees with the
// scalar result to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace rfts::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// Best ISA supported by both the build and the running CPU.
Isa detect_isa();

Isa active_isa();

// Force a variant. Requesting an unavailable one throws InvalidParameter.
void set_isa(Isa isa);

bool isa_available(Isa isa);

// out[r] = sum_j values[r*dim + j]^2 for r in [0, rows).
void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out);

// out[r] = sqrt(row_sq_norms(values)[r]).
void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out);

double sum_squares(std::span<const double> values);

// Number of i with a[i] <= b[i]. If hits is non-empty, hits[i] += (a[i] <= b[i]).
std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits = {});

// Variant entry points, exposed for equivalence tests.
namespace scalar {
void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out);
void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out);
double sum_squares(std::span<const double> values);
std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits);
}  // namespace scalar

#if defined(RFTS_WITH_AVX2)
namespace avx2 {
void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out);
void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out);
double sum_squares(std::span<const double> values);
std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits);
}  // namespace avx2
#endif

}  // namespace rfts::kernels
