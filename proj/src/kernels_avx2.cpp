// AVX2 variants. Compiled with -mavx2 only; callers reach these through the
// dispatch table after a CPU feature check.

#include <immintrin.h>

#include <cmath>

#include "rfts/kernels.hpp"

namespace rfts::kernels::avx2 {

namespace {

inline __m256d squares_dim1(const double* p) {
  const __m256d v = _mm256_loadu_pd(p);
  return _mm256_add_pd(_mm256_setzero_pd(), _mm256_mul_pd(v, v));
}

// Rows r..r+3 of an interleaved (a, b) array.
inline __m256d squares_dim2(const double* p) {
  const __m256d lo = _mm256_loadu_pd(p);      // a0 b0 a1 b1
  const __m256d hi = _mm256_loadu_pd(p + 4);  // a2 b2 a3 b3
  const __m256d zero = _mm256_setzero_pd();
  const __m256d slo = _mm256_add_pd(zero, _mm256_mul_pd(lo, lo));
  const __m256d shi = _mm256_mul_pd(hi, hi);
  const __m256d shi0 = _mm256_add_pd(zero, shi);
  // hadd -> r0 r2 r1 r3
  const __m256d mixed = _mm256_hadd_pd(slo, shi0);
  return _mm256_permute4x64_pd(mixed, 0b11011000);
}

inline __m256d squares_general(const double* p, std::size_t dim) {
  const auto stride = static_cast<long long>(dim);
  const __m256i idx = _mm256_set_epi64x(3 * stride, 2 * stride, stride, 0);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t j = 0; j < dim; ++j) {
    const __m256d v = _mm256_i64gather_pd(p + j, idx, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  return acc;
}

}  // namespace

void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out) {
  const std::size_t rows = out.size();
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* p = values.data() + r * dim;
    __m256d sq;
    if (dim == 1) {
      sq = squares_dim1(p);
    } else if (dim == 2) {
      sq = squares_dim2(p);
    } else {
      sq = squares_general(p, dim);
    }
    _mm256_storeu_pd(out.data() + r, sq);
  }
  if (r < rows) {
    scalar::row_sq_norms(values.subspan(r * dim), dim, out.subspan(r));
  }
}

void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out) {
  row_sq_norms(values, dim, out);
  const std::size_t rows = out.size();
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    _mm256_storeu_pd(out.data() + r, _mm256_sqrt_pd(_mm256_loadu_pd(out.data() + r)));
  }
  for (; r < rows; ++r) out[r] = std::sqrt(out[r]);
}

double sum_squares(std::span<const double> values) {
  const std::size_t n = values.size();
  const double* p = values.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(p + i);
    const __m256d b = _mm256_loadu_pd(p + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += p[i] * p[i];
  return total;
}

std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits) {
  const std::size_t n = a.size();
  const bool record = !hits.empty();
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_cmp_pd(_mm256_loadu_pd(a.data() + i),
                                    _mm256_loadu_pd(b.data() + i), _CMP_LE_OQ);
    const int bits = _mm256_movemask_pd(m);
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(bits)));
    if (record) {
      for (int lane = 0; lane < 4; ++lane) hits[i + lane] += (bits >> lane) & 1;
    }
  }
  if (i < n) {
    count += scalar::count_le(a.subspan(i), b.subspan(i),
                              record ? hits.subspan(i) : std::span<std::int64_t>{});
  }
  return count;
}

}  // namespace rfts::kernels::avx2
