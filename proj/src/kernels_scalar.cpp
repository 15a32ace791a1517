#include "rfts/kernels.hpp"

#include <cmath>

namespace rfts::kernels::scalar {

void row_sq_norms(std::span<const double> values, std::size_t dim,
                  std::span<double> out) {
  const std::size_t rows = out.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = values.data() + r * dim;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) acc = acc + row[j] * row[j];
    out[r] = acc;
  }
}

void row_norms(std::span<const double> values, std::size_t dim,
               std::span<double> out) {
  row_sq_norms(values, dim, out);
  for (double& v : out) v = std::sqrt(v);
}

double sum_squares(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

std::size_t count_le(std::span<const double> a, std::span<const double> b,
                     std::span<std::int64_t> hits) {
  std::size_t count = 0;
  const bool record = !hits.empty();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool le = a[i] <= b[i];
    count += le ? 1 : 0;
    if (record) hits[i] += le ? 1 : 0;
  }
  return count;
}

}  // namespace rfts::kernels::scalar
