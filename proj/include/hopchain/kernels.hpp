#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Exhaustive inner-product scan kernels. Each `_parallel` kernel has a
// `_serial` twin that computes the same thing the plain way; tests and the
// benchmark hold the pair against each other. Per-row dot products use the
// same left-to-right accumulation in both, so scores are bit-identical.
namespace hopchain::kernels {

inline double dot(const double* a, const double* b, std::size_t dim) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += a[j] * b[j];
    return s;
}

/// out[i] = <rows[i], query>, rows stored row-major with `dim` columns.
void inner_products_serial(std::span<const double> rows, std::size_t dim,
                           std::span<const double> query, std::span<double> out);
void inner_products_parallel(std::span<const double> rows, std::size_t dim,
                             std::span<const double> query, std::span<double> out);

/// (score, row) pairs of the best `k` non-excluded rows, ordered by
/// descending score then ascending ids[row].
using ScanHit = std::pair<double, std::size_t>;

/// Scores every row, stable-sorts the lot, truncates.
std::vector<ScanHit> mips_scan_serial(std::span<const double> rows, std::size_t dim,
                                      std::span<const std::string> ids,
                                      std::span<const double> query, std::size_t k,
                                      std::span<const unsigned char> excluded);

/// Thread-local bounded selections merged at the end. Output is independent
/// of the thread count.
std::vector<ScanHit> mips_scan_parallel(std::span<const double> rows, std::size_t dim,
                                        std::span<const std::string> ids,
                                        std::span<const double> query, std::size_t k,
                                        std::span<const unsigned char> excluded);

/// Threads available to the parallel kernels (1 without OpenMP).
int max_threads();
void set_num_threads(int n);

}  // namespace hopchain::kernels
