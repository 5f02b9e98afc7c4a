#include "hopchain/kernels.hpp"

#include <algorithm>

#ifdef HOPCHAIN_HAVE_OPENMP
#include <omp.h>
#endif

namespace hopchain::kernels {

namespace {

struct HitOrder {
    std::span<const std::string> ids;
    bool operator()(const ScanHit& a, const ScanHit& b) const {
        if (a.first != b.first) return a.first > b.first;
        return ids[a.second] < ids[b.second];
    }
};

// Keeps the best `k` of `hits` in order.
void truncate_sorted(std::vector<ScanHit>& hits, std::size_t k, const HitOrder& order) {
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                          order);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), order);
    }
}

}  // namespace

void inner_products_serial(std::span<const double> rows, std::size_t dim,
                           std::span<const double> query, std::span<double> out) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = dot(rows.data() + i * dim, query.data(), dim);
    }
}

void inner_products_parallel(std::span<const double> rows, std::size_t dim,
                             std::span<const double> query, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = dot(rows.data() + static_cast<std::size_t>(i) * dim, query.data(), dim);
    }
}

std::vector<ScanHit> mips_scan_serial(std::span<const double> rows, std::size_t dim,
                                      std::span<const std::string> ids,
                                      std::span<const double> query, std::size_t k,
                                      std::span<const unsigned char> excluded) {
    std::vector<double> scores(ids.size());
    inner_products_serial(rows, dim, query, scores);
    std::vector<ScanHit> hits;
    hits.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!excluded.empty() && excluded[i]) continue;
        hits.emplace_back(scores[i], i);
    }
    std::stable_sort(hits.begin(), hits.end(), HitOrder{ids});
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<ScanHit> mips_scan_parallel(std::span<const double> rows, std::size_t dim,
                                        std::span<const std::string> ids,
                                        std::span<const double> query, std::size_t k,
                                        std::span<const unsigned char> excluded) {
    const HitOrder order{ids};
    const auto n = static_cast<std::ptrdiff_t>(ids.size());
    const int nthreads = max_threads();
    std::vector<std::vector<ScanHit>> local(static_cast<std::size_t>(nthreads));

#pragma omp parallel num_threads(nthreads)
    {
#ifdef HOPCHAIN_HAVE_OPENMP
        auto& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
#else
        auto& mine = local[0];
#endif
        // Buffer up to 2k hits, then prune back to k; amortized O(n log k).
        const std::size_t cap = std::max<std::size_t>(2 * k, 64);
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const auto row = static_cast<std::size_t>(i);
            if (!excluded.empty() && excluded[row]) continue;
            mine.emplace_back(dot(rows.data() + row * dim, query.data(), dim), row);
            if (mine.size() >= cap) truncate_sorted(mine, k, order);
        }
        truncate_sorted(mine, k, order);
    }

    std::vector<ScanHit> merged;
    for (auto& part : local) merged.insert(merged.end(), part.begin(), part.end());
    truncate_sorted(merged, k, order);
    return merged;
}

int max_threads() {
#ifdef HOPCHAIN_HAVE_OPENMP
    return omp_in_parallel() ? 1 : omp_get_max_threads();
#else
    return 1;
#endif
}

void set_num_threads(int n) {
#ifdef HOPCHAIN_HAVE_OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace hopchain::kernels
