#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace hopchain {

// Relevance of one fact for one query (a hop-1 or hop-2 retrieval score).
struct ScoredFact {
    std::string fact_id;
    double score = 0.0;

    friend bool operator==(const ScoredFact&, const ScoredFact&) = default;
};

// Descending score, ties by ascending fact id. A strict total order as long as
// ids are unique.
inline bool ranks_before(const ScoredFact& a, const ScoredFact& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.fact_id < b.fact_id;
}

inline void keep_top(std::vector<ScoredFact>& v, std::size_t k) {
    if (v.size() > k) {
        std::partial_sort(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end(), ranks_before);
        v.resize(k);
    } else {
        std::sort(v.begin(), v.end(), ranks_before);
    }
}

}  // namespace hopchain
