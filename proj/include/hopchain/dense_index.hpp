#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hopchain/lexical_index.hpp"
#include "hopchain/scored.hpp"

namespace hopchain {

using Embedding = std::vector<double>;

/// Fixed-dimension embeddings keyed by id, searched by exact maximum inner
/// product. Vectors are stored as given; no normalization.
///
/// Also used for query embeddings keyed by qid, which share the file format.
class DenseIndex {
public:
    explicit DenseIndex(std::size_t dim = 1);

    /// Throws DimensionError on a wrong-length vector, PreconditionError on a
    /// non-finite entry, DuplicateIdError on a repeated id.
    void add(std::string id, std::span<const double> values);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(std::size_t row) const { return ids_.at(row); }
    std::span<const std::string> ids() const noexcept { return ids_; }
    std::span<const double> row(std::size_t r) const;
    /// Empty optional when the id is absent.
    std::optional<std::span<const double>> find(std::string_view id) const;
    /// Throws PreconditionError when the id is absent.
    std::span<const double> at(std::string_view id) const;

    /// Exact top-k by <query, d>, descending, ties by ascending id. Runs the
    /// parallel scan kernel.
    std::vector<ScoredFact> mips_top_k(std::span<const double> query, std::size_t k,
                                       const FactIdSet& exclude = {}) const;
    /// Same contract on the serial reference kernel.
    std::vector<ScoredFact> mips_top_k_serial(std::span<const double> query, std::size_t k,
                                              const FactIdSet& exclude = {}) const;

    /// Header `#dim=<d>`, then `<id>\t<v1> <v2> ... <vd>` per entry.
    void write(std::ostream& out) const;
    static DenseIndex read(std::istream& in, const std::string& source = "<stream>");
    void save(const std::string& path) const;

private:
    template <typename Kernel>
    std::vector<ScoredFact> search(Kernel kernel, std::span<const double> query, std::size_t k,
                                   const FactIdSet& exclude) const;

    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<double> values_;  // row-major, size() * dim_
    std::unordered_map<std::string, std::size_t> rows_;
};

DenseIndex load_embeddings(const std::string& path);

}  // namespace hopchain
