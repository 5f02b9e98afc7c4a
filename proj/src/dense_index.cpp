#include "hopchain/dense_index.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"
#include "hopchain/kernels.hpp"

namespace hopchain {

DenseIndex::DenseIndex(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw PreconditionError("embedding dimension must be positive");
}

void DenseIndex::add(std::string id, std::span<const double> values) {
    if (values.size() != dim_) throw DimensionError(dim_, values.size());
    for (double v : values) {
        if (!std::isfinite(v)) throw PreconditionError("non-finite embedding entry for \"" + id + "\"");
    }
    if (rows_.contains(id)) throw DuplicateIdError(id);
    rows_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    values_.insert(values_.end(), values.begin(), values.end());
}

std::span<const double> DenseIndex::row(std::size_t r) const {
    if (r >= ids_.size()) throw PreconditionError("row out of range");
    return std::span<const double>(values_).subspan(r * dim_, dim_);
}

std::optional<std::span<const double>> DenseIndex::find(std::string_view id) const {
    auto it = rows_.find(std::string(id));
    if (it == rows_.end()) return std::nullopt;
    return row(it->second);
}

std::span<const double> DenseIndex::at(std::string_view id) const {
    auto r = find(id);
    if (!r) throw PreconditionError("no embedding for \"" + std::string(id) + "\"");
    return *r;
}

template <typename Kernel>
std::vector<ScoredFact> DenseIndex::search(Kernel kernel, std::span<const double> query,
                                           std::size_t k, const FactIdSet& exclude) const {
    if (query.size() != dim_) throw DimensionError(dim_, query.size());
    if (k == 0) throw PreconditionError("k must be >= 1");
    std::vector<unsigned char> excluded;
    if (!exclude.empty()) {
        excluded.assign(ids_.size(), 0);
        for (const auto& id : exclude) {
            auto it = rows_.find(id);
            if (it != rows_.end()) excluded[it->second] = 1;
        }
    }
    auto hits = kernel(values_, dim_, ids_, query, k, excluded);
    std::vector<ScoredFact> out;
    out.reserve(hits.size());
    for (const auto& [score, r] : hits) out.push_back({ids_[r], score});
    return out;
}

std::vector<ScoredFact> DenseIndex::mips_top_k(std::span<const double> query, std::size_t k,
                                               const FactIdSet& exclude) const {
    return search(kernels::mips_scan_parallel, query, k, exclude);
}

std::vector<ScoredFact> DenseIndex::mips_top_k_serial(std::span<const double> query,
                                                      std::size_t k,
                                                      const FactIdSet& exclude) const {
    return search(kernels::mips_scan_serial, query, k, exclude);
}

void DenseIndex::write(std::ostream& out) const {
    out << "#dim=" << dim_ << '\n';
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        out << ids_[r] << '\t';
        auto v = row(r);
        for (std::size_t j = 0; j < dim_; ++j) {
            if (j) out << ' ';
            out << io::format_double(v[j]);
        }
        out << '\n';
    }
}

DenseIndex DenseIndex::read(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError(source, 1, "missing #dim header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#dim=", 0) != 0) throw FormatError(source, 1, "unknown header \"" + line + "\"");
    const std::string dim_text = line.substr(5);
    char* end = nullptr;
    errno = 0;
    const long long dim = std::strtoll(dim_text.c_str(), &end, 10);
    if (dim_text.empty() || *end != '\0' || errno != 0 || dim <= 0) {
        throw FormatError(source, 1, "invalid dimension \"" + dim_text + "\"");
    }

    DenseIndex idx(static_cast<std::size_t>(dim));
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError(source, lineno, "expected <id><TAB><values>");
        }
        values.clear();
        const char* p = line.c_str() + tab + 1;
        while (true) {
            while (*p == ' ') ++p;
            if (*p == '\0') break;
            errno = 0;
            const double v = std::strtod(p, &end);
            if (end == p || (*end != ' ' && *end != '\0')) {
                throw FormatError(source, lineno, "malformed number");
            }
            if (!std::isfinite(v)) throw FormatError(source, lineno, "non-finite value");
            values.push_back(v);
            p = end;
        }
        if (values.size() != idx.dim()) {
            throw FormatError(source, lineno,
                              "expected " + std::to_string(idx.dim()) + " values, found " +
                                  std::to_string(values.size()));
        }
        std::string id = line.substr(0, tab);
        if (idx.find(id)) throw FormatError(source, lineno, "duplicate id \"" + id + "\"");
        idx.add(std::move(id), values);
    }
    return idx;
}

void DenseIndex::save(const std::string& path) const {
    io::write_atomic(path, [&](std::ostream& out) { write(out); });
}

DenseIndex load_embeddings(const std::string& path) {
    auto in = io::open_input(path);
    return DenseIndex::read(in, path);
}

}  // namespace hopchain
