#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hopchain/corpus.hpp"
#include "hopchain/scored.hpp"

namespace hopchain {

struct Bm25Params {
    double k1 = 1.2;  // term-frequency saturation, >= 0
    double b = 0.75;  // length normalization, in [0, 1]

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

struct Posting {
    std::uint32_t doc;  // fact ordinal
    std::uint32_t tf;
};

using FactIdSet = std::set<std::string, std::less<>>;

/// Okapi BM25 over an immutable inverted index.
///
/// IDF is the non-negative variant ln(1 + (N - df + 0.5) / (df + 0.5)), so a
/// fact scores > 0 exactly when it shares at least one query token. Query
/// tokens contribute in their (sorted) TokenSet order; facts scoring 0 are
/// never returned; ties resolve by ascending fact id.
///
/// The index keeps a copy of the tokenizer it was built with so callers can
/// tokenize queries consistently, and so snapshots carry it along.
class InvertedIndex {
public:
    /// Throws PreconditionError on an empty corpus or out-of-range params.
    static InvertedIndex build(const Corpus& corpus, Bm25Params params = {},
                               Tokenizer tokenizer = Tokenizer{});

    std::vector<ScoredFact> query(const TokenSet& query_tokens, std::size_t top_n) const;

    /// As `query`, restricted to facts that share a token with every set in
    /// `must_overlap` and are not listed in `exclude`.
    std::vector<ScoredFact> query_constrained(const TokenSet& query_tokens,
                                              std::span<const TokenSet> must_overlap,
                                              const FactIdSet& exclude,
                                              std::size_t top_m) const;

    std::size_t doc_count() const noexcept { return fact_ids_.size(); }
    double avg_doc_length() const noexcept { return avg_doc_length_; }
    std::uint32_t doc_length(std::size_t ordinal) const { return doc_lengths_.at(ordinal); }
    const std::string& fact_id(std::size_t ordinal) const { return fact_ids_.at(ordinal); }
    std::optional<std::size_t> ordinal(std::string_view fact_id) const;

    /// Empty span for unknown tokens.
    std::span<const Posting> postings(std::string_view token) const;
    std::size_t vocabulary_size() const noexcept { return terms_.size(); }

    /// Distinct tokens of a fact, as indexed.
    TokenSet fact_tokens(std::size_t ordinal) const;
    TokenSet fact_tokens(std::string_view fact_id) const;

    const Bm25Params& params() const noexcept { return params_; }
    const Tokenizer& tokenizer() const noexcept { return tokenizer_; }

    /// Text snapshot: a magic line `HOPCHAIN-BM25-INDEX v1`, a JSON header
    /// line, then one JSON line per fact with its term frequencies.
    void write(std::ostream& out) const;
    static InvertedIndex read(std::istream& in, const std::string& source = "<stream>");
    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

private:
    struct DocTerms {
        std::vector<std::uint32_t> term_ids;  // sorted, distinct
        std::vector<std::uint32_t> tfs;       // parallel to term_ids
    };

    static InvertedIndex from_docs(std::vector<std::string> fact_ids,
                                   std::vector<std::vector<std::pair<std::string, std::uint32_t>>> docs,
                                   Bm25Params params, Tokenizer tokenizer);

    std::vector<std::uint32_t> known_term_ids(const TokenSet& tokens) const;
    std::vector<ScoredFact> score_and_select(const TokenSet& query_tokens, std::size_t k,
                                             const std::vector<std::vector<std::uint32_t>>* must,
                                             const std::vector<std::uint8_t>* excluded) const;

    Bm25Params params_;
    Tokenizer tokenizer_;
    std::vector<std::string> terms_;  // term id -> token, sorted
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;  // by term id
    std::vector<DocTerms> doc_terms_;
    std::vector<std::uint32_t> doc_lengths_;
    std::vector<double> length_norm_;  // k1 * (1 - b + b * dl / avgdl)
    std::vector<std::string> fact_ids_;
    std::unordered_map<std::string, std::uint32_t> ordinals_;
    double avg_doc_length_ = 0.0;
};

/// BM25 IDF used by the index.
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

}  // namespace hopchain
