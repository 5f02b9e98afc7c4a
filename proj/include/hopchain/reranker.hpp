#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hopchain/chain_builder.hpp"
#include "hopchain/corpus.hpp"

namespace hopchain {

/// Validity scores per (qid, unordered chain); higher is more likely valid.
class ScoreTable {
public:
    /// Throws PreconditionError on a non-finite score.
    void set(std::string_view qid, std::string_view f1, std::string_view f2, double score);
    /// Keeps the larger of the stored and new score.
    void set_max(std::string_view qid, std::string_view f1, std::string_view f2, double score);
    std::optional<double> find(std::string_view qid, std::string_view f1, std::string_view f2) const;

    std::size_t size() const noexcept { return scores_.size(); }
    bool empty() const noexcept { return scores_.empty(); }
    /// Keyed by (qid, canonical chain key), sorted.
    const std::map<std::pair<std::string, std::string>, double>& entries() const noexcept {
        return scores_;
    }

private:
    std::map<std::pair<std::string, std::string>, double> scores_;
};

/// Lines `<qid>\t<f1>|<f2>\t<score>`. Keys are canonicalized on read; a key
/// appearing twice for the same qid is a parse error. Fact ids must not
/// contain '|'.
ScoreTable read_scores(std::istream& in, const std::string& source = "<stream>");
ScoreTable load_scores(const std::string& path);
void write_scores(const ScoreTable& table, std::ostream& out);

/// Stable reorder by descending table score; chains without a score follow
/// all scored ones in their original order. Truncates to k.
std::vector<ChainCandidate> rerank(std::span<const ChainCandidate> candidates,
                                   const ScoreTable& scores, std::string_view qid, std::size_t k);

/// The retrieval-sum score of each candidate; reversed duplicates keep the max.
ScoreTable baseline_scores(std::string_view qid, std::span<const ChainCandidate> candidates);

enum class ChainLabel { Valid, Invalid };

struct RerankDatasetRecord {
    std::string qid;
    std::string question;
    std::string answer;
    std::string f1;
    std::string f2;
    std::string f1_text;
    std::string f2_text;
    ChainLabel label = ChainLabel::Invalid;

    friend bool operator==(const RerankDatasetRecord&, const RerankDatasetRecord&) = default;
};

struct RerankDataset {
    std::vector<RerankDatasetRecord> records;
    /// Questions whose pool could not supply the requested negatives.
    std::size_t short_pools = 0;
    std::size_t missing_negatives = 0;
};

/// Per gold chain: the forward and reverse gold orientations as valid rows,
/// then negatives_per_positive * 2 distinct non-gold chains sampled without
/// replacement from that question's pool as invalid rows. Sampling is seeded
/// per question from `seed` and the qid, so it does not depend on the order
/// of `gold`.
///
/// Throws PreconditionError when a gold qid has no pool, no question text,
/// or references a fact missing from the corpus.
RerankDataset build_rerank_dataset(std::span<const GoldChain> gold,
                                   std::span<const QAPair> questions,
                                   const std::unordered_map<std::string, std::vector<ChainCandidate>>& pools,
                                   const Corpus& corpus, std::size_t negatives_per_positive,
                                   std::uint64_t seed);

/// JSON Lines with qid, question, answer, f1, f2, f1_text, f2_text and
/// label ("valid" / "invalid").
void write_rerank_dataset(std::span<const RerankDatasetRecord> records, std::ostream& out,
                          const std::string& config_digest = {});
std::vector<RerankDatasetRecord> read_rerank_dataset(std::istream& in,
                                                     const std::string& source = "<stream>");

}  // namespace hopchain
