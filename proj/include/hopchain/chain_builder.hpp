#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hopchain/corpus.hpp"
#include "hopchain/dense_index.hpp"
#include "hopchain/lexical_index.hpp"
#include "hopchain/reencoder.hpp"

namespace hopchain {

enum class ChainSource { Syntactic, Semantic };

const char* to_string(ChainSource s);
ChainSource chain_source_from_string(std::string_view s);

/// Ordered fact pair scored by the sum of its two hop retrieval scores.
struct ChainCandidate {
    std::string f1;
    std::string f2;
    double s1 = 0.0;
    double s2 = 0.0;
    double score = 0.0;
    ChainSource source = ChainSource::Syntactic;

    friend bool operator==(const ChainCandidate&, const ChainCandidate&) = default;
};

/// Orientation-free key: the smaller id, '|', the larger id.
std::string chain_key(std::string_view f1, std::string_view f2);
inline std::string chain_key(const ChainCandidate& c) { return chain_key(c.f1, c.f2); }

struct PipelineConfig {
    std::size_t n_first = 20;     // syntactic hop-1 facts
    std::size_t m_second = 4;     // syntactic hop-2 facts per hop-1 fact
    std::size_t k_chains = 10;    // chains kept after ranking
    std::size_t semantic_n = 5;   // dense hop-1 facts
    std::size_t semantic_m = 2;   // dense hop-2 facts per hop-1 fact
    double merge_fraction = 0.25; // share of the syntactic tail open to semantic chains

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Drops later duplicates of an unordered pair (keeping the better-ranked
/// orientation), sorts by descending score with ties by (f1, f2), truncates.
void rank_chains(std::vector<ChainCandidate>& chains, std::size_t k);

/// Lexical two-hop chains. Hop 1 queries the Q-A tokens; hop 2 queries Q-A
/// tokens plus the first fact's tokens and only admits facts that share a
/// token with both, never the first fact itself.
std::vector<ChainCandidate> syntactic_chains(const InvertedIndex& index, const QAPair& qa,
                                             const PipelineConfig& cfg);

/// Dense two-hop chains. Hop 1 is MIPS on the query embedding; each hop-1
/// fact is re-encoded with the query into a second query. Hop-2 facts whose
/// corpus text shares no token with the question or answer are dropped (as
/// are hop-2 facts missing from the corpus).
///
/// Throws DimensionError when the query, index and model dims disagree.
std::vector<ChainCandidate> semantic_chains(const DenseIndex& facts, const ReEncoderModel& model,
                                            std::span<const double> q_embedding, const QAPair& qa,
                                            const Corpus& corpus, const Tokenizer& tokenizer,
                                            const PipelineConfig& cfg);

/// Replaces up to floor(merge_fraction * |syntactic|) trailing syntactic
/// chains with the best semantic chains not already among the preserved
/// syntactic prefix. The untouched prefix keeps its order; a surviving tail
/// entry that duplicates an inserted semantic chain is dropped, so the
/// result never exceeds |syntactic|.
std::vector<ChainCandidate> merge_candidates(std::span<const ChainCandidate> syntactic,
                                             std::span<const ChainCandidate> semantic,
                                             const PipelineConfig& cfg);

struct QuestionChains {
    std::string qid;
    std::vector<ChainCandidate> chains;
};

/// JSON Lines, one object per question:
/// {"qid", "config_digest"?, "chains": [{"f1","f2","s1","s2","score","source"}]}
void write_chains(std::span<const QuestionChains> records, std::ostream& out,
                  const std::string& config_digest = {});
std::vector<QuestionChains> read_chains(std::istream& in, const std::string& source = "<stream>");
void save_chains(std::span<const QuestionChains> records, const std::string& path,
                 const std::string& config_digest = {});
std::vector<QuestionChains> load_chains(const std::string& path);

}  // namespace hopchain
