#pragma once

// Shared test fixtures: random and planted corpora plus brute-force oracles.
// The oracles recompute everything from raw fact text and never touch the
// index/kernel code paths they are used to check.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hopchain/chain_builder.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/dense_index.hpp"
#include "hopchain/lexical_index.hpp"
#include "hopchain/random.hpp"

namespace hopchain::testkit {

/// Distinct pronounceable non-words ("bakido", ...). Never a default stopword.
std::string pseudo_word(std::size_t i);

/// Facts of 3-12 words drawn from `vocab` pseudo-words (skewed toward the
/// head), sprinkled with stopwords, capitals and punctuation.
Corpus random_corpus(Rng& rng, std::size_t n_facts, std::size_t vocab);
QAPair random_qa(Rng& rng, std::size_t vocab, const std::string& qid);
std::vector<double> random_vector(Rng& rng, std::size_t dim);

/// Exhaustive BM25: scores every fact from its raw text, keeps positives that
/// pass `admit`, stable-sorts by (score desc, id asc), truncates.
std::vector<ScoredFact> bm25_oracle(const Corpus& corpus, const Tokenizer& tok, const Bm25Params& p,
                                    const TokenSet& query, std::size_t top_n,
                                    const std::function<bool(const Fact&)>& admit = {});

/// The same scorer with the corpus tokenized once up front, for running many
/// queries against one corpus.
class Bm25Oracle {
public:
    Bm25Oracle(const Corpus& corpus, const Tokenizer& tok, const Bm25Params& p);
    std::vector<ScoredFact> query(const TokenSet& query, std::size_t top_n,
                                  const std::function<bool(const Fact&)>& admit = {}) const;

private:
    const Corpus* corpus_;
    Bm25Params params_;
    std::vector<std::vector<std::string>> terms_;
    double avgdl_ = 0.0;
};

/// Exhaustive inner products, same ordering rule.
std::vector<ScoredFact> mips_oracle(const std::vector<std::string>& ids,
                                    const std::vector<std::vector<double>>& vectors,
                                    const std::vector<double>& query, std::size_t k,
                                    const FactIdSet& exclude = {});

/// Enumerates every (hop-1, hop-2) pair the syntactic procedure can form,
/// scoring each hop with bm25_oracle, then dedupes, sorts and truncates.
std::vector<ChainCandidate> syntactic_chain_oracle(const Corpus& corpus, const Tokenizer& tok,
                                                   const Bm25Params& p, const QAPair& qa,
                                                   const PipelineConfig& cfg);

struct PlantedSet {
    Corpus corpus;
    std::vector<QuestionRecord> questions;
    DenseIndex fact_embeddings{1};
    DenseIndex query_embeddings{1};
    std::vector<std::string> semantic_only;  // qids whose gold chain shares no token across hops
};

/// `n_questions` questions each with a gold chain A -> B linked by a private
/// bridge word, two lexical distractors per question, and shared-vocabulary
/// noise facts up to `total_facts`. Every gold chain is the top syntactic
/// chain for its question.
PlantedSet planted_syntactic(std::size_t n_questions = 50, std::size_t total_facts = 500);

/// `n_lexical` questions built like planted_syntactic plus `n_semantic`
/// questions whose gold hops share no token (unreachable lexically) but are
/// linked in embedding space: q = e(A), d(A) = e(A), d(B) = e(B) on private
/// axes. Every question also has enough lexical distractor chains that the
/// hybrid merge has slots to fill.
PlantedSet planted_semantic(std::size_t n_lexical = 10, std::size_t n_semantic = 10,
                            std::size_t noise_facts = 120);

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hopchain::testkit
