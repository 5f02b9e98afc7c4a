#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hopchain/chain_builder.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/dense_index.hpp"
#include "hopchain/lexical_index.hpp"
#include "hopchain/reencoder.hpp"

namespace hopchain {

enum class GenerateMode { Syntactic, Semantic, Hybrid };

GenerateMode generate_mode_from_string(std::string_view s);
const char* to_string(GenerateMode m);

struct DenseResources {
    const DenseIndex& facts;
    const DenseIndex& queries;  // keyed by qid
    const ReEncoderModel& model;
};

struct GenerateInputs {
    const Corpus& corpus;
    const InvertedIndex* lexical = nullptr;  // required for syntactic / hybrid
    std::optional<DenseResources> dense;     // required for semantic / hybrid
    // Concept filter for semantic hop 2; defaults to the lexical index's tokenizer.
    const Tokenizer* tokenizer = nullptr;
};

/// Builds chains for every question. Questions are processed in parallel
/// when `threads` > 1; the result is sorted by qid either way.
///
/// Throws ConfigError when the mode's inputs are missing and
/// PreconditionError when a question has no query embedding.
std::vector<QuestionChains> generate(std::span<const QAPair> questions, GenerateMode mode,
                                     const PipelineConfig& cfg, const GenerateInputs& inputs,
                                     int threads = 1);

}  // namespace hopchain
