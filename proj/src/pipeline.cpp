#include "hopchain/pipeline.hpp"

#include <algorithm>
#include <exception>

#include "hopchain/error.hpp"
#include "hopchain/kernels.hpp"

namespace hopchain {

GenerateMode generate_mode_from_string(std::string_view s) {
    if (s == "syntactic") return GenerateMode::Syntactic;
    if (s == "semantic") return GenerateMode::Semantic;
    if (s == "hybrid") return GenerateMode::Hybrid;
    throw ConfigError("unknown mode \"" + std::string(s) + "\" (syntactic, semantic, hybrid)");
}

const char* to_string(GenerateMode m) {
    switch (m) {
        case GenerateMode::Syntactic: return "syntactic";
        case GenerateMode::Semantic: return "semantic";
        case GenerateMode::Hybrid: return "hybrid";
    }
    return "?";
}

namespace {

std::vector<ChainCandidate> chains_for(const QAPair& qa, GenerateMode mode, const PipelineConfig& cfg,
                                       const GenerateInputs& in) {
    std::vector<ChainCandidate> syn;
    std::vector<ChainCandidate> sem;
    if (mode != GenerateMode::Semantic) syn = syntactic_chains(*in.lexical, qa, cfg);
    if (mode != GenerateMode::Syntactic) {
        const auto& d = *in.dense;
        auto q = d.queries.find(qa.qid);
        if (!q) throw PreconditionError("no query embedding for question \"" + qa.qid + "\"");
        static const Tokenizer fallback;
        const Tokenizer* tok = in.tokenizer;
        if (tok == nullptr) tok = in.lexical != nullptr ? &in.lexical->tokenizer() : &fallback;
        sem = semantic_chains(d.facts, d.model, *q, qa, in.corpus, *tok, cfg);
    }
    switch (mode) {
        case GenerateMode::Syntactic: return syn;
        case GenerateMode::Semantic: return sem;
        case GenerateMode::Hybrid: return merge_candidates(syn, sem, cfg);
    }
    return {};
}

}  // namespace

std::vector<QuestionChains> generate(std::span<const QAPair> questions, GenerateMode mode,
                                     const PipelineConfig& cfg, const GenerateInputs& inputs,
                                     int threads) {
    if (mode != GenerateMode::Semantic && inputs.lexical == nullptr) {
        throw ConfigError(std::string(to_string(mode)) + " mode needs a lexical index");
    }
    if (mode != GenerateMode::Syntactic && !inputs.dense) {
        throw ConfigError(std::string(to_string(mode)) +
                          " mode needs fact embeddings, query embeddings and a re-encoder");
    }

    std::vector<QuestionChains> out(questions.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(questions.size());
    [[maybe_unused]] const int team = std::max(1, threads);
#pragma omp parallel for schedule(dynamic) num_threads(team) if (team > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const auto& qa = questions[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i)] = {qa.qid, chains_for(qa, mode, cfg, inputs)};
        } catch (...) {
#pragma omp critical(hopchain_generate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::sort(out.begin(), out.end(),
              [](const QuestionChains& a, const QuestionChains& b) { return a.qid < b.qid; });
    return out;
}

}  // namespace hopchain
