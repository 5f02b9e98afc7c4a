#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hopchain/chain_builder.hpp"
#include "hopchain/corpus.hpp"
#include "hopchain/lexical_index.hpp"
#include "hopchain/reencoder.hpp"

namespace hopchain {

struct EnginePaths {
    std::optional<std::string> corpus;
    std::optional<std::string> questions;
    std::optional<std::string> stopwords;
    std::optional<std::string> index;
    std::optional<std::string> fact_embeddings;
    std::optional<std::string> query_embeddings;
    std::optional<std::string> reencoder;
    std::optional<std::string> scores;
    std::optional<std::string> output;

    friend bool operator==(const EnginePaths&, const EnginePaths&) = default;
};

/// Every tunable of a run. `seed` is the only randomness knob: stage seeds are
/// derived from it by name (see derive_seed), and train.seed is overwritten
/// by train_config().
struct EngineConfig {
    EnginePaths paths;
    bool stem = false;
    Bm25Params bm25;
    PipelineConfig pipeline;
    TrainConfig train;
    std::size_t rerank_k = 10;
    std::size_t negatives_per_positive = 2;
    std::uint64_t seed = 20220101;

    TrainConfig train_config() const;
    std::uint64_t stage_seed(std::string_view stage) const;

    friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct ConfigViolation {
    std::string field;
    std::string bound;
};

std::vector<ConfigViolation> validate(const EngineConfig& config);

/// eqasc_baseline (N=20, M=4, K=10), expanded (N=M=K=200), semantic (dense
/// N=5, M=2, K=10), hybrid (expanded + merge fraction 0.25). Throws
/// ConfigError listing the valid names otherwise.
EngineConfig preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Pretty-printed JSON. Unknown keys are rejected on read; missing keys keep
/// their defaults.
void write_config(const EngineConfig& config, std::ostream& out);
EngineConfig read_config(std::istream& in, const std::string& source = "<stream>");
EngineConfig load_config(const std::string& path);
void save_config(const EngineConfig& config, const std::string& path);

/// FNV-1a digest (16 hex digits) of every setting except file paths, so runs
/// that differ only in where files live share a digest.
std::string config_digest(const EngineConfig& config);

}  // namespace hopchain
