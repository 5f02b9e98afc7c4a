#include "hopchain/chain_builder.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"

namespace hopchain {

namespace {

bool chain_before(const ChainCandidate& a, const ChainCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.f1 != b.f1) return a.f1 < b.f1;
    return a.f2 < b.f2;
}

ChainCandidate make_chain(const ScoredFact& first, const ScoredFact& second, ChainSource src) {
    return {first.fact_id, second.fact_id, first.score, second.score, first.score + second.score, src};
}

}  // namespace

const char* to_string(ChainSource s) {
    return s == ChainSource::Syntactic ? "syntactic" : "semantic";
}

ChainSource chain_source_from_string(std::string_view s) {
    if (s == "syntactic") return ChainSource::Syntactic;
    if (s == "semantic") return ChainSource::Semantic;
    throw PreconditionError("unknown chain source \"" + std::string(s) + "\"");
}

std::string chain_key(std::string_view f1, std::string_view f2) {
    std::string key;
    const auto& lo = f1 < f2 ? f1 : f2;
    const auto& hi = f1 < f2 ? f2 : f1;
    key.reserve(lo.size() + hi.size() + 1);
    key.append(lo).push_back('|');
    key.append(hi);
    return key;
}

void rank_chains(std::vector<ChainCandidate>& chains, std::size_t k) {
    std::sort(chains.begin(), chains.end(), chain_before);
    std::unordered_set<std::string> seen;
    std::vector<ChainCandidate> out;
    out.reserve(std::min(k, chains.size()));
    for (auto& c : chains) {
        if (out.size() == k) break;
        if (!seen.insert(chain_key(c)).second) continue;
        out.push_back(std::move(c));
    }
    chains = std::move(out);
}

std::vector<ChainCandidate> syntactic_chains(const InvertedIndex& index, const QAPair& qa,
                                             const PipelineConfig& cfg) {
    const TokenSet qa_tokens = index.tokenizer().tokenize(qa.joined());
    const auto firsts = index.query(qa_tokens, cfg.n_first);

    std::vector<ChainCandidate> chains;
    for (const auto& first : firsts) {
        const TokenSet fact_tokens = index.fact_tokens(first.fact_id);
        const TokenSet constraints[] = {qa_tokens, fact_tokens};
        const auto seconds = index.query_constrained(set_union(qa_tokens, fact_tokens), constraints,
                                                     FactIdSet{first.fact_id}, cfg.m_second);
        for (const auto& second : seconds) {
            chains.push_back(make_chain(first, second, ChainSource::Syntactic));
        }
    }
    rank_chains(chains, cfg.k_chains);
    return chains;
}

std::vector<ChainCandidate> semantic_chains(const DenseIndex& facts, const ReEncoderModel& model,
                                            std::span<const double> q_embedding, const QAPair& qa,
                                            const Corpus& corpus, const Tokenizer& tokenizer,
                                            const PipelineConfig& cfg) {
    if (q_embedding.size() != facts.dim()) throw DimensionError(facts.dim(), q_embedding.size());
    if (model.dim != facts.dim()) throw DimensionError(facts.dim(), model.dim);

    const TokenSet qa_tokens = tokenizer.tokenize(qa.joined());
    const auto firsts = facts.mips_top_k(q_embedding, cfg.semantic_n);

    std::vector<ChainCandidate> chains;
    for (const auto& first : firsts) {
        const Embedding q_r = model.reencode(q_embedding, facts.at(first.fact_id));
        const auto seconds = facts.mips_top_k(q_r, cfg.semantic_m, FactIdSet{first.fact_id});
        for (const auto& second : seconds) {
            const Fact* f = corpus.find(second.fact_id);
            if (f == nullptr || !overlaps(tokenizer.tokenize(f->text), qa_tokens)) continue;
            chains.push_back(make_chain(first, second, ChainSource::Semantic));
        }
    }
    rank_chains(chains, cfg.k_chains);
    return chains;
}

std::vector<ChainCandidate> merge_candidates(std::span<const ChainCandidate> syntactic,
                                             std::span<const ChainCandidate> semantic,
                                             const PipelineConfig& cfg) {
    const std::size_t total = syntactic.size();
    const auto open = std::min(
        total, static_cast<std::size_t>(std::floor(cfg.merge_fraction * static_cast<double>(total))));
    const std::size_t kept = total - open;

    std::unordered_set<std::string> prefix_keys;
    for (std::size_t i = 0; i < kept; ++i) prefix_keys.insert(chain_key(syntactic[i]));

    std::vector<ChainCandidate> inserted;
    std::unordered_set<std::string> inserted_keys;
    for (const auto& c : semantic) {
        if (inserted.size() == open) break;
        auto key = chain_key(c);
        if (prefix_keys.contains(key) || inserted_keys.contains(key)) continue;
        inserted_keys.insert(std::move(key));
        inserted.push_back(c);
    }

    std::vector<ChainCandidate> out(syntactic.begin(), syntactic.begin() + static_cast<std::ptrdiff_t>(kept));
    for (std::size_t i = kept; i < total - inserted.size(); ++i) {
        if (!inserted_keys.contains(chain_key(syntactic[i]))) out.push_back(syntactic[i]);
    }
    out.insert(out.end(), inserted.begin(), inserted.end());
    return out;
}

void write_chains(std::span<const QuestionChains> records, std::ostream& out,
                  const std::string& config_digest) {
    for (const auto& rec : records) {
        nlohmann::ordered_json obj;
        obj["qid"] = rec.qid;
        if (!config_digest.empty()) obj["config_digest"] = config_digest;
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : rec.chains) {
            nlohmann::ordered_json jc;
            jc["f1"] = c.f1;
            jc["f2"] = c.f2;
            jc["s1"] = c.s1;
            jc["s2"] = c.s2;
            jc["score"] = c.score;
            jc["source"] = to_string(c.source);
            arr.push_back(std::move(jc));
        }
        obj["chains"] = std::move(arr);
        out << obj.dump() << '\n';
    }
}

std::vector<QuestionChains> read_chains(std::istream& in, const std::string& source) {
    std::vector<QuestionChains> out;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto obj = nlohmann::json::parse(line);
            QuestionChains rec;
            rec.qid = obj.at("qid").get<std::string>();
            for (const auto& jc : obj.at("chains")) {
                ChainCandidate c;
                c.f1 = jc.at("f1").get<std::string>();
                c.f2 = jc.at("f2").get<std::string>();
                c.s1 = jc.at("s1").get<double>();
                c.s2 = jc.at("s2").get<double>();
                c.score = jc.at("score").get<double>();
                c.source = chain_source_from_string(jc.at("source").get<std::string>());
                rec.chains.push_back(std::move(c));
            }
            if (!seen.insert(rec.qid).second) throw DuplicateIdError(rec.qid);
            out.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, lineno, std::string("malformed chains record: ") + e.what());
        } catch (const PreconditionError& e) {
            throw ParseError(source, lineno, e.what());
        }
    }
    return out;
}

void save_chains(std::span<const QuestionChains> records, const std::string& path,
                 const std::string& config_digest) {
    io::write_atomic(path, [&](std::ostream& out) { write_chains(records, out, config_digest); });
}

std::vector<QuestionChains> load_chains(const std::string& path) {
    auto in = io::open_input(path);
    return read_chains(in, path);
}

}  // namespace hopchain
