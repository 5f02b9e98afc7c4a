#include "hopchain/reranker.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"
#include "hopchain/random.hpp"

namespace hopchain {

void ScoreTable::set(std::string_view qid, std::string_view f1, std::string_view f2, double score) {
    if (!std::isfinite(score)) throw PreconditionError("non-finite chain score");
    scores_[{std::string(qid), chain_key(f1, f2)}] = score;
}

void ScoreTable::set_max(std::string_view qid, std::string_view f1, std::string_view f2, double score) {
    if (!std::isfinite(score)) throw PreconditionError("non-finite chain score");
    auto [it, fresh] = scores_.try_emplace({std::string(qid), chain_key(f1, f2)}, score);
    if (!fresh) it->second = std::max(it->second, score);
}

std::optional<double> ScoreTable::find(std::string_view qid, std::string_view f1,
                                       std::string_view f2) const {
    auto it = scores_.find({std::string(qid), chain_key(f1, f2)});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

ScoreTable read_scores(std::istream& in, const std::string& source) {
    ScoreTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
            throw ParseError(source, lineno, "expected <qid>\\t<f1>|<f2>\\t<score>");
        }
        const std::string qid = line.substr(0, t1);
        const std::string key = line.substr(t1 + 1, t2 - t1 - 1);
        const auto bar = key.find('|');
        if (qid.empty() || bar == std::string::npos || bar == 0 || bar + 1 == key.size() ||
            key.find('|', bar + 1) != std::string::npos) {
            throw ParseError(source, lineno, "malformed chain key \"" + key + "\"");
        }
        const std::string score_text = line.substr(t2 + 1);
        char* end = nullptr;
        errno = 0;
        const double score = std::strtod(score_text.c_str(), &end);
        if (score_text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(score)) {
            throw ParseError(source, lineno, "invalid score \"" + score_text + "\"");
        }
        const auto f1 = key.substr(0, bar);
        const auto f2 = key.substr(bar + 1);
        if (table.find(qid, f1, f2)) throw ParseError(source, lineno, "duplicate chain " + key);
        table.set(qid, f1, f2, score);
    }
    return table;
}

ScoreTable load_scores(const std::string& path) {
    auto in = io::open_input(path);
    return read_scores(in, path);
}

void write_scores(const ScoreTable& table, std::ostream& out) {
    for (const auto& [k, score] : table.entries()) {
        out << k.first << '\t' << k.second << '\t' << io::format_double(score) << '\n';
    }
}

std::vector<ChainCandidate> rerank(std::span<const ChainCandidate> candidates,
                                   const ScoreTable& scores, std::string_view qid, std::size_t k) {
    if (k == 0) throw PreconditionError("rerank k must be >= 1");
    struct Slot {
        std::size_t pos;
        std::optional<double> score;
    };
    std::vector<Slot> slots;
    slots.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        slots.push_back({i, scores.find(qid, candidates[i].f1, candidates[i].f2)});
    }
    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
        return a.score.has_value() && *a.score > *b.score;
    });
    std::vector<ChainCandidate> out;
    std::unordered_set<std::string> seen;
    for (const auto& s : slots) {
        if (out.size() == k) break;
        if (!seen.insert(chain_key(candidates[s.pos])).second) continue;
        out.push_back(candidates[s.pos]);
    }
    return out;
}

ScoreTable baseline_scores(std::string_view qid, std::span<const ChainCandidate> candidates) {
    ScoreTable table;
    for (const auto& c : candidates) table.set_max(qid, c.f1, c.f2, c.score);
    return table;
}

RerankDataset build_rerank_dataset(
    std::span<const GoldChain> gold, std::span<const QAPair> questions,
    const std::unordered_map<std::string, std::vector<ChainCandidate>>& pools, const Corpus& corpus,
    std::size_t negatives_per_positive, std::uint64_t seed) {
    if (negatives_per_positive == 0) throw PreconditionError("negatives_per_positive must be >= 1");
    std::unordered_map<std::string, const QAPair*> by_qid;
    for (const auto& q : questions) by_qid.emplace(q.qid, &q);

    RerankDataset ds;
    for (const auto& g : gold) {
        auto pool_it = pools.find(g.qid);
        if (pool_it == pools.end()) throw PreconditionError("no candidate pool for question \"" + g.qid + "\"");
        auto qa_it = by_qid.find(g.qid);
        if (qa_it == by_qid.end()) throw PreconditionError("no question text for \"" + g.qid + "\"");
        const QAPair& qa = *qa_it->second;

        auto row = [&](const std::string& f1, const std::string& f2, ChainLabel label) {
            return RerankDatasetRecord{qa.qid, qa.question, qa.answer, f1, f2,
                                       corpus.at(f1).text, corpus.at(f2).text, label};
        };
        ds.records.push_back(row(g.f1, g.f2, ChainLabel::Valid));
        ds.records.push_back(row(g.f2, g.f1, ChainLabel::Valid));

        const std::string gold_key = chain_key(g.f1, g.f2);
        std::vector<const ChainCandidate*> eligible;
        std::unordered_set<std::string> seen{gold_key};
        for (const auto& c : pool_it->second) {
            if (c.f1 == c.f2) continue;
            if (seen.insert(chain_key(c)).second) eligible.push_back(&c);
        }

        const std::size_t wanted = negatives_per_positive * 2;
        const std::size_t take = std::min(wanted, eligible.size());
        if (take < wanted) {
            ++ds.short_pools;
            ds.missing_negatives += wanted - take;
        }
        Rng rng(derive_seed(seed, "rerank.negatives/" + g.qid));
        for (std::size_t i = 0; i < take; ++i) {
            std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);
            ds.records.push_back(row(eligible[i]->f1, eligible[i]->f2, ChainLabel::Invalid));
        }
    }
    return ds;
}

void write_rerank_dataset(std::span<const RerankDatasetRecord> records, std::ostream& out,
                          const std::string& config_digest) {
    for (const auto& r : records) {
        nlohmann::ordered_json obj;
        obj["qid"] = r.qid;
        obj["question"] = r.question;
        obj["answer"] = r.answer;
        obj["f1"] = r.f1;
        obj["f2"] = r.f2;
        obj["f1_text"] = r.f1_text;
        obj["f2_text"] = r.f2_text;
        obj["label"] = r.label == ChainLabel::Valid ? "valid" : "invalid";
        if (!config_digest.empty()) obj["config_digest"] = config_digest;
        out << obj.dump() << '\n';
    }
}

std::vector<RerankDatasetRecord> read_rerank_dataset(std::istream& in, const std::string& source) {
    std::vector<RerankDatasetRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto obj = nlohmann::json::parse(line);
            RerankDatasetRecord r;
            r.qid = obj.at("qid").get<std::string>();
            r.question = obj.at("question").get<std::string>();
            r.answer = obj.at("answer").get<std::string>();
            r.f1 = obj.at("f1").get<std::string>();
            r.f2 = obj.at("f2").get<std::string>();
            r.f1_text = obj.at("f1_text").get<std::string>();
            r.f2_text = obj.at("f2_text").get<std::string>();
            const auto label = obj.at("label").get<std::string>();
            if (label != "valid" && label != "invalid") {
                throw ParseError(source, lineno, "label must be valid or invalid");
            }
            r.label = label == "valid" ? ChainLabel::Valid : ChainLabel::Invalid;
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source, lineno, std::string("malformed dataset record: ") + e.what());
        }
    }
    return out;
}

}  // namespace hopchain
