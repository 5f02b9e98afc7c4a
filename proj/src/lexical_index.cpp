#include "hopchain/lexical_index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"

namespace hopchain {

namespace {

constexpr const char* kIndexMagic = "HOPCHAIN-BM25-INDEX v1";

void check_params(const Bm25Params& p) {
    if (!(p.k1 >= 0.0) || !std::isfinite(p.k1)) {
        throw PreconditionError("bm25 k1 must be a finite value >= 0");
    }
    if (!(p.b >= 0.0 && p.b <= 1.0)) throw PreconditionError("bm25 b must lie in [0, 1]");
}

bool sorted_intersect(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            return true;
        }
    }
    return false;
}

}  // namespace

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
    const double n = static_cast<double>(doc_count);
    const double df = static_cast<double>(doc_freq);
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

InvertedIndex InvertedIndex::build(const Corpus& corpus, Bm25Params params, Tokenizer tokenizer) {
    if (corpus.empty()) throw PreconditionError("cannot build an index over an empty corpus");
    std::vector<std::string> ids;
    std::vector<std::vector<std::pair<std::string, std::uint32_t>>> docs;
    ids.reserve(corpus.size());
    docs.reserve(corpus.size());
    for (const Fact& f : corpus.facts()) {
        std::map<std::string, std::uint32_t> tf;
        for (auto& t : tokenizer.terms(f.text)) ++tf[std::move(t)];
        ids.push_back(f.id);
        docs.emplace_back(tf.begin(), tf.end());
    }
    return from_docs(std::move(ids), std::move(docs), params, std::move(tokenizer));
}

InvertedIndex InvertedIndex::from_docs(
    std::vector<std::string> fact_ids,
    std::vector<std::vector<std::pair<std::string, std::uint32_t>>> docs, Bm25Params params,
    Tokenizer tokenizer) {
    check_params(params);
    if (fact_ids.empty()) throw PreconditionError("cannot build an index over an empty corpus");

    InvertedIndex idx;
    idx.params_ = params;
    idx.tokenizer_ = std::move(tokenizer);
    idx.fact_ids_ = std::move(fact_ids);
    for (std::size_t i = 0; i < idx.fact_ids_.size(); ++i) {
        if (!idx.ordinals_.emplace(idx.fact_ids_[i], static_cast<std::uint32_t>(i)).second) {
            throw DuplicateIdError(idx.fact_ids_[i]);
        }
    }

    std::set<std::string, std::less<>> vocab;
    for (const auto& d : docs) {
        for (const auto& [t, tf] : d) vocab.insert(t);
    }
    idx.terms_.assign(vocab.begin(), vocab.end());
    for (std::size_t t = 0; t < idx.terms_.size(); ++t) {
        idx.term_ids_.emplace(idx.terms_[t], static_cast<std::uint32_t>(t));
    }
    idx.postings_.resize(idx.terms_.size());
    idx.doc_terms_.resize(docs.size());
    idx.doc_lengths_.assign(docs.size(), 0);

    std::uint64_t total = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto& dt = idx.doc_terms_[d];
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        for (const auto& [t, tf] : docs[d]) {
            if (tf == 0) continue;
            pairs.emplace_back(idx.term_ids_.at(t), tf);
        }
        std::sort(pairs.begin(), pairs.end());
        std::uint32_t len = 0;
        for (const auto& [tid, tf] : pairs) {
            dt.term_ids.push_back(tid);
            dt.tfs.push_back(tf);
            // docs are visited in ascending ordinal order, so postings stay sorted
            idx.postings_[tid].push_back({static_cast<std::uint32_t>(d), tf});
            len += tf;
        }
        idx.doc_lengths_[d] = len;
        total += len;
    }
    idx.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(docs.size());

    idx.length_norm_.assign(docs.size(), 0.0);
    if (idx.avg_doc_length_ > 0.0) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const double dl = static_cast<double>(idx.doc_lengths_[d]);
            idx.length_norm_[d] =
                params.k1 * (1.0 - params.b + params.b * dl / idx.avg_doc_length_);
        }
    }
    return idx;
}

std::optional<std::size_t> InvertedIndex::ordinal(std::string_view fact_id) const {
    auto it = ordinals_.find(std::string(fact_id));
    if (it == ordinals_.end()) return std::nullopt;
    return it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view token) const {
    auto it = term_ids_.find(std::string(token));
    if (it == term_ids_.end()) return {};
    return postings_[it->second];
}

TokenSet InvertedIndex::fact_tokens(std::size_t ordinal) const {
    TokenSet out;
    for (auto tid : doc_terms_.at(ordinal).term_ids) out.insert(terms_[tid]);
    return out;
}

TokenSet InvertedIndex::fact_tokens(std::string_view fact_id) const {
    auto o = ordinal(fact_id);
    if (!o) throw PreconditionError("unknown fact id \"" + std::string(fact_id) + "\"");
    return fact_tokens(*o);
}

std::vector<std::uint32_t> InvertedIndex::known_term_ids(const TokenSet& tokens) const {
    std::vector<std::uint32_t> ids;
    for (const auto& t : tokens) {
        auto it = term_ids_.find(t);
        if (it != term_ids_.end()) ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<ScoredFact> InvertedIndex::score_and_select(
    const TokenSet& query_tokens, std::size_t k,
    const std::vector<std::vector<std::uint32_t>>* must,
    const std::vector<std::uint8_t>* excluded) const {
    if (k == 0) throw PreconditionError("top-n must be >= 1");

    const double k1p1 = params_.k1 + 1.0;
    std::vector<double> acc(doc_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& token : query_tokens) {
        auto it = term_ids_.find(token);
        if (it == term_ids_.end()) continue;
        const auto& plist = postings_[it->second];
        const double idf = bm25_idf(doc_count(), plist.size());
        for (const Posting& p : plist) {
            if (acc[p.doc] == 0.0) touched.push_back(p.doc);
            const double tf = static_cast<double>(p.tf);
            acc[p.doc] += idf * (tf * k1p1) / (tf + length_norm_[p.doc]);
        }
    }

    std::vector<ScoredFact> hits;
    hits.reserve(touched.size());
    for (auto d : touched) {
        if (!(acc[d] > 0.0)) continue;
        if (excluded != nullptr && (*excluded)[d]) continue;
        if (must != nullptr) {
            bool ok = true;
            for (const auto& m : *must) {
                if (!sorted_intersect(doc_terms_[d].term_ids, m)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
        }
        hits.push_back({fact_ids_[d], acc[d]});
    }
    keep_top(hits, k);
    return hits;
}

std::vector<ScoredFact> InvertedIndex::query(const TokenSet& query_tokens, std::size_t top_n) const {
    return score_and_select(query_tokens, top_n, nullptr, nullptr);
}

std::vector<ScoredFact> InvertedIndex::query_constrained(const TokenSet& query_tokens,
                                                         std::span<const TokenSet> must_overlap,
                                                         const FactIdSet& exclude,
                                                         std::size_t top_m) const {
    std::vector<std::vector<std::uint32_t>> must;
    must.reserve(must_overlap.size());
    for (const auto& s : must_overlap) {
        must.push_back(known_term_ids(s));
        if (must.back().empty()) {
            if (top_m == 0) throw PreconditionError("top-m must be >= 1");
            return {};
        }
    }
    std::vector<std::uint8_t> excluded(doc_count(), 0);
    for (const auto& id : exclude) {
        if (auto o = ordinal(id)) excluded[*o] = 1;
    }
    return score_and_select(query_tokens, top_m, &must, &excluded);
}

void InvertedIndex::write(std::ostream& out) const {
    out << kIndexMagic << '\n';
    nlohmann::json header{{"k1", params_.k1},
                          {"b", params_.b},
                          {"stem", tokenizer_.stems()},
                          {"stopwords", tokenizer_.stopwords()},
                          {"doc_count", doc_count()}};
    out << header.dump() << '\n';
    for (std::size_t d = 0; d < doc_count(); ++d) {
        nlohmann::json terms = nlohmann::json::array();
        const auto& dt = doc_terms_[d];
        for (std::size_t i = 0; i < dt.term_ids.size(); ++i) {
            terms.push_back({terms_[dt.term_ids[i]], dt.tfs[i]});
        }
        out << nlohmann::json{{"id", fact_ids_[d]}, {"terms", std::move(terms)}}.dump() << '\n';
    }
}

InvertedIndex InvertedIndex::read(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || line != kIndexMagic) {
        throw FormatError(source, 1, std::string("expected header \"") + kIndexMagic + "\"");
    }
    std::size_t lineno = 1;
    try {
        if (!std::getline(in, line)) throw FormatError(source, 2, "missing index header record");
        ++lineno;
        auto header = nlohmann::json::parse(line);
        Bm25Params params{header.at("k1").get<double>(), header.at("b").get<double>()};
        Tokenizer tok(header.at("stopwords").get<std::vector<std::string>>(),
                      header.at("stem").get<bool>());
        const auto n = header.at("doc_count").get<std::size_t>();

        std::vector<std::string> ids;
        std::vector<std::vector<std::pair<std::string, std::uint32_t>>> docs;
        ids.reserve(n);
        docs.reserve(n);
        while (ids.size() < n && std::getline(in, line)) {
            ++lineno;
            auto rec = nlohmann::json::parse(line);
            ids.push_back(rec.at("id").get<std::string>());
            auto& d = docs.emplace_back();
            for (const auto& pair : rec.at("terms")) {
                d.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::uint32_t>());
            }
        }
        if (ids.size() != n) throw FormatError(source, lineno, "truncated index snapshot");
        return from_docs(std::move(ids), std::move(docs), params, std::move(tok));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(source, lineno, std::string("malformed index record: ") + e.what());
    }
}

void InvertedIndex::save(const std::string& path) const {
    io::write_atomic(path, [&](std::ostream& out) { write(out); });
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    auto in = io::open_input(path);
    return read(in, path);
}

}  // namespace hopchain
