#include "hopchain/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "hopchain/error.hpp"
#include "hopchain/io.hpp"

namespace hopchain {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c >= 0x80;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Harman's S-stemmer.
std::string s_stem(std::string w) {
    if (ends_with(w, "ies") && !ends_with(w, "eies") && !ends_with(w, "aies")) {
        w.replace(w.size() - 3, 3, "y");
    } else if (ends_with(w, "es") && !ends_with(w, "aes") && !ends_with(w, "ees") &&
               !ends_with(w, "oes")) {
        w.pop_back();
    } else if (ends_with(w, "s") && !ends_with(w, "us") && !ends_with(w, "ss")) {
        w.pop_back();
    }
    return w;
}

std::string require_string(const nlohmann::json& obj, const char* field,
                           const std::string& source, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_string()) {
        throw ParseError(source, line, std::string("missing string field \"") + field + "\"");
    }
    return it->get<std::string>();
}

template <typename Fn>
void for_each_json_line(std::istream& in, const std::string& source, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, lineno, "invalid JSON");
        }
        if (!obj.is_object()) throw ParseError(source, lineno, "expected a JSON object");
        fn(obj, lineno);
    }
}

}  // namespace

const std::vector<std::string>& default_stopwords() {
    static const std::vector<std::string> words = {
        "a",    "an",   "and",  "are",  "as",   "at",    "be",   "been", "by",
        "can",  "did",  "do",   "does", "for",  "from",  "has",  "have", "in",
        "is",   "it",   "its",  "of",   "on",   "or",    "that", "the",  "this",
        "to",   "was",  "were", "what", "which", "with",
    };
    return words;
}

Tokenizer::Tokenizer() : Tokenizer(default_stopwords(), false) {}

Tokenizer::Tokenizer(std::vector<std::string> stopwords, bool stem)
    : stopwords_(std::move(stopwords)), stem_(stem) {
    for (auto& w : stopwords_) {
        std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) {
            return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
        });
    }
    std::sort(stopwords_.begin(), stopwords_.end());
    stopwords_.erase(std::unique(stopwords_.begin(), stopwords_.end()), stopwords_.end());
}

bool Tokenizer::is_stopword(std::string_view token) const {
    return std::binary_search(stopwords_.begin(), stopwords_.end(), token);
}

std::vector<std::string> Tokenizer::terms(std::string_view text) const {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (!is_stopword(cur)) {
            out.push_back(stem_ ? s_stem(std::move(cur)) : std::move(cur));
            if (out.back().empty()) out.pop_back();
        }
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

TokenSet Tokenizer::tokenize(std::string_view text) const {
    auto t = terms(text);
    return TokenSet(std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
}

std::vector<std::string> load_stopwords(const std::string& path) {
    auto in = io::open_input(path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        words.push_back(line.substr(b, e - b + 1));
    }
    return words;
}

TokenSet tokenize(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.tokenize(text);
}

bool overlaps(const TokenSet& a, const TokenSet& b) {
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

TokenSet set_union(const TokenSet& a, const TokenSet& b) {
    TokenSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

Corpus::Corpus(std::vector<Fact> facts) : facts_(std::move(facts)) {
    by_id_.reserve(facts_.size());
    for (std::size_t i = 0; i < facts_.size(); ++i) {
        const Fact& f = facts_[i];
        if (f.id.empty()) throw PreconditionError("fact at position " + std::to_string(i) + " has an empty id");
        if (f.text.empty()) throw PreconditionError("fact \"" + f.id + "\" has empty text");
        if (!by_id_.emplace(f.id, i).second) throw DuplicateIdError(f.id);
    }
}

const Fact* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &facts_[it->second];
}

const Fact& Corpus::at(std::string_view id) const {
    const Fact* f = find(id);
    if (f == nullptr) throw PreconditionError("unknown fact id \"" + std::string(id) + "\"");
    return *f;
}

Corpus read_corpus(std::istream& in, const std::string& source) {
    std::vector<Fact> facts;
    std::unordered_set<std::string> seen;
    for_each_json_line(in, source, [&](const nlohmann::json& obj, std::size_t line) {
        Fact f{require_string(obj, "id", source, line), require_string(obj, "text", source, line)};
        if (f.id.empty()) throw ParseError(source, line, "empty id");
        if (f.text.empty()) throw ParseError(source, line, "empty text");
        if (!seen.insert(f.id).second) throw DuplicateIdError(f.id);
        facts.push_back(std::move(f));
    });
    return Corpus(std::move(facts));
}

Corpus load_corpus(const std::string& path) {
    auto in = io::open_input(path);
    return read_corpus(in, path);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    for (const Fact& f : corpus.facts()) {
        out << nlohmann::json{{"id", f.id}, {"text", f.text}}.dump() << '\n';
    }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    io::write_atomic(path, [&](std::ostream& out) { write_corpus(corpus, out); });
}

std::vector<QuestionRecord> read_questions(std::istream& in, const std::string& source) {
    std::vector<QuestionRecord> out;
    std::unordered_set<std::string> seen;
    for_each_json_line(in, source, [&](const nlohmann::json& obj, std::size_t line) {
        QuestionRecord rec;
        rec.qa.qid = require_string(obj, "qid", source, line);
        rec.qa.question = require_string(obj, "question", source, line);
        rec.qa.answer = require_string(obj, "answer", source, line);
        if (rec.qa.qid.empty() || rec.qa.question.empty() || rec.qa.answer.empty()) {
            throw ParseError(source, line, "qid, question and answer must be non-empty");
        }
        const bool has1 = obj.contains("fact1");
        const bool has2 = obj.contains("fact2");
        if (has1 != has2) throw ParseError(source, line, "fact1 and fact2 must appear together");
        if (has1) {
            GoldChain g{rec.qa.qid, require_string(obj, "fact1", source, line),
                        require_string(obj, "fact2", source, line)};
            if (g.f1 == g.f2) throw ParseError(source, line, "gold chain repeats a fact");
            rec.gold = std::move(g);
        }
        if (!seen.insert(rec.qa.qid).second) throw DuplicateIdError(rec.qa.qid);
        out.push_back(std::move(rec));
    });
    return out;
}

std::vector<QuestionRecord> load_questions(const std::string& path) {
    auto in = io::open_input(path);
    return read_questions(in, path);
}

void write_questions(const std::vector<QuestionRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        nlohmann::json obj{{"qid", r.qa.qid}, {"question", r.qa.question}, {"answer", r.qa.answer}};
        if (r.gold) {
            obj["fact1"] = r.gold->f1;
            obj["fact2"] = r.gold->f2;
        }
        out << obj.dump() << '\n';
    }
}

std::vector<GoldChain> gold_chains(const std::vector<QuestionRecord>& records) {
    std::vector<GoldChain> out;
    for (const auto& r : records) {
        if (r.gold) out.push_back(*r.gold);
    }
    return out;
}

}  // namespace hopchain
