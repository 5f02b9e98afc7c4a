#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hopchain {

struct Fact {
    std::string id;
    std::string text;
};

struct QAPair {
    std::string qid;
    std::string question;
    std::string answer;

    // Question and answer joined by a single space; the unit every Q-A query uses.
    std::string joined() const { return question + " " + answer; }
};

// Human-curated reference explanation for one question.
struct GoldChain {
    std::string qid;
    std::string f1;
    std::string f2;
};

using TokenSet = std::set<std::string, std::less<>>;

/// Lowercases ASCII, splits on every ASCII character that is not a letter or
/// digit, drops stopwords. Bytes >= 0x80 are kept as word characters so UTF-8
/// words survive intact.
///
/// With `stem` enabled, plural suffixes are folded using the S-stemmer rules
/// (ies -> y, es -> e, s -> "" with the usual exceptions). Stopword matching
/// happens before stemming.
class Tokenizer {
public:
    Tokenizer();
    explicit Tokenizer(std::vector<std::string> stopwords, bool stem = false);

    /// Token sequence with multiplicity, in text order.
    std::vector<std::string> terms(std::string_view text) const;
    TokenSet tokenize(std::string_view text) const;

    bool is_stopword(std::string_view token) const;
    bool stems() const noexcept { return stem_; }
    /// Sorted, deduplicated.
    const std::vector<std::string>& stopwords() const noexcept { return stopwords_; }

private:
    std::vector<std::string> stopwords_;
    bool stem_ = false;
};

/// The built-in English stopword list (33 function words).
const std::vector<std::string>& default_stopwords();

/// One token per line; blank lines and surrounding whitespace are ignored.
std::vector<std::string> load_stopwords(const std::string& path);

TokenSet tokenize(std::string_view text, const Tokenizer& tokenizer = Tokenizer{});

bool overlaps(const TokenSet& a, const TokenSet& b);

TokenSet set_union(const TokenSet& a, const TokenSet& b);

class Corpus {
public:
    Corpus() = default;
    /// Throws DuplicateIdError or PreconditionError (empty id/text).
    explicit Corpus(std::vector<Fact> facts);

    const std::vector<Fact>& facts() const noexcept { return facts_; }
    std::size_t size() const noexcept { return facts_.size(); }
    bool empty() const noexcept { return facts_.empty(); }

    const Fact* find(std::string_view id) const;
    /// Throws PreconditionError if absent.
    const Fact& at(std::string_view id) const;

private:
    std::vector<Fact> facts_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// JSON Lines: one `{"id": ..., "text": ...}` object per line. Blank lines
/// are skipped.
Corpus read_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus(const std::string& path);
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::string& path);

struct QuestionRecord {
    QAPair qa;
    std::optional<GoldChain> gold;
};

/// JSON Lines with `qid`, `question`, `answer` and optional `fact1`/`fact2`
/// (the gold chain). Duplicate qids are rejected.
std::vector<QuestionRecord> read_questions(std::istream& in,
                                           const std::string& source = "<stream>");
std::vector<QuestionRecord> load_questions(const std::string& path);
void write_questions(const std::vector<QuestionRecord>& records, std::ostream& out);

std::vector<GoldChain> gold_chains(const std::vector<QuestionRecord>& records);

}  // namespace hopchain
