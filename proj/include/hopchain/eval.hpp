#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopchain/chain_builder.hpp"
#include "hopchain/corpus.hpp"

namespace hopchain {

struct QuestionOutcome {
    bool hit = false;
    std::optional<std::size_t> rank_of_gold;  // 1-based, over the full prediction list
    bool missing = false;                     // no predictions for this qid

    friend bool operator==(const QuestionOutcome&, const QuestionOutcome&) = default;
};

struct EvalReport {
    std::map<std::string, QuestionOutcome> per_question;
    std::size_t k_used = 0;
    std::size_t hits = 0;
    double retrieval_rate = 0.0;  // hits / questions; 0 when there are no questions

    std::size_t questions() const noexcept { return per_question.size(); }
    std::size_t missing() const;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Gold retrieval rate: a question counts when its gold pair, in either
/// orientation, is among its top-k predicted chains. Questions absent from
/// `predictions` are misses flagged `missing`.
///
/// Throws PreconditionError if k < 1 or a qid repeats in `gold`.
EvalReport gold_retrieval_rate(std::span<const QuestionChains> predictions,
                               std::span<const GoldChain> gold, std::size_t k);

struct NamedReport {
    std::string name;
    EvalReport report;
};

struct ComparisonTable {
    struct Row {
        std::string name;
        double rate;
        std::size_t hits;
        std::size_t questions;
        bool best;
    };
    struct Delta {
        std::string from;
        std::string to;
        double delta;  // rate(to) - rate(from)
    };
    std::vector<Row> rows;
    std::vector<Delta> deltas;  // every ordered pair (i < j) in input order
    std::size_t best = 0;       // first row with the highest rate
};

/// Throws SetMismatchError, listing the symmetric difference, when the
/// reports do not cover the same questions.
ComparisonTable compare_runs(std::span<const NamedReport> reports);

/// Rate as a percentage with one decimal ("46.5"); deltas carry a sign.
std::string format_percent(double fraction, bool signed_value = false);

void write_report_json(const EvalReport& report, std::ostream& out,
                       const std::string& config_digest = {});
/// `#k=<k>` then `<qid>\t<hit 0|1>\t<rank or ->\t<missing 0|1>` per question.
void write_report_tsv(const EvalReport& report, std::ostream& out);
/// Accepts either format.
EvalReport read_report(std::istream& in, const std::string& source = "<stream>");
EvalReport load_report(const std::string& path);

void write_comparison_text(const ComparisonTable& table, std::ostream& out);
void write_comparison_json(const ComparisonTable& table, std::ostream& out);
void write_comparison_tsv(const ComparisonTable& table, std::ostream& out);

}  // namespace hopchain
