#include <gtest/gtest.h>

#include <sstream>

#include "hopchain/error.hpp"
#include "hopchain/eval.hpp"
#include "testkit.hpp"

using namespace hopchain;

namespace {

ChainCandidate chain(std::string f1, std::string f2) {
    return {std::move(f1), std::move(f2), 0.5, 0.5, 1.0, ChainSource::Syntactic};
}

EvalReport report_with_rate(const std::vector<std::string>& qids, std::size_t hits) {
    std::vector<QuestionChains> preds;
    std::vector<GoldChain> gold;
    for (std::size_t i = 0; i < qids.size(); ++i) {
        gold.push_back({qids[i], "a", "b"});
        preds.push_back({qids[i], {i < hits ? chain("a", "b") : chain("a", "c")}});
    }
    return gold_retrieval_rate(preds, gold, 10);
}

}  // namespace

TEST(GoldRate, ReverseFormCounts) {
    const std::vector<QuestionChains> preds{{"q", {chain("x", "y"), chain("y", "z"), chain("B", "A")}}};
    const std::vector<GoldChain> gold{{"q", "A", "B"}};
    const auto r = gold_retrieval_rate(preds, gold, 10);
    EXPECT_TRUE(r.per_question.at("q").hit);
    EXPECT_EQ(r.per_question.at("q").rank_of_gold, 3u);
    EXPECT_EQ(r.retrieval_rate, 1.0);
    const auto tight = gold_retrieval_rate(preds, gold, 2);
    EXPECT_FALSE(tight.per_question.at("q").hit);
    EXPECT_EQ(tight.per_question.at("q").rank_of_gold, 3u);
}

TEST(GoldRate, HalfOfFour) {
    const auto r = report_with_rate({"a", "b", "c", "d"}, 2);
    EXPECT_EQ(r.hits, 2u);
    EXPECT_EQ(r.retrieval_rate, 0.5);
}

TEST(GoldRate, ExactPairOnly) {
    const std::vector<QuestionChains> preds{{"q", {chain("A", "C"), chain("C", "B")}}};
    const std::vector<GoldChain> gold{{"q", "A", "B"}};
    EXPECT_FALSE(gold_retrieval_rate(preds, gold, 10).per_question.at("q").hit);
}

TEST(GoldRate, MissingQuestionsAreMisses) {
    const std::vector<QuestionChains> preds{{"q1", {chain("A", "B")}}};
    const std::vector<GoldChain> gold{{"q1", "A", "B"}, {"q2", "A", "B"}};
    const auto r = gold_retrieval_rate(preds, gold, 10);
    EXPECT_EQ(r.retrieval_rate, 0.5);
    EXPECT_TRUE(r.per_question.at("q2").missing);
    EXPECT_EQ(r.missing(), 1u);
}

TEST(GoldRate, Preconditions) {
    EXPECT_THROW(gold_retrieval_rate({}, {}, 0), PreconditionError);
    const std::vector<GoldChain> dup{{"q", "a", "b"}, {"q", "a", "c"}};
    EXPECT_THROW(gold_retrieval_rate({}, dup, 1), PreconditionError);
}

TEST(GoldRate, Properties) {
    Rng rng(83);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<QuestionChains> preds;
        std::vector<GoldChain> gold, reversed;
        for (int q = 0; q < 20; ++q) {
            const std::string qid = "q" + std::to_string(q);
            QuestionChains qc{qid, {}};
            for (std::size_t i = 0, n = rng.below(15); i < n; ++i)
                qc.chains.push_back(chain(testkit::pseudo_word(rng.below(4)), testkit::pseudo_word(rng.below(4))));
            if (rng.below(5) > 0) preds.push_back(qc);
            const auto a = testkit::pseudo_word(rng.below(4)), b = testkit::pseudo_word(4 + rng.below(2));
            gold.push_back({qid, a, b});
            reversed.push_back({qid, b, a});
        }
        double prev = 0.0;
        for (std::size_t k = 1; k <= 16; ++k) {
            const auto r = gold_retrieval_rate(preds, gold, k);
            EXPECT_EQ(r, gold_retrieval_rate(preds, reversed, k));
            EXPECT_GE(r.retrieval_rate, prev);
            prev = r.retrieval_rate;
            std::size_t hits = 0;
            for (const auto& [qid, o] : r.per_question)
                if (o.rank_of_gold && *o.rank_of_gold <= k) ++hits;
            EXPECT_EQ(hits, r.hits);
            EXPECT_NEAR(r.retrieval_rate, static_cast<double>(r.hits) / r.questions(), 1e-12);
        }
    }
}

TEST(Compare, TableDelta) {
    const std::vector<std::string> qids{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
    std::vector<NamedReport> runs{{"syntactic", report_with_rate(qids, 3)},
                                  {"expanded", report_with_rate(qids, 5)}};
    runs[0].report.retrieval_rate = 0.311;
    runs[1].report.retrieval_rate = 0.465;
    const auto t = compare_runs(runs);
    ASSERT_EQ(t.deltas.size(), 1u);
    EXPECT_NEAR(t.deltas[0].delta, 0.154, 1e-12);
    EXPECT_EQ(format_percent(t.deltas[0].delta, true), "+15.4");
    EXPECT_EQ(format_percent(0.465), "46.5");
    EXPECT_EQ(t.best, 1u);
    EXPECT_TRUE(t.rows[1].best);
    EXPECT_FALSE(t.rows[0].best);
    std::ostringstream text;
    write_comparison_text(t, text);
    EXPECT_NE(text.str().find("+15.4"), std::string::npos);
}

TEST(Compare, SingleAndIdentical) {
    const auto r = report_with_rate({"a", "b"}, 1);
    EXPECT_TRUE(compare_runs(std::vector<NamedReport>{{"only", r}}).deltas.empty());
    const auto t = compare_runs(std::vector<NamedReport>{{"x", r}, {"y", r}});
    ASSERT_EQ(t.deltas.size(), 1u);
    EXPECT_EQ(t.deltas[0].delta, 0.0);
    EXPECT_EQ(format_percent(t.deltas[0].delta, true), "+0.0");
}

TEST(Compare, MismatchListsDifference) {
    const std::vector<NamedReport> runs{{"x", report_with_rate({"a", "b"}, 1)},
                                        {"y", report_with_rate({"b", "c"}, 1)}};
    try {
        compare_runs(runs);
        FAIL() << "expected SetMismatchError";
    } catch (const SetMismatchError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("a"), std::string::npos);
        EXPECT_NE(msg.find("c"), std::string::npos);
    }
}

TEST(ReportFile, RoundTripBothFormats) {
    const std::vector<QuestionChains> preds{{"q1", {chain("A", "B")}}, {"q2", {chain("x", "y")}}};
    const std::vector<GoldChain> gold{{"q1", "A", "B"}, {"q2", "A", "B"}, {"q3", "A", "B"}};
    const auto r = gold_retrieval_rate(preds, gold, 10);
    std::stringstream json, tsv;
    write_report_json(r, json, "d");
    write_report_tsv(r, tsv);
    EXPECT_EQ(read_report(json), r);
    EXPECT_EQ(read_report(tsv), r);
}
