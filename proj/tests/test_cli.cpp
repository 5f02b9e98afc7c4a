#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hopchain/chain_builder.hpp"
#include "hopchain/cli.hpp"
#include "hopchain/config.hpp"
#include "hopchain/eval.hpp"
#include "testkit.hpp"

using namespace hopchain;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        planted_ = testkit::planted_syntactic(20, 200);
        save_corpus(planted_.corpus, dir_.file("facts.jsonl"));
        std::ofstream q(dir_.file("questions.jsonl"));
        write_questions(planted_.questions, q);
    }

    std::string path(const std::string& name) const { return dir_.file(name); }

    testkit::TempDir dir_;
    testkit::PlantedSet planted_;
};

}  // namespace

TEST_F(CliTest, SyntacticPlantedRanksGoldFirst) {
    auto r = run({"generate", "--mode", "syntactic", "--preset", "eqasc_baseline", "--corpus", path("facts.jsonl"),
                  "--questions", path("questions.jsonl"), "--out", path("chains.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto chains = load_chains(path("chains.jsonl"));
    ASSERT_EQ(chains.size(), planted_.questions.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const auto& gold = *planted_.questions[i].gold;
        ASSERT_EQ(chains[i].qid, gold.qid);
        ASSERT_FALSE(chains[i].chains.empty());
        EXPECT_EQ(chain_key(chains[i].chains[0]), chain_key(gold.f1, gold.f2)) << gold.qid;
    }

    r = run({"eval", "--chains", path("chains.jsonl"), "--questions", path("questions.jsonl"), "--k", "10",
             "--out", path("report.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("100.0%"), std::string::npos) << r.out;
    const auto report = load_report(path("report.json"));
    EXPECT_EQ(report.retrieval_rate, 1.0);
}

TEST_F(CliTest, EvalOfGoldForwardChains) {
    std::vector<QuestionChains> preds;
    for (const auto& q : planted_.questions) preds.push_back({q.qa.qid, {{q.gold->f1, q.gold->f2, 1, 1, 2}}});
    save_chains(preds, path("gold_chains.jsonl"));
    const auto r = run({"eval", "--chains", path("gold_chains.jsonl"), "--questions", path("questions.jsonl"),
                        "--k", "10", "--format", "tsv", "--out", path("r.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(load_report(path("r.tsv")).retrieval_rate, 1.0);
}

TEST_F(CliTest, HybridWithoutEmbeddingsIsConfigError) {
    const auto r = run({"generate", "--mode", "hybrid", "--corpus", path("facts.jsonl"), "--questions",
                        path("questions.jsonl"), "--out", path("c.jsonl")});
    EXPECT_EQ(r.code, cli::kConfig);
    EXPECT_EQ(r.err.rfind("hopchain: error[config]: ", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run({"generate", "--bogus"}).code, cli::kUsage);
    EXPECT_EQ(run({}).code, cli::kUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    const auto io = run({"build-index", "--corpus", path("missing.jsonl"), "--out", path("i.idx")});
    EXPECT_EQ(io.code, cli::kIo);
    EXPECT_EQ(io.err.rfind("hopchain: error[io]: ", 0), 0u) << io.err;
    EXPECT_EQ(run({"generate", "--preset", "nope", "--corpus", path("facts.jsonl")}).code, cli::kConfig);
    EXPECT_EQ(run({"generate", "--merge-fraction", "1.5", "--corpus", path("facts.jsonl"), "--questions",
                   path("questions.jsonl"), "--out", path("c.jsonl")})
                  .code,
              cli::kConfig);
    testkit::write_file(path("dup.jsonl"), "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
    const auto dup = run({"build-index", "--corpus", path("dup.jsonl"), "--out", path("i.idx")});
    EXPECT_EQ(dup.code, cli::kIo);
    EXPECT_NE(dup.err.find("duplicate-id"), std::string::npos);
}

TEST_F(CliTest, HelpListsEveryFlag) {
    const std::map<std::string, std::vector<std::string>> flags{
        {"build-index", {"--corpus", "--out", "--stopwords", "--stem", "--k1", "--b"}},
        {"import-embeddings", {"--in", "--out", "--corpus", "--dim"}},
        {"train-reencoder", {"--fact-embeddings", "--query-embeddings", "--questions", "--out", "--loss-out",
                             "--epochs", "--learning-rate", "--batch-size", "--hidden", "--objective",
                             "--both-orientations"}},
        {"generate", {"--mode", "--corpus", "--questions", "--out", "--index", "--fact-embeddings",
                      "--query-embeddings", "--reencoder", "--threads", "--n-first", "--m-second", "--k-chains",
                      "--merge-fraction"}},
        {"rerank", {"--chains", "--scores", "--k", "--out"}},
        {"build-rerank-dataset", {"--chains", "--questions", "--corpus", "--out", "--negatives-per-positive"}},
        {"eval", {"--chains", "--questions", "--k", "--out", "--format"}},
        {"report", {"--run", "--format", "--out"}},
    };
    for (const auto& [cmd, list] : flags) {
        const auto r = run({cmd, "--help"});
        ASSERT_EQ(r.code, 0) << cmd;
        for (const auto& f : list) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
        for (const char* common : {"--config", "--preset", "--seed"})
            EXPECT_NE(r.out.find(common), std::string::npos) << cmd << " " << common;
    }
    const auto top = run({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const auto& [cmd, list] : flags) EXPECT_NE(top.out.find(cmd), std::string::npos);
}

TEST_F(CliTest, ConfigFromEnvironment) {
    EngineConfig c;
    c.pipeline.k_chains = 1;
    c.paths.corpus = path("facts.jsonl");
    c.paths.questions = path("questions.jsonl");
    c.paths.output = path("env_chains.jsonl");
    save_config(c, path("cfg.json"));
    ::setenv(cli::kConfigEnv, path("cfg.json").c_str(), 1);
    const auto r = run({"generate"});
    ::unsetenv(cli::kConfigEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& q : load_chains(path("env_chains.jsonl"))) EXPECT_LE(q.chains.size(), 1u);

    ::setenv(cli::kConfigEnv, path("absent.json").c_str(), 1);
    EXPECT_EQ(run({"generate"}).code, cli::kConfig);
    ::unsetenv(cli::kConfigEnv);
}

TEST_F(CliTest, OutputIndependentOfThreadsAndIndexSnapshot) {
    ASSERT_EQ(run({"build-index", "--corpus", path("facts.jsonl"), "--out", path("facts.idx")}).code, 0);
    const std::vector<std::string> base{"generate", "--preset", "expanded", "--corpus", path("facts.jsonl"),
                                        "--questions", path("questions.jsonl")};
    auto a = base, b = base, c = base;
    a.insert(a.end(), {"--threads", "1", "--out", path("a.jsonl")});
    b.insert(b.end(), {"--threads", "4", "--out", path("b.jsonl")});
    c.insert(c.end(), {"--index", path("facts.idx"), "--out", path("c.jsonl")});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    ASSERT_EQ(run(c).code, 0);
    const auto ta = testkit::read_file(path("a.jsonl"));
    EXPECT_EQ(ta, testkit::read_file(path("b.jsonl")));
    EXPECT_EQ(ta, testkit::read_file(path("c.jsonl")));
    EXPECT_NE(ta.find("config_digest"), std::string::npos);
}

TEST_F(CliTest, RerankAndDataset) {
    ASSERT_EQ(run({"generate", "--preset", "expanded", "--corpus", path("facts.jsonl"), "--questions",
                   path("questions.jsonl"), "--out", path("pool.jsonl")})
                  .code,
              0);
    auto r = run({"rerank", "--chains", path("pool.jsonl"), "--k", "3", "--out", path("top3.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pool = load_chains(path("pool.jsonl"));
    const auto top = load_chains(path("top3.jsonl"));
    ASSERT_EQ(top.size(), pool.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        ASSERT_LE(top[i].chains.size(), 3u);
        for (std::size_t j = 0; j < top[i].chains.size(); ++j) EXPECT_EQ(top[i].chains[j], pool[i].chains[j]);
    }

    // Scores that invert the retrieval order.
    std::ofstream s(path("scores.tsv"));
    for (const auto& q : pool)
        for (std::size_t j = 0; j < q.chains.size(); ++j)
            s << q.qid << '\t' << chain_key(q.chains[j]) << '\t' << static_cast<double>(j) << '\n';
    s.close();
    r = run({"rerank", "--chains", path("pool.jsonl"), "--scores", path("scores.tsv"), "--k", "1", "--out",
             path("flip.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto flip = load_chains(path("flip.jsonl"));
    for (std::size_t i = 0; i < flip.size(); ++i)
        if (!pool[i].chains.empty()) EXPECT_EQ(flip[i].chains[0], pool[i].chains.back());

    r = run({"build-rerank-dataset", "--chains", path("pool.jsonl"), "--questions", path("questions.jsonl"),
             "--corpus", path("facts.jsonl"), "--out", path("ds.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path("ds.jsonl"));
    std::size_t valid = 0, invalid = 0;
    for (std::string line; std::getline(in, line);) {
        const auto j = nlohmann::json::parse(line);
        (j.at("label") == "valid" ? valid : invalid) += 1;
    }
    std::size_t available = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& gold = *planted_.questions[i].gold;
        std::size_t eligible = 0;
        for (const auto& c : pool[i].chains) eligible += chain_key(c) != chain_key(gold.f1, gold.f2);
        available += std::min<std::size_t>(4, eligible);
    }
    EXPECT_EQ(valid, 2 * planted_.questions.size());
    EXPECT_EQ(invalid, available);
    EXPECT_EQ(r.err.find("warning") != std::string::npos, available < 4 * planted_.questions.size());
}

TEST_F(CliTest, ReportComparesRuns) {
    for (const char* preset : {"eqasc_baseline", "expanded"}) {
        const std::string p = preset;
        ASSERT_EQ(run({"generate", "--preset", p, "--corpus", path("facts.jsonl"), "--questions",
                       path("questions.jsonl"), "--out", path(p + ".jsonl")})
                      .code,
                  0);
        ASSERT_EQ(run({"eval", "--chains", path(p + ".jsonl"), "--questions", path("questions.jsonl"), "--out",
                       path(p + ".json")})
                      .code,
                  0);
    }
    auto r = run({"report", "--run", "baseline=" + path("eqasc_baseline.json"), "--run",
                  "expanded=" + path("expanded.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("baseline"), std::string::npos);
    EXPECT_NE(r.out.find("+0.0"), std::string::npos) << r.out;
    r = run({"report", "--format", "json", "--run", "x=" + path("expanded.json")});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(nlohmann::json::accept(r.out));
    EXPECT_EQ(run({"report", "--run", "broken"}).code, cli::kConfig);
}

TEST_F(CliTest, ImportEmbeddingsAndTraining) {
    const auto sem = testkit::planted_semantic(4, 4, 30);
    save_corpus(sem.corpus, path("sfacts.jsonl"));
    {
        std::ofstream q(path("squestions.jsonl"));
        write_questions(sem.questions, q);
    }
    sem.fact_embeddings.save(path("raw_facts.tsv"));
    sem.query_embeddings.save(path("raw_queries.tsv"));
    auto r = run({"import-embeddings", "--in", path("raw_facts.tsv"), "--out", path("facts.tsv"), "--corpus",
                  path("sfacts.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(run({"import-embeddings", "--in", path("raw_facts.tsv"), "--out", path("x.tsv"), "--dim", "3"}).code,
              cli::kIo);
    r = run({"train-reencoder", "--fact-embeddings", path("facts.tsv"), "--query-embeddings",
             path("raw_queries.tsv"), "--questions", path("squestions.jsonl"), "--epochs", "20", "--out",
             path("model.json"), "--loss-out", path("loss.tsv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(testkit::read_file(path("model.json")).find("config_digest"), std::string::npos);
    r = run({"generate", "--mode", "hybrid", "--preset", "hybrid", "--corpus", path("sfacts.jsonl"), "--questions",
             path("squestions.jsonl"), "--fact-embeddings", path("facts.tsv"), "--query-embeddings",
             path("raw_queries.tsv"), "--reencoder", path("model.json"), "--out", path("h.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
}
