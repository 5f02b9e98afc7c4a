#include <gtest/gtest.h>

#include <sstream>

#include "hopchain/dense_index.hpp"
#include "hopchain/error.hpp"
#include "hopchain/kernels.hpp"
#include "testkit.hpp"

using namespace hopchain;

namespace {

struct RandomIndex {
    DenseIndex index;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> vectors;
};

RandomIndex random_index(Rng& rng, std::size_t n, std::size_t dim) {
    RandomIndex r{DenseIndex(dim), {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "d%05zu", (i * 7919) % n);
        r.ids.emplace_back(id);
        r.vectors.push_back(testkit::random_vector(rng, dim));
        r.index.add(r.ids.back(), r.vectors.back());
    }
    return r;
}

}  // namespace

TEST(Mips, OrthonormalBasis) {
    DenseIndex idx(3);
    idx.add("a", std::vector<double>{1, 0, 0});
    idx.add("b", std::vector<double>{0, 1, 0});
    idx.add("c", std::vector<double>{0, 0, 1});
    const auto r = idx.mips_top_k(std::vector<double>{0, 1, 0}, 3);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0], (ScoredFact{"b", 1.0}));
    EXPECT_EQ(r[1], (ScoredFact{"a", 0.0}));
    EXPECT_EQ(r[2], (ScoredFact{"c", 0.0}));
}

TEST(Mips, TieBreaksById) {
    DenseIndex idx(2);
    idx.add("zeta", std::vector<double>{1, 1});
    idx.add("alpha", std::vector<double>{1, 1});
    const auto r = idx.mips_top_k(std::vector<double>{0.5, 2}, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].fact_id, "alpha");
}

TEST(Mips, MatchesOracle) {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        auto ri = random_index(rng, 50, 16);
        const auto q = testkit::random_vector(rng, 16);
        const auto want = testkit::mips_oracle(ri.ids, ri.vectors, q, 5);
        const auto got = ri.index.mips_top_k(q, 5);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].fact_id, want[i].fact_id);
            EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
        }
    }
}

TEST(Mips, ParallelEqualsSerialAcrossThreadCounts) {
    Rng rng(43);
    auto ri = random_index(rng, 3000, 24);
    const int saved = kernels::max_threads();
    for (int t : {1, 2, 3, 8}) {
        kernels::set_num_threads(t);
        for (int q = 0; q < 5; ++q) {
            const auto query = testkit::random_vector(rng, 24);
            FactIdSet excl{ri.ids[rng.below(ri.ids.size())]};
            for (std::size_t k : {1u, 10u, 100u, 5000u}) {
                EXPECT_EQ(ri.index.mips_top_k(query, k, excl), ri.index.mips_top_k_serial(query, k, excl));
            }
        }
    }
    kernels::set_num_threads(saved);
}

TEST(Mips, InnerProductKernelsAgree) {
    Rng rng(44);
    const std::size_t n = 777, dim = 13;
    std::vector<double> rows;
    for (std::size_t i = 0; i < n * dim; ++i) rows.push_back(rng.uniform(-1, 1));
    const auto q = testkit::random_vector(rng, dim);
    std::vector<double> a(n), b(n);
    kernels::inner_products_serial(rows, dim, q, a);
    kernels::inner_products_parallel(rows, dim, q, b);
    EXPECT_EQ(a, b);
}

TEST(Mips, ScalingQueryScalesScores) {
    Rng rng(47);
    auto ri = random_index(rng, 200, 8);
    const auto q = testkit::random_vector(rng, 8);
    auto q2 = q;
    for (auto& v : q2) v *= 4.0;  // power of two keeps the products exact
    const auto a = ri.index.mips_top_k(q, 20), b = ri.index.mips_top_k(q2, 20);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].fact_id, b[i].fact_id);
        EXPECT_NEAR(b[i].score, 4.0 * a[i].score, 1e-12);
    }
    auto q3 = q;
    for (auto& v : q3) v *= 0.37;
    const auto c = ri.index.mips_top_k(q3, 20);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(c[i].score, 0.37 * a[i].score, 1e-9);
}

TEST(Mips, ExcludedNeverReturned) {
    Rng rng(53);
    auto ri = random_index(rng, 100, 4);
    for (int trial = 0; trial < 50; ++trial) {
        FactIdSet excl;
        for (int i = 0; i < 30; ++i) excl.insert(ri.ids[rng.below(ri.ids.size())]);
        const auto r = ri.index.mips_top_k(testkit::random_vector(rng, 4), 100, excl);
        EXPECT_EQ(r.size(), 100 - excl.size());
        for (const auto& s : r) EXPECT_FALSE(excl.contains(s.fact_id));
    }
}

TEST(Mips, Preconditions) {
    DenseIndex idx(3);
    idx.add("a", std::vector<double>{1, 0, 0});
    EXPECT_THROW(idx.mips_top_k(std::vector<double>{1, 0}, 1), DimensionError);
    EXPECT_THROW(idx.mips_top_k(std::vector<double>{1, 0, 0}, 0), PreconditionError);
    EXPECT_THROW(idx.add("b", std::vector<double>{1, 0}), DimensionError);
    EXPECT_THROW(idx.add("a", std::vector<double>{1, 0, 0}), DuplicateIdError);
    EXPECT_THROW(idx.add("c", std::vector<double>{1, NAN, 0}), PreconditionError);
    EXPECT_THROW(DenseIndex(0), PreconditionError);
}

TEST(EmbeddingsFile, Shape) {
    std::istringstream in("#dim=4\nf1\t1 2 3 4\nf2\t0.5 0.25 -1 0\nf3\t0 0 0 1e-3\n");
    const auto idx = DenseIndex::read(in);
    EXPECT_EQ(idx.dim(), 4u);
    EXPECT_EQ(idx.size(), 3u);
    EXPECT_EQ(idx.at("f2")[2], -1.0);
}

TEST(EmbeddingsFile, WrongCountNamesLine) {
    std::istringstream in("#dim=4\nf1\t1 2 3 4\nf2\t1 2 3\n");
    try {
        DenseIndex::read(in, "emb.tsv");
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_NE(std::string(e.what()).find("emb.tsv:3"), std::string::npos) << e.what();
    }
}

TEST(EmbeddingsFile, HeaderOnlyAndBadHeader) {
    std::istringstream empty("#dim=7\n");
    const auto idx = DenseIndex::read(empty);
    EXPECT_EQ(idx.dim(), 7u);
    EXPECT_TRUE(idx.empty());
    std::istringstream bad("#dims=7\n");
    EXPECT_THROW(DenseIndex::read(bad), FormatError);
    std::istringstream none("f1\t1 2\n");
    EXPECT_THROW(DenseIndex::read(none), FormatError);
}

TEST(EmbeddingsFile, RoundTripIsExact) {
    Rng rng(59);
    auto ri = random_index(rng, 40, 9);
    testkit::TempDir dir;
    ri.index.save(dir.file("e.tsv"));
    const auto back = load_embeddings(dir.file("e.tsv"));
    ASSERT_EQ(back.size(), ri.index.size());
    for (std::size_t r = 0; r < back.size(); ++r) {
        EXPECT_EQ(back.id(r), ri.index.id(r));
        const auto a = back.row(r), b = ri.index.row(r);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
}
