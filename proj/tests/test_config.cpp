#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "cmstein/config.hpp"
#include "cmstein/io.hpp"
#include "support/oracles.hpp"

using namespace cmstein;

namespace {

std::vector<std::size_t> sample_counts(const DegreeSequence& d, std::size_t samples, Seed seed) {
    const auto all = oracle::all_matchings(static_cast<std::uint32_t>(d.total()));
    const auto idx = oracle::index_of(all);
    const auto layout = std::make_shared<const BallLayout>(d);
    std::vector<std::size_t> counts(all.size(), 0);
    for (std::size_t s = 0; s < samples; ++s) {
        RandomStream rng(seed, {s});
        const auto g = sample_configuration(layout, rng);
        ++counts.at(idx.at(oracle::Partner(g.partners().begin(), g.partners().end())));
    }
    return counts;
}

} // namespace

TEST(Oracle, EnumeratesDoubleFactorialMatchings) {
    for (std::uint32_t m : {2U, 4U, 6U, 8U, 10U})
        EXPECT_EQ(static_cast<double>(oracle::all_matchings(m).size()), oracle::double_factorial_odd(m));
}

TEST(SampleConfiguration, SingleMatching) {
    const auto g = sample_configuration(DegreeSequence({1, 1}), Seed{3});
    EXPECT_EQ(g.partner(0), 1U);
    EXPECT_EQ(g.partner(1), 0U);
}

TEST(SampleConfiguration, FourLeavesUniform) {
    const auto counts = sample_counts(DegreeSequence({1, 1, 1, 1}), 30000, 101);
    ASSERT_EQ(counts.size(), 3U);
    EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.001);
}

TEST(SampleConfiguration, LoopIsALegalOutcome) {
    const DegreeSequence d({2, 1, 1});
    const auto counts = sample_counts(d, 30000, 102);
    EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.001);
    // the loop matching {(1,2),(3,4)} is the first enumerated one
    EXPECT_GT(counts[0], 9000U);
}

TEST(SampleConfiguration, UniformForAllSmallSequences) {
    // every degree sequence with m <= 8 on up to four vertices, sorted
    std::vector<std::vector<Degree>> seqs{{2}, {4}, {1, 3}, {2, 2}, {3, 3}, {1, 1, 2}, {2, 2, 2}, {1, 2, 3},
                                          {1, 1, 1, 1}, {2, 2, 2, 2}, {1, 1, 3, 3}, {1, 1, 2, 4}, {8}};
    for (const auto& s : seqs) {
        const DegreeSequence d(s);
        const auto counts = sample_counts(d, 20000, 103 + d.total());
        EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.001) << "m=" << d.total();
    }
}

TEST(SampleConfiguration, InvolutionInvariant) {
    const DegreeSequence d({3, 1, 4, 1, 5, 2});
    for (Seed s = 0; s < 50; ++s) {
        const auto g = sample_configuration(d, s);
        for (Ball b = 0; b < g.num_balls(); ++b) {
            ASSERT_NE(g.partner(b), b);
            ASSERT_EQ(g.partner(g.partner(b)), b);
        }
    }
}

TEST(Configuration, BallLayoutIsContiguous) {
    const DegreeSequence d({2, 0, 4});
    BallLayout layout(d);
    EXPECT_EQ(layout.first_ball(0), 0U);
    EXPECT_EQ(layout.first_ball(1), 2U);
    EXPECT_EQ(layout.end_ball(1), 2U);
    EXPECT_EQ(layout.first_ball(2), 2U);
    EXPECT_EQ(layout.colour_of(4), 2U);
}

TEST(Configuration, RejectsNonInvolution) {
    const DegreeSequence d({1, 1, 1, 1});
    EXPECT_THROW(Configuration(d, std::vector<Ball>{1, 0, 3, 3}), Error);
    EXPECT_THROW(Configuration(d, std::vector<Ball>{1, 2, 3, 0}), Error);
    EXPECT_THROW(Configuration(d, std::vector<Ball>{1, 0}), Error);
}

TEST(Restrict, PathExamples) {
    // d = (1,2,1), matching {(1,2),(3,4)} in 1-based labels
    const DegreeSequence d({1, 2, 1});
    const std::vector<std::pair<Ball, Ball>> pairs{{0, 1}, {2, 3}};
    const auto g = Configuration::from_pairs(d, pairs);

    const std::vector<Colour> c12{0, 1};
    const auto sub = restrict(g, c12);
    EXPECT_EQ(sub.internal_pairs, (std::vector<std::pair<Ball, Ball>>{{0, 1}}));
    EXPECT_EQ(sub.unpaired, (std::vector<Ball>{2}));
    EXPECT_EQ(sub.boundary_size(), 1U);

    const std::vector<Colour> c3{2};
    const auto comp = restrict(g, c3);
    EXPECT_TRUE(comp.internal_pairs.empty());
    EXPECT_EQ(comp.unpaired, (std::vector<Ball>{3}));
    EXPECT_EQ(comp.boundary_size(), sub.boundary_size());

    const std::vector<Colour> all{0, 1, 2};
    const auto full = restrict(g, all);
    EXPECT_EQ(full.internal_pairs.size(), 2U);
    EXPECT_TRUE(full.unpaired.empty());
}

TEST(Restrict, ComplementHasSameBoundaryAndPartitionsBalls) {
    const DegreeSequence d({3, 1, 2, 2, 1, 3, 2});
    std::mt19937_64 gen(5);
    for (Seed s = 0; s < 200; ++s) {
        const auto g = sample_configuration(d, s);
        std::vector<Colour> c, cc;
        for (Colour v = 0; v < d.size(); ++v) (gen() % 2 ? c : cc).push_back(v);
        const auto a = restrict(g, c), b = restrict(g, cc);
        EXPECT_EQ(a.boundary_size(), b.boundary_size());
        std::uint64_t balls = 0;
        for (Colour v : c) balls += d[v];
        EXPECT_EQ(2 * a.internal_pairs.size() + a.unpaired.size(), balls);
    }
}

TEST(Restrict, ConditionalIndependenceAndUniformity) {
    // For C = {1,2} on d = (2,1,2,1,2): given s(C), the two restrictions are
    // independent and each is uniform on its enumerated support.
    const DegreeSequence d({2, 1, 2, 1, 2});
    const std::vector<Colour> c{0, 1}, cc{2, 3, 4};
    auto key = [](const SubConfiguration& s) {
        std::string k;
        for (auto [a, b] : s.internal_pairs) k += std::to_string(a) + "-" + std::to_string(b) + ",";
        k += "|";
        for (auto b : s.unpaired) k += std::to_string(b) + ",";
        return k;
    };
    // support by s, from brute-force enumeration
    std::map<std::size_t, std::set<std::string>> support_c, support_cc;
    for (const auto& p : oracle::all_matchings(static_cast<std::uint32_t>(d.total()))) {
        const Configuration g(d, std::vector<Ball>(p.begin(), p.end()));
        const auto a = restrict(g, c), b = restrict(g, cc);
        support_c[a.boundary_size()].insert(key(a));
        support_cc[b.boundary_size()].insert(key(b));
    }
    std::map<std::size_t, std::map<std::pair<std::string, std::string>, std::size_t>> joint;
    const auto layout = std::make_shared<const BallLayout>(d);
    for (std::size_t i = 0; i < 100000; ++i) {
        RandomStream rng(777, {i});
        const auto g = sample_configuration(layout, rng);
        const auto a = restrict(g, c), b = restrict(g, cc);
        ++joint[a.boundary_size()][{key(a), key(b)}];
    }
    for (const auto& [s, cells] : joint) {
        const auto& rows = support_c.at(s);
        const auto& cols = support_cc.at(s);
        std::vector<std::vector<std::size_t>> table(rows.size(), std::vector<std::size_t>(cols.size(), 0));
        std::vector<std::size_t> row_counts(rows.size(), 0), col_counts(cols.size(), 0);
        for (const auto& [k, count] : cells) {
            const auto i = static_cast<std::size_t>(std::distance(rows.begin(), rows.find(k.first)));
            const auto j = static_cast<std::size_t>(std::distance(cols.begin(), cols.find(k.second)));
            ASSERT_LT(i, rows.size());
            ASSERT_LT(j, cols.size());
            table[i][j] += count;
            row_counts[i] += count;
            col_counts[j] += count;
        }
        EXPECT_GT(oracle::chi_square_independence_p(table), 0.001) << "s=" << s;
        EXPECT_GT(oracle::chi_square_uniform_p(row_counts), 0.001) << "s=" << s;
        EXPECT_GT(oracle::chi_square_uniform_p(col_counts), 0.001) << "s=" << s;
    }
}

TEST(ConfigurationJson, RoundTripAndOneBasedLabels) {
    const DegreeSequence d({1, 2, 1});
    const std::vector<std::pair<Ball, Ball>> pairs{{0, 1}, {2, 3}};
    const auto g = Configuration::from_pairs(d, pairs);
    const auto j = io::to_json(g);
    EXPECT_EQ(j.dump(), R"({"degrees":[1,2,1],"pairs":[[1,2],[3,4]]})");
    for (Seed s = 0; s < 20; ++s) {
        const auto h = sample_configuration(DegreeSequence({3, 2, 2, 1, 4}), s);
        EXPECT_EQ(io::configuration_from_json(io::to_json(h)), h);
    }
}

TEST(ConfigurationJson, ReaderRejectsBrokenMatchings) {
    using io::json;
    EXPECT_THROW(io::configuration_from_json(json::parse(R"({"degrees":[1,1],"pairs":[[1,1]]})")), Error);
    EXPECT_THROW(io::configuration_from_json(json::parse(R"({"degrees":[1,1,1,1],"pairs":[[1,2],[2,3]]})")), Error);
    EXPECT_THROW(io::configuration_from_json(json::parse(R"({"degrees":[1,1],"pairs":[[1,3]]})")), Error);
    EXPECT_THROW(io::configuration_from_json(json::parse(R"({"degrees":[1,1,1,1],"pairs":[[1,2]]})")), Error);
}
