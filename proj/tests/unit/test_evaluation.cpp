#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ima/evaluation.hpp"
#include "ima/prompts.hpp"

using namespace ima;

namespace {

// Two-sided p by enumerating every way to label na of the pooled values as
// sample a. Midranks are computed directly with floating averages.
double brute_force_p(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto n = pooled.size();
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0;
        double equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            less += pooled[j] < pooled[i] ? 1 : 0;
            equal += pooled[j] == pooled[i] ? 1 : 0;
        }
        ranks[i] = less + (equal + 1) / 2.0;
    }
    const double expected = static_cast<double>(a.size()) * static_cast<double>(n + 1) / 2.0;
    double observed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        observed += ranks[i];
    }
    const double distance = std::fabs(observed - expected);
    long long extreme = 0;
    long long total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != a.size()) {
            continue;
        }
        double w = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                w += ranks[i];
            }
        }
        ++total;
        // Rank sums are multiples of 0.5, so this comparison is exact.
        if (std::fabs(w - expected) >= distance) {
            ++extreme;
        }
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

std::string scorecard_json(int s, int r, int u, int c, int d)
{
    return "{\"Scalability\": {\"score\": " + std::to_string(s) + ", \"justification\": \"a\"}, " +
           "\"Reliability\": {\"score\": " + std::to_string(r) + ", \"justification\": \"b\"}, " +
           "\"Usability\": {\"score\": " + std::to_string(u) + ", \"justification\": \"c\"}, " +
           "\"Cost-effectiveness\": {\"score\": " + std::to_string(c) + ", \"justification\": \"d\"}, " +
           "\"Documentation\": {\"score\": " + std::to_string(d) + ", \"justification\": \"e\"}}";
}

RunReport report(std::string mode, std::int64_t tokens, std::int64_t turns, std::optional<int> score = {})
{
    RunReport r;
    r.run_id = mode + std::to_string(tokens);
    r.mode = std::move(mode);
    r.total_tokens = tokens;
    r.total_turns = turns;
    if (score) {
        r.scorecard = parse_scorecard(scorecard_json(*score, *score, *score, *score, *score));
    }
    return r;
}

}  // namespace

TEST(JudgePrompt, IsVerbatimWithDesignAppended)
{
    const auto p = render_judge_prompt("design {\"Platform\": \"AWS\"}");
    EXPECT_EQ(p.find(prompts::kJudge), 0u);
    EXPECT_NE(p.find("Be critical and harsh"), std::string::npos);
    EXPECT_NE(p.find("design {\"Platform\": \"AWS\"}"), std::string::npos);
    EXPECT_NE(p.find("Provide your evaluation in the following format in a json dict"), std::string::npos);
}

TEST(JudgePrompt, EmptyDesignIsRejected)
{
    EXPECT_THROW(render_judge_prompt(""), PreconditionError);
    EXPECT_THROW(render_judge_prompt("  \n"), PreconditionError);
}

TEST(ParseScorecard, WellFormed)
{
    const auto card = parse_scorecard(scorecard_json(8, 5, 4, 6, 4));
    EXPECT_EQ(card.at(Metric::scalability).score, 8);
    EXPECT_EQ(card.at(Metric::reliability).score, 5);
    EXPECT_EQ(card.at(Metric::usability).score, 4);
    EXPECT_EQ(card.at(Metric::cost_effectiveness).score, 6);
    EXPECT_EQ(card.at(Metric::documentation).score, 4);
    EXPECT_EQ(card.at(Metric::scalability).justification, "a");
}

TEST(ParseScorecard, SurroundingProseAndKeyVariants)
{
    const auto card = parse_scorecard(
        "Here is my evaluation {not json}:\n```json\n{\"1. scalability\": {\"Score\": \"7/10\"}, \"RELIABILITY\": 6,"
        " \"usability\": {\"score\": 5.0}, \"cost effectiveness\": {\"score\": \"4\"}, \"Documentation\": {\"score\": 3}}"
        "\n```\nThanks.");
    EXPECT_EQ(card.at(Metric::scalability).score, 7);
    EXPECT_EQ(card.at(Metric::reliability).score, 6);
    EXPECT_EQ(card.at(Metric::usability).score, 5);
    EXPECT_EQ(card.at(Metric::cost_effectiveness).score, 4);
    EXPECT_EQ(card.at(Metric::documentation).score, 3);
}

TEST(ParseScorecard, MissingMetric)
{
    try {
        parse_scorecard(R"({"Scalability": 1, "Reliability": 1, "Usability": 1, "Cost-effectiveness": 1})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseErrorKind::missing);
        EXPECT_NE(std::string(e.what()).find("documentation"), std::string::npos);
    }
}

TEST(ParseScorecard, OutOfRangeAndNonInteger)
{
    for (const char* bad : {"11", "0", "7.5", "\"high\"", "true"}) {
        const auto text = std::string("{\"Scalability\": ") + bad +
                          R"(, "Reliability": 1, "Usability": 1, "Cost-effectiveness": 1, "Documentation": 1})";
        try {
            parse_scorecard(text);
            FAIL() << bad;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.kind(), ParseErrorKind::range) << bad;
        }
    }
}

TEST(ParseScorecard, NoObject)
{
    try {
        parse_scorecard("I cannot evaluate this.");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.kind(), ParseErrorKind::shape);
    }
}

TEST(ParseScorecard, RoundTripOfSyntheticCards)
{
    std::mt19937 rng(17);
    for (int i = 0; i < 200; ++i) {
        JudgeScorecard card;
        for (auto m : kAllMetrics) {
            card.scores[m] = {static_cast<int>(1 + rng() % 10), "because " + std::to_string(rng() % 100)};
        }
        EXPECT_EQ(parse_scorecard(to_json(card).dump(2)), card);
    }
}

TEST(JudgeDesign, SendsPromptWithJudgePurpose)
{
    ChatExchange seen;
    FunctionBackend judge([&](const ChatExchange& e) {
        seen = e;
        return ChatResult{scorecard_json(8, 5, 4, 6, 4), 0, 0, 0};
    });
    const auto card = judge_design(judge, "the design");
    EXPECT_EQ(seen.purpose, Purpose::judge);
    EXPECT_EQ(seen.user_text, render_judge_prompt("the design"));
    EXPECT_EQ(card.at(Metric::scalability).score, 8);
}

TEST(TokenEfficiency, Examples)
{
    EXPECT_NEAR(token_efficiency(0.0833, 140418), 5.933e-7, 1e-10);
    EXPECT_NEAR(token_efficiency(0.0583, 107043), 5.446e-7, 1e-9);
    EXPECT_EQ(token_efficiency(0.0, 12345), 0.0);
    EXPECT_THROW(token_efficiency(1.0, 0.0), PreconditionError);
    EXPECT_THROW(token_efficiency(1.0, -5.0), PreconditionError);
}

TEST(RankSum, IdenticalSamples)
{
    const std::vector<double> a{1, 2, 3};
    const auto r = rank_sum_test(a, a);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(RankSum, SeparatedSamplesOfThree)
{
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{10, 11, 12};
    const auto r = rank_sum_test(a, b);
    EXPECT_EQ(r.statistic, 6.0);
    // 2 of the 20 labelings are as extreme.
    EXPECT_NEAR(r.p_value, 0.1, 1e-15);
    EXPECT_NEAR(r.p_value, brute_force_p(a, b), 1e-12);
}

TEST(RankSum, TableSizedSamplesAgainstOracle)
{
    const std::vector<double> a{5, 7, 7, 8, 6, 5, 9, 7, 6, 8};
    const std::vector<double> b{4, 5, 6, 4, 5, 3, 6, 5, 4};
    const auto r = rank_sum_test(a, b);
    EXPECT_TRUE(r.exact);
    EXPECT_NEAR(r.p_value, brute_force_p(a, b), 1e-12);
}

TEST(RankSum, RandomSmallSamplesAgainstOracle)
{
    std::mt19937 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 2 + rng() % 11;
        const auto na = 1 + rng() % (n - 1);
        std::vector<double> a;
        std::vector<double> b;
        for (std::size_t i = 0; i < n; ++i) {
            (i < na ? a : b).push_back(static_cast<double>(rng() % 6));
        }
        const auto r = rank_sum_test(a, b);
        ASSERT_NEAR(r.p_value, brute_force_p(a, b), 1e-12) << "trial " << trial;
        EXPECT_NEAR(rank_sum_test(b, a).p_value, r.p_value, 1e-15);
    }
}

TEST(RankSum, NormalApproximationMatchesReferenceValues)
{
    // Reference values from a tie-corrected normal approximation without
    // continuity correction.
    const std::vector<double> a{1, 2, 2, 3, 5, 8, 8, 9, 10, 12, 13};
    const std::vector<double> b{2, 4, 4, 6, 7, 9, 11, 14, 15, 15, 16, 18};
    const auto r = rank_sum_test(a, b);
    EXPECT_FALSE(r.exact);
    EXPECT_NEAR(r.p_value, 0.11582830174207717, 1e-12);

    std::vector<double> lo;
    std::vector<double> hi;
    for (int i = 1; i <= 11; ++i) {
        lo.push_back(i);
        hi.push_back(i + 11);
    }
    EXPECT_NEAR(rank_sum_test(lo, hi).p_value, 7.10526328860018e-05, 1e-15);
}

TEST(RankSum, ConstantLargeSamplesGiveOne)
{
    const std::vector<double> a(15, 3.0);
    const std::vector<double> b(15, 3.0);
    EXPECT_EQ(rank_sum_test(a, b).p_value, 1.0);
}

TEST(RankSum, EmptySampleIsRejected)
{
    const std::vector<double> a{1.0};
    EXPECT_THROW(rank_sum_test(a, {}), PreconditionError);
    EXPECT_THROW(rank_sum_test({}, a), PreconditionError);
}

TEST(DoubledMidranks, Ties)
{
    const std::vector<double> pooled{3, 1, 3, 2};
    EXPECT_EQ(doubled_midranks(pooled), (std::vector<long long>{7, 2, 7, 4}));
}

TEST(AggregateRuns, SingleReport)
{
    const std::vector<RunReport> reports{report("intrinsic", 1000, 16, 7)};
    const auto t = aggregate_runs(reports);
    ASSERT_EQ(t.groups.size(), 1u);
    EXPECT_EQ(*t.groups[0].find("tokens")->mean, 1000.0);
    EXPECT_EQ(*t.groups[0].find("turns")->median, 16.0);
    EXPECT_EQ(*t.groups[0].find("documentation")->mean, 7.0);
    EXPECT_TRUE(t.comparisons.empty());
    EXPECT_FALSE(t.token_change_pct.has_value());
}

TEST(AggregateRuns, TokenChangeFromTableMeans)
{
    const std::vector<RunReport> reports{report("intrinsic", 47830, 16), report("baseline", 36077, 16)};
    const auto t = aggregate_runs(reports);
    ASSERT_EQ(t.groups.size(), 2u);
    EXPECT_EQ(t.groups[0].label, "baseline");
    ASSERT_TRUE(t.token_change_pct.has_value());
    EXPECT_EQ(format_percent_change(*t.token_change_pct), "+32.6%");
    EXPECT_NEAR(*t.token_change_pct, (47830.0 / 36077.0 - 1.0) * 100.0, 1e-12);
}

TEST(AggregateRuns, MeansAndMediansByHand)
{
    const std::vector<RunReport> reports{report("baseline", 100, 10, 4), report("baseline", 300, 14, 6),
                                         report("baseline", 200, 12, 8), report("intrinsic", 400, 16, 9)};
    const auto t = aggregate_runs(reports);
    const auto& base = t.groups[0];
    EXPECT_EQ(base.runs, 3u);
    EXPECT_DOUBLE_EQ(*base.find("tokens")->mean, 200.0);
    EXPECT_DOUBLE_EQ(*base.find("turns")->median, 12.0);
    EXPECT_DOUBLE_EQ(*base.find("scalability")->mean, 6.0);
    EXPECT_DOUBLE_EQ(*t.token_change_pct, 100.0);
}

TEST(AggregateRuns, EqualConstantScoresGiveOne)
{
    std::vector<RunReport> reports;
    for (int i = 0; i < 5; ++i) {
        reports.push_back(report("baseline", 100, 12, 6));
        reports.push_back(report("intrinsic", 100, 12, 6));
    }
    const auto t = aggregate_runs(reports);
    for (const auto& c : t.comparisons) {
        ASSERT_TRUE(c.p_value.has_value()) << c.metric;
        EXPECT_DOUBLE_EQ(*c.p_value, 1.0) << c.metric;
    }
}

TEST(AggregateRuns, UnjudgedRunsLeaveScoresEmpty)
{
    const std::vector<RunReport> reports{report("baseline", 10, 1), report("intrinsic", 20, 1)};
    const auto t = aggregate_runs(reports);
    EXPECT_FALSE(t.groups[0].find("usability")->mean.has_value());
    for (const auto& c : t.comparisons) {
        if (c.metric == "usability") {
            EXPECT_FALSE(c.p_value.has_value());
        }
    }
    EXPECT_NE(format_summary_table(t).find("tokens"), std::string::npos);
    EXPECT_TRUE(to_json(t).contains("groups"));
}

TEST(AggregateRuns, EmptyIsRejected)
{
    EXPECT_THROW(aggregate_runs({}), PreconditionError);
}

TEST(FormatPercentChange, Signs)
{
    EXPECT_EQ(format_percent_change(32.5767), "+32.6%");
    EXPECT_EQ(format_percent_change(-4.04), "-4.0%");
    EXPECT_EQ(format_percent_change(0.0), "+0.0%");
}
