#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ima/backend.hpp"
#include "ima/report.hpp"

namespace ima {

// Judge rubric followed by the design under evaluation. Throws
// PreconditionError for an empty design.
std::string render_judge_prompt(std::string_view design_text);

// Reads the first JSON object in `judge_response`. Metric keys match
// case-insensitively with spaces and hyphens treated as underscores; each
// metric is {"score": n, "justification": "..."} or a bare score.
JudgeScorecard parse_scorecard(std::string_view judge_response);

JudgeScorecard judge_design(Backend& judge, std::string_view design_text, const Sampling& sampling = {});

// Average reward per token.
double token_efficiency(double avg_reward, double avg_tokens);

struct RankSumResult {
    double statistic = 0.0;  // sum of the (mid)ranks of sample_a in the pooled sample
    double p_value = 1.0;    // two-sided
    bool exact = false;
};

// Largest pooled size evaluated by exact enumeration.
inline constexpr std::size_t kExactRankSumLimit = 20;

// Wilcoxon rank-sum / Mann-Whitney test with midranks for ties. The two-sided
// p-value is P(|W - E[W]| >= |w - E[W]|) under random relabeling: exact for a
// pooled size <= kExactRankSumLimit, otherwise the tie-corrected normal
// approximation without continuity correction.
RankSumResult rank_sum_test(std::span<const double> sample_a, std::span<const double> sample_b);

// Midranks of the pooled sample, doubled so they are integers.
std::vector<long long> doubled_midranks(std::span<const double> pooled);

struct MetricSummary {
    std::string metric;
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> median;
};

struct GroupSummary {
    std::string label;
    std::size_t runs = 0;
    std::vector<MetricSummary> metrics;  // tokens, turns, then the judge metrics

    const MetricSummary* find(std::string_view metric) const;
};

struct MetricComparison {
    std::string metric;
    std::optional<double> mean_a;
    std::optional<double> mean_b;
    std::optional<double> p_value;
};

struct SummaryTable {
    std::vector<GroupSummary> groups;
    std::vector<MetricComparison> comparisons;  // groups[1] relative to groups[0]
    std::optional<double> token_change_pct;     // (mean tokens b / mean tokens a - 1) * 100
};

GroupSummary summarize_group(std::string label, std::span<const RunReport> reports);

// Groups reports by mode. With a "baseline" and an "intrinsic" group the
// comparison is intrinsic relative to baseline; with exactly two other groups
// it follows order of first appearance.
SummaryTable aggregate_runs(std::span<const RunReport> reports);

SummaryTable compare_groups(std::string label_a, std::span<const RunReport> group_a, std::string label_b,
                            std::span<const RunReport> group_b);

// "+32.6%"
std::string format_percent_change(double pct);

nlohmann::ordered_json to_json(const SummaryTable& table);
std::string format_summary_table(const SummaryTable& table);

}  // namespace ima
