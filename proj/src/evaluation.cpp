#include "ima/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "ima/errors.hpp"
#include "ima/prompts.hpp"
#include "ima/text.hpp"

namespace ima {

std::string render_judge_prompt(std::string_view design_text)
{
    if (trim(design_text).empty()) {
        throw PreconditionError("render_judge_prompt: design text is empty");
    }
    std::string prompt(prompts::kJudge);
    prompt += prompts::kJudgeDesignHeader;
    prompt += design_text;
    return prompt;
}

// ---------------------------------------------------------------------------
// Scorecard parsing

namespace {

// End (one past) of the balanced object starting at `open`, or npos.
std::size_t matching_brace(std::string_view text, std::size_t open)
{
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (auto i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) {
                return i + 1;
            }
        }
    }
    return std::string_view::npos;
}

std::string normalize_key(std::string_view key)
{
    auto k = trim(key);
    while (!k.empty() && (std::isdigit(static_cast<unsigned char>(k.front())) != 0 || k.front() == '.' ||
                          k.front() == ')' || k.front() == ' ')) {
        k.remove_prefix(1);
    }
    auto out = lowercase(trim(k));
    for (auto& c : out) {
        if (c == ' ' || c == '-') {
            c = '_';
        }
    }
    return out;
}

int score_from_json(const nlohmann::json& value, const std::string& metric)
{
    const auto range_error = [&](const std::string& detail) {
        return ParseError(ParseErrorKind::range, "scorecard: " + metric + " score " + detail);
    };
    long long score = 0;
    if (value.is_number_integer()) {
        score = value.get<long long>();
    } else if (value.is_number_float()) {
        const double d = value.get<double>();
        if (!std::isfinite(d) || std::floor(d) != d) {
            throw range_error("is not an integer");
        }
        score = static_cast<long long>(d);
    } else if (value.is_string()) {
        const auto s = trim(value.get_ref<const std::string&>());
        std::size_t digits = 0;
        while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits])) != 0) {
            ++digits;
        }
        const auto rest = s.substr(digits);
        if (digits == 0 || digits > 3 || !(rest.empty() || rest == "/10")) {
            throw range_error("'" + std::string(s) + "' is not an integer");
        }
        score = std::stoll(std::string(s.substr(0, digits)));
    } else {
        throw range_error("is not a number");
    }
    if (score < 1 || score > 10) {
        throw range_error(std::to_string(score) + " is outside [1, 10]");
    }
    return static_cast<int>(score);
}

MetricScore metric_from_json(const nlohmann::json& value, const std::string& metric)
{
    if (!value.is_object()) {
        return {score_from_json(value, metric), ""};
    }
    const nlohmann::json* score = nullptr;
    MetricScore out;
    for (const auto& [key, v] : value.items()) {
        const auto k = normalize_key(key);
        if (k == "score") {
            score = &v;
        } else if (k == "justification" && v.is_string()) {
            out.justification = v.get<std::string>();
        }
    }
    if (score == nullptr) {
        throw ParseError(ParseErrorKind::missing, "scorecard: " + metric + " has no score");
    }
    out.score = score_from_json(*score, metric);
    return out;
}

}  // namespace

JudgeScorecard parse_scorecard(std::string_view judge_response)
{
    nlohmann::json doc;
    for (auto open = judge_response.find('{'); open != std::string_view::npos;
         open = judge_response.find('{', open + 1)) {
        const auto end = matching_brace(judge_response, open);
        if (end == std::string_view::npos) {
            continue;
        }
        const auto candidate = judge_response.substr(open, end - open);
        auto parsed = nlohmann::json::parse(candidate.begin(), candidate.end(), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) {
            doc = std::move(parsed);
            break;
        }
    }
    if (!doc.is_object()) {
        throw ParseError(ParseErrorKind::shape, "scorecard: no JSON object found in judge response");
    }

    JudgeScorecard card;
    for (const auto& [key, value] : doc.items()) {
        const auto k = normalize_key(key);
        for (auto metric : kAllMetrics) {
            if (k == to_string(metric) && !card.scores.contains(metric)) {
                card.scores[metric] = metric_from_json(value, to_string(metric));
            }
        }
    }
    for (auto metric : kAllMetrics) {
        if (!card.scores.contains(metric)) {
            throw ParseError(ParseErrorKind::missing, "scorecard: missing metric " + to_string(metric));
        }
    }
    return card;
}

JudgeScorecard judge_design(Backend& judge, std::string_view design_text, const Sampling& sampling)
{
    ChatExchange exchange;
    exchange.user_text = render_judge_prompt(design_text);
    exchange.sampling = sampling;
    exchange.agent_id = "judge";
    exchange.purpose = Purpose::judge;
    return parse_scorecard(judge.complete(exchange).text);
}

double token_efficiency(double avg_reward, double avg_tokens)
{
    if (!(avg_tokens > 0.0)) {
        throw PreconditionError("token_efficiency: average tokens must be positive");
    }
    return avg_reward / avg_tokens;
}

// ---------------------------------------------------------------------------
// Rank-sum test

std::vector<long long> doubled_midranks(std::span<const double> pooled)
{
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return pooled[l] < pooled[r]; });
    std::vector<long long> ranks(pooled.size());
    std::size_t i = 0;
    while (i < order.size()) {
        auto j = i;
        while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) {
            ++j;
        }
        // positions i..j (0-based) share rank ((i+1)+(j+1))/2
        const auto doubled = static_cast<long long>(i + j + 2);
        for (auto k = i; k <= j; ++k) {
            ranks[order[k]] = doubled;
        }
        i = j + 1;
    }
    return ranks;
}

RankSumResult rank_sum_test(std::span<const double> sample_a, std::span<const double> sample_b)
{
    if (sample_a.empty() || sample_b.empty()) {
        throw PreconditionError("rank_sum_test: both samples must be non-empty");
    }
    std::vector<double> pooled(sample_a.begin(), sample_a.end());
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    if (std::any_of(pooled.begin(), pooled.end(), [](double v) { return std::isnan(v); })) {
        throw PreconditionError("rank_sum_test: samples contain NaN");
    }

    const auto na = sample_a.size();
    const auto n = pooled.size();
    const auto ranks = doubled_midranks(pooled);
    const long long observed2 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(na), 0LL);
    const long long center2 = static_cast<long long>(na) * static_cast<long long>(n + 1);

    RankSumResult result;
    result.statistic = static_cast<double>(observed2) / 2.0;

    if (n <= kExactRankSumLimit) {
        // ways[k][s]: number of k-subsets of the pooled ranks whose doubled sum is s.
        const long long max_sum = std::accumulate(ranks.begin(), ranks.end(), 0LL);
        std::vector<std::vector<std::uint64_t>> ways(na + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
        ways[0][0] = 1;
        for (const auto r : ranks) {
            for (auto k = na; k >= 1; --k) {
                for (auto s = max_sum; s >= r; --s) {
                    ways[k][s] += ways[k - 1][s - r];
                }
            }
        }
        const long long observed_distance = std::llabs(observed2 - center2);
        std::uint64_t extreme = 0;
        std::uint64_t total = 0;
        for (long long s = 0; s <= max_sum; ++s) {
            total += ways[na][s];
            if (std::llabs(s - center2) >= observed_distance) {
                extreme += ways[na][s];
            }
        }
        result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
        result.exact = true;
        return result;
    }

    const double nad = static_cast<double>(na);
    const double nbd = static_cast<double>(n - na);
    const double nd = static_cast<double>(n);
    double tie_sum = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            auto j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) {
                ++j;
            }
            const double t = static_cast<double>(j - i + 1);
            tie_sum += t * t * t - t;
            i = j + 1;
        }
    }
    const double variance = nad * nbd / 12.0 * ((nd + 1.0) - tie_sum / (nd * (nd - 1.0)));
    if (variance <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double z = (static_cast<double>(observed2 - center2) / 2.0) / std::sqrt(variance);
    result.p_value = std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)));
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

MetricSummary summarize_values(std::string metric, std::vector<double> values)
{
    MetricSummary s;
    s.metric = std::move(metric);
    s.n = values.size();
    if (values.empty()) {
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const auto mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    return s;
}

std::vector<std::pair<std::string, std::vector<double>>> metric_columns(std::span<const RunReport> reports)
{
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    columns.emplace_back("tokens", std::vector<double>{});
    columns.emplace_back("turns", std::vector<double>{});
    for (auto metric : kAllMetrics) {
        columns.emplace_back(to_string(metric), std::vector<double>{});
    }
    for (const auto& r : reports) {
        columns[0].second.push_back(static_cast<double>(r.total_tokens));
        columns[1].second.push_back(static_cast<double>(r.total_turns));
        if (r.scorecard) {
            for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
                const auto it = r.scorecard->scores.find(kAllMetrics[m]);
                if (it != r.scorecard->scores.end()) {
                    columns[2 + m].second.push_back(it->second.score);
                }
            }
        }
    }
    return columns;
}

}  // namespace

const MetricSummary* GroupSummary::find(std::string_view metric) const
{
    for (const auto& m : metrics) {
        if (m.metric == metric) {
            return &m;
        }
    }
    return nullptr;
}

GroupSummary summarize_group(std::string label, std::span<const RunReport> reports)
{
    GroupSummary g;
    g.label = std::move(label);
    g.runs = reports.size();
    for (auto& [metric, values] : metric_columns(reports)) {
        g.metrics.push_back(summarize_values(metric, std::move(values)));
    }
    return g;
}

SummaryTable compare_groups(std::string label_a, std::span<const RunReport> group_a, std::string label_b,
                            std::span<const RunReport> group_b)
{
    SummaryTable table;
    table.groups.push_back(summarize_group(std::move(label_a), group_a));
    table.groups.push_back(summarize_group(std::move(label_b), group_b));

    const auto cols_a = metric_columns(group_a);
    const auto cols_b = metric_columns(group_b);
    for (std::size_t i = 0; i < cols_a.size(); ++i) {
        MetricComparison c;
        c.metric = cols_a[i].first;
        c.mean_a = table.groups[0].metrics[i].mean;
        c.mean_b = table.groups[1].metrics[i].mean;
        if (!cols_a[i].second.empty() && !cols_b[i].second.empty()) {
            c.p_value = rank_sum_test(cols_a[i].second, cols_b[i].second).p_value;
        }
        table.comparisons.push_back(std::move(c));
    }
    const auto* tokens_a = table.groups[0].find("tokens");
    const auto* tokens_b = table.groups[1].find("tokens");
    if (tokens_a && tokens_b && tokens_a->mean && tokens_b->mean && *tokens_a->mean > 0.0) {
        table.token_change_pct = (*tokens_b->mean / *tokens_a->mean - 1.0) * 100.0;
    }
    return table;
}

SummaryTable aggregate_runs(std::span<const RunReport> reports)
{
    if (reports.empty()) {
        throw PreconditionError("aggregate_runs: at least one report is required");
    }
    std::vector<std::string> labels;
    for (const auto& r : reports) {
        if (std::find(labels.begin(), labels.end(), r.mode) == labels.end()) {
            labels.push_back(r.mode);
        }
    }
    const auto members = [&](const std::string& label) {
        std::vector<RunReport> out;
        for (const auto& r : reports) {
            if (r.mode == label) {
                out.push_back(r);
            }
        }
        return out;
    };

    if (labels.size() == 2) {
        if (labels[0] == "intrinsic" && labels[1] == "baseline") {
            std::swap(labels[0], labels[1]);
        }
        const auto a = members(labels[0]);
        const auto b = members(labels[1]);
        return compare_groups(labels[0], a, labels[1], b);
    }
    SummaryTable table;
    for (const auto& label : labels) {
        table.groups.push_back(summarize_group(label, members(label)));
    }
    return table;
}

std::string format_percent_change(double pct)
{
    std::ostringstream os;
    os << (pct >= 0.0 ? "+" : "-") << std::fixed << std::setprecision(1) << std::fabs(pct) << "%";
    return os.str();
}

nlohmann::ordered_json to_json(const SummaryTable& table)
{
    const auto opt = [](const std::optional<double>& v) {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    auto groups = nlohmann::ordered_json::array();
    for (const auto& g : table.groups) {
        nlohmann::ordered_json gj;
        gj["label"] = g.label;
        gj["runs"] = g.runs;
        auto metrics = nlohmann::ordered_json::object();
        for (const auto& m : g.metrics) {
            metrics[m.metric] = {{"n", m.n}, {"mean", opt(m.mean)}, {"median", opt(m.median)}};
        }
        gj["metrics"] = std::move(metrics);
        groups.push_back(std::move(gj));
    }
    j["groups"] = std::move(groups);
    auto comparisons = nlohmann::ordered_json::array();
    for (const auto& c : table.comparisons) {
        comparisons.push_back({{"metric", c.metric},
                               {"mean_a", opt(c.mean_a)},
                               {"mean_b", opt(c.mean_b)},
                               {"p_value", opt(c.p_value)}});
    }
    j["comparisons"] = std::move(comparisons);
    if (table.token_change_pct) {
        j["token_change_pct"] = *table.token_change_pct;
        j["token_change"] = format_percent_change(*table.token_change_pct);
    }
    return j;
}

std::string format_summary_table(const SummaryTable& table)
{
    std::ostringstream os;
    const auto cell = [](const std::optional<double>& v, int precision) {
        if (!v) {
            return std::string("-");
        }
        std::ostringstream c;
        c << std::fixed << std::setprecision(precision) << *v;
        return c.str();
    };

    os << std::left << std::setw(20) << "metric";
    for (const auto& g : table.groups) {
        os << std::setw(22) << (g.label + " (n=" + std::to_string(g.runs) + ")");
    }
    if (!table.comparisons.empty()) {
        os << "p-value";
    }
    os << "\n";

    if (table.groups.empty()) {
        return os.str();
    }
    for (std::size_t i = 0; i < table.groups.front().metrics.size(); ++i) {
        const auto& name = table.groups.front().metrics[i].metric;
        os << std::setw(20) << name;
        for (const auto& g : table.groups) {
            const auto& m = g.metrics[i];
            os << std::setw(22) << (cell(m.mean, 2) + " / " + cell(m.median, 2));
        }
        if (i < table.comparisons.size()) {
            os << cell(table.comparisons[i].p_value, 4);
        }
        os << "\n";
    }
    os << "(cells are mean / median)\n";
    if (table.token_change_pct) {
        os << "tokens " << table.groups[1].label << " vs " << table.groups[0].label << ": "
           << format_percent_change(*table.token_change_pct) << "\n";
    }
    return os.str();
}

}  // namespace ima
