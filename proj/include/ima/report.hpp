#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ima/memory.hpp"

namespace ima {

enum class Metric { scalability, reliability, usability, cost_effectiveness, documentation };

inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::scalability, Metric::reliability, Metric::usability,
                                                      Metric::cost_effectiveness, Metric::documentation};

std::string to_string(Metric metric);      // "cost_effectiveness"
std::string display_name(Metric metric);   // "Cost-effectiveness"

struct MetricScore {
    int score = 0;  // 1..10
    std::string justification;
    bool operator==(const MetricScore&) const = default;
};

struct JudgeScorecard {
    std::map<Metric, MetricScore> scores;  // all five present

    const MetricScore& at(Metric m) const { return scores.at(m); }
    bool operator==(const JudgeScorecard&) const = default;
};

// {"Scalability": {"score": 8, "justification": "..."}, ...}
nlohmann::ordered_json to_json(const JudgeScorecard& card);

enum class RunOutcome { running, finalized, turn_limit, aborted };

std::string to_string(RunOutcome outcome);
RunOutcome run_outcome_from_string(std::string_view name);

struct RunReport {
    std::string run_id;
    std::string scenario;
    std::string mode;
    std::int64_t seed = 0;
    RunOutcome outcome = RunOutcome::running;
    std::string error;
    std::int64_t total_turns = 0;
    // Prompt + completion tokens over every exchange of the run, memory updates included.
    std::int64_t total_tokens = 0;
    std::map<std::string, std::int64_t> per_agent_tokens;
    std::vector<MemoryUpdateEvent> memory_update_events;
    std::vector<std::string> speaker_trace;
    std::optional<std::int64_t> consensus_turn;
    std::string final_document;
    std::optional<JudgeScorecard> scorecard;
};

nlohmann::ordered_json to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& j);

}  // namespace ima
