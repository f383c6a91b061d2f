#include "ima/report.hpp"

#include "ima/errors.hpp"

namespace ima {

std::string to_string(Metric metric)
{
    switch (metric) {
    case Metric::scalability: return "scalability";
    case Metric::reliability: return "reliability";
    case Metric::usability: return "usability";
    case Metric::cost_effectiveness: return "cost_effectiveness";
    case Metric::documentation: return "documentation";
    }
    return "unknown";
}

std::string display_name(Metric metric)
{
    switch (metric) {
    case Metric::scalability: return "Scalability";
    case Metric::reliability: return "Reliability";
    case Metric::usability: return "Usability";
    case Metric::cost_effectiveness: return "Cost-effectiveness";
    case Metric::documentation: return "Documentation";
    }
    return "Unknown";
}

nlohmann::ordered_json to_json(const JudgeScorecard& card)
{
    auto out = nlohmann::ordered_json::object();
    for (auto metric : kAllMetrics) {
        const auto it = card.scores.find(metric);
        if (it == card.scores.end()) {
            continue;
        }
        out[display_name(metric)] = {{"score", it->second.score}, {"justification", it->second.justification}};
    }
    return out;
}

std::string to_string(RunOutcome outcome)
{
    switch (outcome) {
    case RunOutcome::running: return "running";
    case RunOutcome::finalized: return "finalized";
    case RunOutcome::turn_limit: return "turn_limit";
    case RunOutcome::aborted: return "aborted";
    }
    return "unknown";
}

RunOutcome run_outcome_from_string(std::string_view name)
{
    for (auto o : {RunOutcome::running, RunOutcome::finalized, RunOutcome::turn_limit, RunOutcome::aborted}) {
        if (to_string(o) == name) {
            return o;
        }
    }
    throw Error("unknown run outcome '" + std::string(name) + "'");
}

nlohmann::ordered_json to_json(const RunReport& report)
{
    nlohmann::ordered_json j;
    j["run_id"] = report.run_id;
    j["scenario"] = report.scenario;
    j["mode"] = report.mode;
    j["seed"] = report.seed;
    j["outcome"] = to_string(report.outcome);
    if (!report.error.empty()) {
        j["error"] = report.error;
    }
    j["total_turns"] = report.total_turns;
    j["total_tokens"] = report.total_tokens;
    j["per_agent_tokens"] = report.per_agent_tokens;
    auto events = nlohmann::ordered_json::array();
    for (const auto& e : report.memory_update_events) {
        events.push_back(to_json(e));
    }
    j["memory_update_events"] = std::move(events);
    j["speaker_trace"] = report.speaker_trace;
    j["consensus_turn"] = report.consensus_turn ? nlohmann::ordered_json(*report.consensus_turn) : nullptr;
    j["final_document"] = report.final_document;
    if (report.scorecard) {
        j["scorecard"] = to_json(*report.scorecard);
    }
    return j;
}

RunReport run_report_from_json(const nlohmann::json& j)
{
    RunReport r;
    r.run_id = j.at("run_id").get<std::string>();
    r.scenario = j.value("scenario", "");
    r.mode = j.value("mode", "");
    r.seed = j.value("seed", std::int64_t{0});
    r.outcome = run_outcome_from_string(j.at("outcome").get<std::string>());
    r.error = j.value("error", "");
    r.total_turns = j.at("total_turns").get<std::int64_t>();
    r.total_tokens = j.at("total_tokens").get<std::int64_t>();
    r.per_agent_tokens = j.value("per_agent_tokens", std::map<std::string, std::int64_t>{});
    for (const auto& e : j.value("memory_update_events", nlohmann::json::array())) {
        r.memory_update_events.push_back(memory_update_event_from_json(e));
    }
    r.speaker_trace = j.value("speaker_trace", std::vector<std::string>{});
    if (const auto c = j.find("consensus_turn"); c != j.end() && c->is_number_integer()) {
        r.consensus_turn = c->get<std::int64_t>();
    }
    r.final_document = j.value("final_document", "");
    if (const auto s = j.find("scorecard"); s != j.end() && s->is_object()) {
        JudgeScorecard card;
        for (auto metric : kAllMetrics) {
            auto m = s->find(display_name(metric));
            if (m == s->end()) {
                m = s->find(to_string(metric));
            }
            if (m == s->end()) {
                throw Error("scorecard has no entry for " + to_string(metric));
            }
            card.scores[metric] = {m->at("score").get<int>(), m->value("justification", "")};
        }
        r.scorecard = std::move(card);
    }
    return r;
}

}  // namespace ima
