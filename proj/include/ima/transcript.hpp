#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ima {

struct Flags {
    bool accept = false;
    bool finalize = false;

    bool operator==(const Flags&) const = default;
};

nlohmann::json to_json(const Flags& flags);

// Where the context of a turn came from; persisted with the turn.
struct ContextTrace {
    std::string memory_block;             // empty in baseline mode
    std::vector<std::int64_t> recent_turns;  // turn indices included, chronological
    std::int64_t total_tokens = 0;
    bool over_budget = false;

    bool operator==(const ContextTrace&) const = default;
};

struct TurnRecord {
    std::int64_t turn_index = 0;  // dense, from 1
    std::string speaker;          // agent id
    std::string role_name;        // label used in the shared history
    std::string output_text;
    std::int64_t context_tokens = 0;
    std::int64_t output_tokens = 0;
    Flags flags;
    ContextTrace context;

    bool operator==(const TurnRecord&) const = default;
};

nlohmann::json to_json(const TurnRecord& turn);
TurnRecord turn_record_from_json(const nlohmann::json& j);

// "[role_name]: output" as shown to other agents.
std::string render_turn(const TurnRecord& turn);

// Shared conversation history H: the task description followed by turns.
struct Transcript {
    std::string task;
    std::vector<TurnRecord> turns;

    // history[0] is the task, history[i] the rendered turn i.
    std::vector<std::string> history() const;
};

}  // namespace ima
