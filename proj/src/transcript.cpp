#include "ima/transcript.hpp"

namespace ima {

nlohmann::json to_json(const Flags& flags)
{
    auto out = nlohmann::json::array();
    if (flags.accept) {
        out.push_back("ACCEPT");
    }
    if (flags.finalize) {
        out.push_back("FINALIZE");
    }
    return out;
}

nlohmann::json to_json(const TurnRecord& turn)
{
    return {
        {"turn_index", turn.turn_index},
        {"speaker", turn.speaker},
        {"role_name", turn.role_name},
        {"output_text", turn.output_text},
        {"context_tokens", turn.context_tokens},
        {"output_tokens", turn.output_tokens},
        {"flags", to_json(turn.flags)},
        {"context",
         {
             {"memory_block", turn.context.memory_block},
             {"recent_turns", turn.context.recent_turns},
             {"total_tokens", turn.context.total_tokens},
             {"over_budget", turn.context.over_budget},
         }},
    };
}

TurnRecord turn_record_from_json(const nlohmann::json& j)
{
    TurnRecord turn;
    turn.turn_index = j.at("turn_index").get<std::int64_t>();
    turn.speaker = j.at("speaker").get<std::string>();
    turn.role_name = j.value("role_name", turn.speaker);
    turn.output_text = j.at("output_text").get<std::string>();
    turn.context_tokens = j.value("context_tokens", std::int64_t{0});
    turn.output_tokens = j.value("output_tokens", std::int64_t{0});
    for (const auto& flag : j.value("flags", nlohmann::json::array())) {
        if (flag == "ACCEPT") {
            turn.flags.accept = true;
        } else if (flag == "FINALIZE") {
            turn.flags.finalize = true;
        }
    }
    if (const auto ctx = j.find("context"); ctx != j.end()) {
        turn.context.memory_block = ctx->value("memory_block", "");
        turn.context.recent_turns = ctx->value("recent_turns", std::vector<std::int64_t>{});
        turn.context.total_tokens = ctx->value("total_tokens", std::int64_t{0});
        turn.context.over_budget = ctx->value("over_budget", false);
    }
    return turn;
}

std::string render_turn(const TurnRecord& turn)
{
    return "[" + turn.role_name + "]: " + turn.output_text;
}

std::vector<std::string> Transcript::history() const
{
    std::vector<std::string> out;
    out.reserve(turns.size() + 1);
    out.push_back(task);
    for (const auto& turn : turns) {
        out.push_back(render_turn(turn));
    }
    return out;
}

}  // namespace ima
