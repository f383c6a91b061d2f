#pragma once

#include <string_view>

namespace ima::prompts {

// Placeholders appear exactly once each.
inline constexpr std::string_view kRolePlaceholder = "[ROLE]";
inline constexpr std::string_view kMemoryPlaceholder = "[MEMORY_CONTENT]";
inline constexpr std::string_view kOutputPlaceholder = "[AGENT_OUTPUT]";

inline constexpr std::string_view kMemoryUpdate =
    "You are maintaining the memory of an agent working as [ROLE] in a multi-agent conversation.\n"
    "Use the old memory and the newest output by the agent to populate and update the current "
    "memory json with factual information.\n"
    "\n"
    "For context, old memory content:\n"
    "[MEMORY_CONTENT]\n"
    "\n"
    "Current content generated by the agent:\n"
    "[AGENT_OUTPUT]\n"
    "\n"
    "Update the memory content to incorporate new information while preserving key historical "
    "context.\n"
    "The updated content should be concise and focus on information relevant to both the old "
    "memory and the newly generated output.";

// Sent as the system message of every memory update exchange.
inline constexpr std::string_view kMemoryUpdateSystem =
    "Reply with the updated memory only: a single JSON object with exactly the same keys and "
    "nesting as the old memory content, and string values.";

inline constexpr std::string_view kJudge =
    "You are an expert in data pipeline design evaluation. Your task is to evaluate the following "
    "data pipeline design based on its description. For each of the specified metrics, assign a "
    "score from 1 to 10, where 1 is the lowest and 10 is the highest. Provide a brief "
    "justification for each score. Be critical and harsh if the design is poor and give it a low "
    "score. Base your evaluation solely on the provided description. Do not assume any additional "
    "information.\n"
    "\n"
    "Metrics:\n"
    "1. Scalability: Ability to handle increasing data volumes or user loads.\n"
    "2. Reliability: Ability to handle failures and ensure data integrity.\n"
    "3. Usability: Enough detail for developers to implement the design.\n"
    "4. Cost-effectiveness: Balance between costs and benefits.\n"
    "5. Documentation: How well-justified is the choice of elements for the data pipeline\n"
    "\n"
    "Provide your evaluation in the following format in a json dict: {\n"
    "[metric1]: {{score}: [score],\n"
    "{justification}: [justification]},\n"
    "[metric2]...\n"
    "}";

inline constexpr std::string_view kJudgeDesignHeader = "\n\nData pipeline design:\n";

inline constexpr std::string_view kMemoryBlockHeader = "Your structured memory:\n";

}  // namespace ima::prompts
