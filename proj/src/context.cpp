#include "ima/context.hpp"

#include "ima/prompts.hpp"

namespace ima {

std::string to_string(CounterMode mode)
{
    switch (mode) {
    case CounterMode::default_heuristic: return "default_heuristic";
    case CounterMode::backend_reported: return "backend_reported";
    case CounterMode::custom: return "custom";
    }
    return "unknown";
}

CounterMode counter_mode_from_string(std::string_view name)
{
    if (name == "default_heuristic") {
        return CounterMode::default_heuristic;
    }
    if (name == "backend_reported") {
        return CounterMode::backend_reported;
    }
    if (name == "custom") {
        return CounterMode::custom;
    }
    throw PreconditionError("unknown token counter mode '" + std::string(name) + "'");
}

TokenCounter TokenCounter::heuristic(int bytes_per_token)
{
    if (bytes_per_token <= 0) {
        throw PreconditionError("bytes_per_token must be positive");
    }
    TokenCounter c;
    c.mode_ = CounterMode::default_heuristic;
    c.bytes_per_token_ = bytes_per_token;
    return c;
}

TokenCounter TokenCounter::backend_reported(int bytes_per_token)
{
    auto c = heuristic(bytes_per_token);
    c.mode_ = CounterMode::backend_reported;
    return c;
}

TokenCounter TokenCounter::custom(CountFn fn)
{
    if (!fn) {
        throw PreconditionError("custom token counter needs a function");
    }
    TokenCounter c;
    c.mode_ = CounterMode::custom;
    c.fn_ = std::move(fn);
    return c;
}

std::int64_t TokenCounter::count(std::string_view text) const
{
    if (mode_ == CounterMode::custom) {
        return fn_(text);
    }
    const auto bytes = static_cast<std::int64_t>(text.size());
    return (bytes + bytes_per_token_ - 1) / bytes_per_token_;
}

UsageTotals TokenCounter::account(const ChatExchange& exchange, const ChatResult& result) const
{
    if (mode_ == CounterMode::backend_reported && (result.prompt_tokens > 0 || result.completion_tokens > 0)) {
        return {result.prompt_tokens, result.completion_tokens};
    }
    return {count(exchange.system_text) + count(exchange.user_text), count(result.text)};
}

ContextSelection select_context(std::span<const std::string> history, std::string_view memory_block,
                                std::int64_t max_tokens, const TokenCounter& counter)
{
    if (history.empty()) {
        throw PreconditionError("construct_context: history must contain the task description");
    }
    if (max_tokens <= 0) {
        throw PreconditionError("construct_context: max_tokens must be positive");
    }

    ContextSelection selection;
    const auto fixed = counter.count(history[0]) + counter.count(memory_block);
    selection.over_budget = fixed > max_tokens;
    selection.total_tokens = fixed;
    selection.first_recent = history.size();

    auto remaining = max_tokens - fixed;
    for (auto i = history.size(); i-- > 1;) {
        const auto tokens = counter.count(history[i]);
        if (tokens > remaining) {
            break;
        }
        remaining -= tokens;
        selection.total_tokens += tokens;
        selection.first_recent = i;
    }
    return selection;
}

std::string render_memory_block(const MemoryState& memory)
{
    return std::string(prompts::kMemoryBlockHeader) + serialize_content(memory.content);
}

std::string ContextPackage::render() const
{
    std::string out = task;
    if (!memory_block.empty()) {
        out += "\n\n";
        out += memory_block;
    }
    for (const auto& turn : recent_turns) {
        out += "\n\n";
        out += render_turn(turn);
    }
    return out;
}

ContextTrace ContextPackage::trace() const
{
    ContextTrace t;
    t.memory_block = memory_block;
    t.total_tokens = total_tokens;
    t.over_budget = over_budget;
    for (const auto& turn : recent_turns) {
        t.recent_turns.push_back(turn.turn_index);
    }
    return t;
}

ContextPackage construct_context(const Transcript& transcript, const MemoryState* memory,
                                 std::int64_t max_tokens, const TokenCounter& counter)
{
    ContextPackage package;
    package.task = transcript.task;
    if (memory != nullptr) {
        package.memory_block = render_memory_block(*memory);
    }
    const auto history = transcript.history();
    const auto selection = select_context(history, package.memory_block, max_tokens, counter);
    for (auto i = selection.first_recent; i < history.size(); ++i) {
        package.recent_turns.push_back(transcript.turns[i - 1]);
    }
    package.total_tokens = selection.total_tokens;
    package.over_budget = selection.over_budget;
    if (package.over_budget) {
        package.warning = "task and memory need " + std::to_string(selection.total_tokens) +
                          " tokens, more than the budget of " + std::to_string(max_tokens) +
                          "; no conversation turns included";
    }
    return package;
}

}  // namespace ima
