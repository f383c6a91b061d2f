#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ima/backend.hpp"
#include "ima/memory.hpp"
#include "ima/transcript.hpp"

namespace ima {

enum class CounterMode { default_heuristic, backend_reported, custom };

std::string to_string(CounterMode mode);
CounterMode counter_mode_from_string(std::string_view name);

// Deterministic token estimate used for budgeting. count("") == 0 and the
// count never decreases when text is appended.
//
// The mode also decides usage accounting: backend_reported prefers the usage
// a backend returns and falls back to the estimate when none was reported;
// the other modes always estimate.
class TokenCounter {
public:
    using CountFn = std::function<std::int64_t(std::string_view)>;

    TokenCounter() = default;

    static TokenCounter heuristic(int bytes_per_token = 4);
    static TokenCounter backend_reported(int bytes_per_token = 4);
    static TokenCounter custom(CountFn fn);

    std::int64_t count(std::string_view text) const;

    UsageTotals account(const ChatExchange& exchange, const ChatResult& result) const;

    CounterMode mode() const { return mode_; }
    int bytes_per_token() const { return bytes_per_token_; }

private:
    CounterMode mode_ = CounterMode::default_heuristic;
    int bytes_per_token_ = 4;
    CountFn fn_;
};

inline std::int64_t count_tokens(const TokenCounter& counter, std::string_view text)
{
    return counter.count(text);
}

struct ContextSelection {
    std::size_t first_recent = 1;  // history[first_recent..] are included
    std::int64_t total_tokens = 0;
    bool over_budget = false;
};

// Context construction over raw history entries. history[0] is the task and
// is always included, as is the memory block. Then whole entries are taken
// from the newest backwards while they fit the remaining budget, stopping at
// the first one that does not fit.
ContextSelection select_context(std::span<const std::string> history, std::string_view memory_block,
                                std::int64_t max_tokens, const TokenCounter& counter);

struct ContextPackage {
    std::string task;
    std::string memory_block;             // "" when memory is disabled
    std::vector<TurnRecord> recent_turns;  // chronological
    std::int64_t total_tokens = 0;
    bool over_budget = false;
    std::string warning;  // set when task and memory alone exceed the budget

    // Flattened user text: task, memory block, then the recent turns.
    std::string render() const;
    ContextTrace trace() const;
};

std::string render_memory_block(const MemoryState& memory);

// `memory` may be null to build a context without a memory block.
ContextPackage construct_context(const Transcript& transcript, const MemoryState* memory,
                                 std::int64_t max_tokens, const TokenCounter& counter);

}  // namespace ima
