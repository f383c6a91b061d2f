#include "ima/scheduler.hpp"

#include <algorithm>

#include "ima/errors.hpp"
#include "ima/text.hpp"

namespace ima {

namespace roles {

std::vector<std::string> default_worker_order()
{
    return {std::string(kBusinessObjective), std::string(kDataEngineer), std::string(kMachineLearning),
            std::string(kInfrastructure)};
}

std::string canonical_id(std::string_view id)
{
    if (id == "MLA") {
        return std::string(kMachineLearning);
    }
    if (id == "ERA") {
        return std::string(kEvaluator);
    }
    return std::string(id);
}

}  // namespace roles

Flags detect_flags(std::string_view output_text)
{
    Flags flags;
    flags.accept = contains_token(output_text, "ACCEPT");
    // Plain substring match on either spelling; "FINALIZE" alone would miss
    // "FINALIZATION" because the two only share "FINALIZ".
    flags.finalize = output_text.find("FINALIZE") != std::string_view::npos ||
                     output_text.find("FINALIZATION") != std::string_view::npos;
    return flags;
}

std::string to_string(Phase phase)
{
    switch (phase) {
    case Phase::discussing: return "discussing";
    case Phase::finalizing: return "finalizing";
    case Phase::done: return "done";
    }
    return "unknown";
}

std::string ConsensusPolicy::next_speaker(SchedulerState& state, const std::optional<std::string>& last_speaker,
                                          std::string_view last_message) const
{
    if (state.phase == Phase::done) {
        throw PreconditionError("next_speaker: the conversation is already done");
    }
    if (state.worker_order.empty()) {
        throw SchedulerError("next_speaker: worker order is empty");
    }
    state.turn_counter += 1;

    if (!last_speaker) {
        return std::string(roles::kCoordinator);
    }
    if (detect_flags(last_message).finalize) {
        state.phase = Phase::finalizing;
        return std::string(roles::kFinalizer);
    }

    const auto& last = *last_speaker;
    const auto n = static_cast<std::int64_t>(state.worker_order.size());
    if (last == roles::kCoordinator) {
        auto next = state.worker_order[static_cast<std::size_t>(state.worker_counter % n)];
        state.worker_counter += 1;
        return next;
    }
    if (std::find(state.worker_order.begin(), state.worker_order.end(), last) != state.worker_order.end()) {
        return std::string(state.worker_counter % n == 0 ? roles::kSummarizer : roles::kCoordinator);
    }
    if (last == roles::kSummarizer) {
        return std::string(roles::kEvaluator);
    }
    if (last == roles::kEvaluator) {
        return std::string(roles::kCoordinator);
    }
    state.turn_counter -= 1;
    throw SchedulerError("next_speaker: no successor defined for speaker '" + last + "'");
}

std::string next_speaker(SchedulerState& state, const std::optional<std::string>& last_speaker,
                         std::string_view last_message)
{
    static const ConsensusPolicy policy;
    return policy.next_speaker(state, last_speaker, last_message);
}

bool consensus_reached(std::span<const TurnRecord> turns, std::span<const std::string> workers,
                       std::string_view proposal_marker)
{
    if (workers.empty()) {
        return false;
    }
    std::size_t window_start = 0;
    for (std::size_t i = turns.size(); i-- > 0;) {
        if (turns[i].speaker == roles::kCoordinator && contains_token(turns[i].output_text, proposal_marker)) {
            window_start = i + 1;
            break;
        }
    }
    for (const auto& worker : workers) {
        const TurnRecord* latest = nullptr;
        for (auto i = window_start; i < turns.size(); ++i) {
            if (turns[i].speaker == worker) {
                latest = &turns[i];
            }
        }
        if (latest == nullptr || !latest->flags.accept) {
            return false;
        }
    }
    return true;
}

}  // namespace ima
