#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ima/transcript.hpp"

namespace ima {

// Canonical agent ids of the consensus roster.
namespace roles {
inline constexpr std::string_view kEvaluator = "EA";
inline constexpr std::string_view kSummarizer = "KIA";
inline constexpr std::string_view kDataEngineer = "DEA";
inline constexpr std::string_view kInfrastructure = "IA";
inline constexpr std::string_view kBusinessObjective = "BOA";
inline constexpr std::string_view kMachineLearning = "MLE";
inline constexpr std::string_view kCoordinator = "CDA";
inline constexpr std::string_view kFinalizer = "DJE";

std::vector<std::string> default_worker_order();

// Maps historical spellings ("MLA", "ERA") to canonical ids; other ids pass through.
std::string canonical_id(std::string_view id);
}  // namespace roles

Flags detect_flags(std::string_view output_text);

enum class Phase { discussing, finalizing, done };

std::string to_string(Phase phase);

struct SchedulerState {
    std::vector<std::string> worker_order = roles::default_worker_order();
    std::int64_t worker_counter = 0;
    std::int64_t turn_counter = 0;
    Phase phase = Phase::discussing;
};

// Speaker selection. Implementations advance the counters in `state`.
class SelectionPolicy {
public:
    virtual ~SelectionPolicy() = default;
    virtual std::string next_speaker(SchedulerState& state, const std::optional<std::string>& last_speaker,
                                     std::string_view last_message) const = 0;
};

// Coordinator-driven round robin over the workers with a summarize/evaluate
// step after every full worker cycle, and a hand-off to the finalizer once
// the last message carries FINALIZE.
class ConsensusPolicy final : public SelectionPolicy {
public:
    std::string next_speaker(SchedulerState& state, const std::optional<std::string>& last_speaker,
                             std::string_view last_message) const override;
};

std::string next_speaker(SchedulerState& state, const std::optional<std::string>& last_speaker,
                         std::string_view last_message);

// True iff every worker has spoken since the coordinator's most recent turn
// containing `proposal_marker` (or since the start when there is none) and
// each worker's latest such turn carries ACCEPT.
bool consensus_reached(std::span<const TurnRecord> turns, std::span<const std::string> workers,
                       std::string_view proposal_marker = "PROPOSAL");

}  // namespace ima
