#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ima/backend.hpp"
#include "ima/context.hpp"
#include "ima/memory.hpp"
#include "ima/report.hpp"
#include "ima/scenario.hpp"
#include "ima/scheduler.hpp"
#include "ima/transcript.hpp"

namespace ima {

// Memory of one agent right after the turn that updated it.
struct MemorySnapshot {
    std::string agent_id;
    std::int64_t turn = 0;  // global turn index
    MemoryState state;
};

nlohmann::ordered_json to_json(const MemorySnapshot& snapshot);

// One conversation. Strictly sequential; independent conversations may run
// on separate threads as long as they only share thread-safe backends.
class Conversation {
public:
    // `backends` maps every backend name the scenario's agents use to a handle.
    Conversation(ScenarioConfig scenario, std::map<std::string, BackendHandle> backends,
                 std::unique_ptr<SelectionPolicy> policy = nullptr);

    // Builds fresh backends from the scenario's backend configs.
    explicit Conversation(ScenarioConfig scenario);

    // Selects the speaker, builds its context, generates its output, appends
    // the turn and (in intrinsic mode) updates the speaker's memory.
    TurnRecord run_turn();

    // Runs turns until the finalizer speaks or max_turns is reached. Backend
    // failures end the run with outcome=aborted instead of propagating.
    RunOutcome run();

    bool done() const { return scheduler_.phase == Phase::done; }
    RunOutcome outcome() const { return outcome_; }
    const SchedulerState& scheduler() const { return scheduler_; }
    const Transcript& transcript() const { return transcript_; }
    const ScenarioConfig& scenario() const { return scenario_; }
    const std::map<std::string, MemoryState>& memories() const { return memories_; }
    const std::vector<MemorySnapshot>& snapshots() const { return snapshots_; }
    const std::vector<MemoryUpdateEvent>& events() const { return events_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    RunReport report(const std::string& run_id) const;

private:
    Backend& backend_for(const std::string& name);

    ScenarioConfig scenario_;
    std::map<std::string, BackendHandle> backends_;
    std::unique_ptr<SelectionPolicy> policy_;
    TokenCounter counter_;
    SchedulerState scheduler_;
    Transcript transcript_;
    std::map<std::string, MemoryState> memories_;
    std::vector<MemorySnapshot> snapshots_;
    std::vector<MemoryUpdateEvent> events_;
    std::vector<std::string> warnings_;
    std::map<std::string, std::int64_t> agent_tokens_;
    std::optional<std::int64_t> consensus_turn_;
    RunOutcome outcome_ = RunOutcome::running;
    std::string error_;
    std::string final_document_;
};

struct RunOptions {
    std::string run_id;                        // defaults to "<name>-<mode>-seed<seed>"
    std::optional<std::filesystem::path> out;  // persist artifacts under out/run_id when set
};

struct RunResult {
    RunReport report;
    Transcript transcript;
    std::vector<MemorySnapshot> snapshots;
    std::optional<std::filesystem::path> run_dir;
};

std::string default_run_id(const ScenarioConfig& scenario);

RunResult run_conversation(const ScenarioConfig& scenario, const RunOptions& options = {});

}  // namespace ima
