#include "ima/orchestrator.hpp"

#include "ima/persist.hpp"
#include "ima/prompts.hpp"

namespace ima {

nlohmann::ordered_json to_json(const MemorySnapshot& snapshot)
{
    nlohmann::ordered_json j;
    j["agent_id"] = snapshot.agent_id;
    j["turn"] = snapshot.turn;
    j["update_index"] = snapshot.state.turn_index;
    j["template_id"] = snapshot.state.template_id();
    j["content"] = nlohmann::ordered_json::parse(serialize_content(snapshot.state.content));
    return j;
}

Conversation::Conversation(ScenarioConfig scenario, std::map<std::string, BackendHandle> backends,
                           std::unique_ptr<SelectionPolicy> policy)
    : scenario_(std::move(scenario)),
      backends_(std::move(backends)),
      policy_(policy ? std::move(policy) : std::make_unique<ConsensusPolicy>()),
      counter_(scenario_.make_counter())
{
    validate_scenario(scenario_);
    for (const auto& agent : scenario_.agents) {
        for (const auto* name : {&agent.backend, agent.update_backend ? &*agent.update_backend : nullptr}) {
            if (name != nullptr && (!backends_.contains(*name) || !backends_.at(*name))) {
                throw PreconditionError("agent '" + agent.agent_id + "' is bound to backend '" + *name +
                                        "' but no such backend was provided");
            }
        }
    }
    scheduler_.worker_order = scenario_.worker_order;
    transcript_.task = scenario_.task_text;
    if (scenario_.mode == Mode::intrinsic) {
        for (const auto& agent : scenario_.agents) {
            memories_.emplace(agent.agent_id, initial_memory(agent.tmpl ? agent.tmpl : default_memory_template()));
        }
    }
}

namespace {

std::map<std::string, BackendHandle> build_backends(const ScenarioConfig& scenario)
{
    std::map<std::string, BackendHandle> out;
    for (const auto& [name, config] : scenario.backends) {
        out.emplace(name, make_backend(config));
    }
    return out;
}

}  // namespace

Conversation::Conversation(ScenarioConfig scenario)
    : Conversation(scenario, build_backends(scenario))
{
}

Backend& Conversation::backend_for(const std::string& name)
{
    return *backends_.at(name);
}

TurnRecord Conversation::run_turn()
{
    if (done()) {
        throw PreconditionError("run_turn: the conversation is already done");
    }

    std::optional<std::string> last_speaker;
    std::string_view last_message = transcript_.task;
    if (!transcript_.turns.empty()) {
        last_speaker = transcript_.turns.back().speaker;
        last_message = transcript_.turns.back().output_text;
    }
    const auto speaker = policy_->next_speaker(scheduler_, last_speaker, last_message);
    const auto* agent = scenario_.find_agent(speaker);
    if (agent == nullptr) {
        throw SchedulerError("selected speaker '" + speaker + "' is not an agent of this scenario");
    }
    const auto turn_index = static_cast<std::int64_t>(transcript_.turns.size()) + 1;
    const bool intrinsic = scenario_.mode == Mode::intrinsic;

    Sampling sampling;
    sampling.temperature = scenario_.temperature;
    sampling.seed = scenario_.seed;
    sampling.max_output_tokens = scenario_.max_output_tokens;

    const MemoryState* memory = intrinsic ? &memories_.at(speaker) : nullptr;
    const auto package = construct_context(transcript_, memory, scenario_.max_context_tokens, counter_);
    if (!package.warning.empty()) {
        warnings_.push_back("turn " + std::to_string(turn_index) + " (" + speaker + "): " + package.warning);
    }

    ChatExchange exchange;
    exchange.system_text = agent->role_text;
    exchange.user_text = package.render();
    exchange.sampling = sampling;
    exchange.agent_id = speaker;
    exchange.purpose = Purpose::turn;

    const auto reply = backend_for(agent->backend).complete(exchange);
    const auto usage = counter_.account(exchange, reply);

    TurnRecord record;
    record.turn_index = turn_index;
    record.speaker = speaker;
    record.role_name = agent->role_name;
    record.output_text = reply.text;
    record.context_tokens = usage.prompt_tokens;
    record.output_tokens = usage.completion_tokens;
    record.flags = detect_flags(reply.text);
    record.context = package.trace();
    transcript_.turns.push_back(record);
    agent_tokens_[speaker] += usage.total();

    if (intrinsic) {
        const auto& previous = memories_.at(speaker);
        ChatExchange update_exchange;
        update_exchange.system_text = std::string(prompts::kMemoryUpdateSystem);
        update_exchange.user_text = render_update_prompt(agent->role_text, previous, reply.text);

        UpdateRequest request;
        request.agent_id = speaker;
        request.role = agent->role_text;
        request.turn = turn_index;
        request.retry_limit = scenario_.memory_retry_limit;
        request.sampling = sampling;
        auto update = update_memory(previous, reply.text, request,
                                    backend_for(agent->update_backend.value_or(agent->backend)));

        UsageTotals update_usage;
        for (const auto& r : update.exchanges) {
            const auto u = counter_.account(update_exchange, r);
            update_usage.prompt_tokens += u.prompt_tokens;
            update_usage.completion_tokens += u.completion_tokens;
        }
        update.event.prompt_tokens = update_usage.prompt_tokens;
        update.event.completion_tokens = update_usage.completion_tokens;
        agent_tokens_[speaker] += update_usage.total();

        snapshots_.push_back({speaker, turn_index, update.state});
        events_.push_back(std::move(update.event));
        memories_.insert_or_assign(speaker, std::move(update.state));
    }

    if (!consensus_turn_ &&
        consensus_reached(transcript_.turns, scenario_.worker_order, scenario_.proposal_marker)) {
        consensus_turn_ = turn_index;
    }

    if (speaker == roles::kFinalizer) {
        scheduler_.phase = Phase::done;
        outcome_ = RunOutcome::finalized;
        final_document_ = reply.text;
    } else if (turn_index >= scenario_.max_turns) {
        scheduler_.phase = Phase::done;
        outcome_ = RunOutcome::turn_limit;
    }
    return record;
}

RunOutcome Conversation::run()
{
    while (!done()) {
        try {
            run_turn();
        } catch (const BackendError& e) {
            scheduler_.phase = Phase::done;
            outcome_ = RunOutcome::aborted;
            error_ = e.what();
        }
    }
    return outcome_;
}

RunReport Conversation::report(const std::string& run_id) const
{
    RunReport r;
    r.run_id = run_id;
    r.scenario = scenario_.name;
    r.mode = to_string(scenario_.mode);
    r.seed = scenario_.seed;
    r.outcome = outcome_;
    r.error = error_;
    r.total_turns = static_cast<std::int64_t>(transcript_.turns.size());
    r.per_agent_tokens = agent_tokens_;
    for (const auto& [agent, tokens] : agent_tokens_) {
        r.total_tokens += tokens;
    }
    r.memory_update_events = events_;
    for (const auto& t : transcript_.turns) {
        r.speaker_trace.push_back(t.speaker);
    }
    r.consensus_turn = consensus_turn_;
    r.final_document = final_document_;
    return r;
}

std::string default_run_id(const ScenarioConfig& scenario)
{
    return scenario.name + "-" + to_string(scenario.mode) + "-seed" + std::to_string(scenario.seed);
}

RunResult run_conversation(const ScenarioConfig& scenario, const RunOptions& options)
{
    Conversation conversation(scenario);
    conversation.run();

    RunResult result;
    result.report = conversation.report(options.run_id.empty() ? default_run_id(scenario) : options.run_id);
    result.transcript = conversation.transcript();
    result.snapshots = conversation.snapshots();
    if (options.out) {
        const auto run_dir = *options.out / result.report.run_id;
        persist_run(result.report, result.transcript, result.snapshots, run_dir);
        result.run_dir = run_dir;
    }
    return result;
}

}  // namespace ima
