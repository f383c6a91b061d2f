#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ima/backend.hpp"
#include "ima/context.hpp"
#include "ima/memory.hpp"

namespace ima {

enum class Mode { intrinsic, baseline };

std::string to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct BackendConfig {
    enum class Kind { scripted, http };

    Kind kind = Kind::scripted;
    nlohmann::json script;  // scripted: {"queues": {...}}
    HttpBackendConfig http;

    bool operator==(const BackendConfig& other) const;
};

// Builds a fresh backend. Scripted backends get their own queues, so every
// conversation replays the script from the start.
BackendHandle make_backend(const BackendConfig& config);

struct AgentSpec {
    std::string agent_id;
    std::string role_name;
    std::string role_text;
    MemoryTemplatePtr tmpl;
    std::string backend;
    std::optional<std::string> update_backend;  // defaults to `backend`

    bool operator==(const AgentSpec& other) const;
};

// One-slot template given to agents whose scenario names no template.
MemoryTemplatePtr default_memory_template();

struct CounterConfig {
    CounterMode mode = CounterMode::default_heuristic;
    int bytes_per_token = 4;
    bool operator==(const CounterConfig&) const = default;
};

struct ScenarioConfig {
    std::string name;
    std::string task_text;
    std::vector<AgentSpec> agents;
    std::vector<std::string> worker_order;
    std::int64_t max_turns = 64;
    std::int64_t max_context_tokens = 8192;
    Mode mode = Mode::intrinsic;
    std::int64_t seed = 0;
    int memory_retry_limit = 2;
    std::string proposal_marker = "PROPOSAL";
    double temperature = 0.0;
    std::optional<std::int64_t> max_output_tokens;
    CounterConfig token_counter;
    std::map<std::string, BackendConfig> backends;
    std::optional<std::string> judge_backend;
    std::string output_dir = "runs";

    const AgentSpec* find_agent(std::string_view id) const;
    TokenCounter make_counter() const;

    bool operator==(const ScenarioConfig&) const = default;
};

// Parses and validates a scenario document. Relative file references
// (task_file, role_file, template paths, script paths) resolve against
// `base_dir`. All problems are collected into one LoadError.
ScenarioConfig parse_scenario(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir,
                              const std::string& source = "<scenario>");

ScenarioConfig load_scenario(const std::filesystem::path& path);

// Self-contained form: task, role texts, templates and scripts are inlined.
nlohmann::ordered_json scenario_to_json(const ScenarioConfig& config);
void write_scenario(const ScenarioConfig& config, const std::filesystem::path& path);

// Re-runs the semantic checks on a config built in code.
void validate_scenario(const ScenarioConfig& config);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace ima
