#include "ima/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ima/scheduler.hpp"
#include "ima/text.hpp"

namespace ima {

namespace fs = std::filesystem;
using Doc = nlohmann::ordered_json;

std::string to_string(Mode mode)
{
    return mode == Mode::intrinsic ? "intrinsic" : "baseline";
}

Mode mode_from_string(std::string_view name)
{
    if (name == "intrinsic") {
        return Mode::intrinsic;
    }
    if (name == "baseline") {
        return Mode::baseline;
    }
    throw PreconditionError("mode must be 'intrinsic' or 'baseline', got '" + std::string(name) + "'");
}

bool BackendConfig::operator==(const BackendConfig& other) const
{
    if (kind != other.kind) {
        return false;
    }
    if (kind == Kind::scripted) {
        return script == other.script;
    }
    return http.endpoint == other.http.endpoint && http.model == other.http.model &&
           http.api_key_env == other.http.api_key_env && http.timeout == other.http.timeout &&
           http.retry.max_retries == other.http.retry.max_retries && http.retry.backoff == other.http.retry.backoff;
}

BackendHandle make_backend(const BackendConfig& config)
{
    if (config.kind == BackendConfig::Kind::scripted) {
        return ScriptedBackend::from_json(config.script);
    }
    return std::make_shared<HttpBackend>(config.http);
}

bool AgentSpec::operator==(const AgentSpec& other) const
{
    const bool same_template = (tmpl == other.tmpl) || (tmpl && other.tmpl && *tmpl == *other.tmpl);
    return agent_id == other.agent_id && role_name == other.role_name && role_text == other.role_text &&
           same_template && backend == other.backend && update_backend == other.update_backend;
}

MemoryTemplatePtr default_memory_template()
{
    static const auto tmpl = std::make_shared<const MemoryTemplate>(
        "default_one_slot",
        std::vector<SlotSpec>{{"current_position", "The agent's current position in the discussion", {}}});
    return tmpl;
}

const AgentSpec* ScenarioConfig::find_agent(std::string_view id) const
{
    for (const auto& a : agents) {
        if (a.agent_id == id) {
            return &a;
        }
    }
    return nullptr;
}

TokenCounter ScenarioConfig::make_counter() const
{
    if (token_counter.mode == CounterMode::backend_reported) {
        return TokenCounter::backend_reported(token_counter.bytes_per_token);
    }
    return TokenCounter::heuristic(token_counter.bytes_per_token);
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

namespace {

const std::set<std::string> kTopLevelKeys = {
    "name", "task_text", "task_file", "agents", "worker_order", "max_turns", "max_context_tokens", "mode", "seed",
    "memory_retry_limit", "proposal_marker", "temperature", "max_output_tokens", "token_counter", "backends",
    "default_backend", "judge_backend", "output_dir"};

class Checker {
public:
    explicit Checker(fs::path base_dir) : base_dir_(std::move(base_dir)) {}

    void fail(const std::string& path, const std::string& message) { diags_.push_back({path, message}); }
    const std::vector<Diagnostic>& diagnostics() const { return diags_; }

    fs::path resolve(const std::string& p) const
    {
        fs::path path(p);
        return path.is_absolute() ? path : base_dir_ / path;
    }

    std::optional<std::string> string_at(const Doc& obj, const std::string& key, const std::string& path,
                                         bool required)
    {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) {
                fail(path + "/" + key, "required string is missing");
            }
            return std::nullopt;
        }
        if (!it->is_string()) {
            fail(path + "/" + key, "must be a string");
            return std::nullopt;
        }
        return it->get<std::string>();
    }

    template <typename Int>
    Int int_at(const Doc& obj, const std::string& key, const std::string& path, Int fallback,
               Int minimum)
    {
        const auto it = obj.find(key);
        if (it == obj.end()) {
            return fallback;
        }
        if (!it->is_number_integer()) {
            fail(path + "/" + key, "must be an integer");
            return fallback;
        }
        const auto value = it->get<long long>();
        if (value < static_cast<long long>(minimum)) {
            fail(path + "/" + key, "must be >= " + std::to_string(minimum));
            return fallback;
        }
        return static_cast<Int>(value);
    }

    std::optional<std::string> text_or_file(const Doc& obj, const std::string& text_key,
                                            const std::string& file_key, const std::string& path)
    {
        if (obj.contains(text_key)) {
            return string_at(obj, text_key, path, true);
        }
        if (const auto file = string_at(obj, file_key, path, false)) {
            try {
                return std::string(trim(read_text_file(resolve(*file))));
            } catch (const Error& e) {
                fail(path + "/" + file_key, e.what());
                return std::nullopt;
            }
        }
        fail(path + "/" + text_key, "required: give '" + text_key + "' or '" + file_key + "'");
        return std::nullopt;
    }

    std::optional<nlohmann::json> json_or_file(const Doc& value, const std::string& path)
    {
        if (value.is_object()) {
            return nlohmann::json::parse(value.dump());
        }
        if (!value.is_string()) {
            fail(path, "must be an object or a path to a JSON file");
            return std::nullopt;
        }
        try {
            auto parsed = nlohmann::json::parse(read_text_file(resolve(value.get<std::string>())), nullptr, false);
            if (parsed.is_discarded()) {
                fail(path, "file '" + value.get<std::string>() + "' is not valid JSON");
                return std::nullopt;
            }
            return parsed;
        } catch (const Error& e) {
            fail(path, e.what());
            return std::nullopt;
        }
    }

    MemoryTemplatePtr load_template(const Doc& agent, const std::string& path)
    {
        const auto it = agent.find("template");
        if (it == agent.end() || it->is_null()) {
            return default_memory_template();
        }
        const auto tpath = path + "/template";
        try {
            if (it->is_string()) {
                const auto file = resolve(it->get<std::string>());
                const auto key = file.lexically_normal().string();
                if (const auto cached = templates_.find(key); cached != templates_.end()) {
                    return cached->second;
                }
                const auto doc = nlohmann::ordered_json::parse(read_text_file(file), nullptr, false);
                if (doc.is_discarded()) {
                    fail(tpath, "template file '" + it->get<std::string>() + "' is not valid JSON");
                    return nullptr;
                }
                const auto id = agent.value("template_id", file.stem().string());
                auto tmpl = std::make_shared<const MemoryTemplate>(MemoryTemplate::from_json(id, doc));
                templates_[key] = tmpl;
                return tmpl;
            }
            if (it->is_object()) {
                const auto id = agent.value("template_id", agent.value("id", std::string("agent")) + "_template");
                return std::make_shared<const MemoryTemplate>(MemoryTemplate::from_json(id, *it));
            }
            fail(tpath, "must be a template object or a path to a template file");
        } catch (const Error& e) {
            fail(tpath, e.what());
        }
        return nullptr;
    }

    BackendConfig parse_backend(const Doc& b, const std::string& path)
    {
        BackendConfig config;
        if (!b.is_object()) {
            fail(path, "must be an object");
            return config;
        }
        const auto kind = string_at(b, "kind", path, true);
        if (kind == "scripted") {
            config.kind = BackendConfig::Kind::scripted;
            const auto script = b.find("script");
            if (script == b.end()) {
                fail(path + "/script", "required for scripted backends");
            } else if (auto doc = json_or_file(*script, path + "/script")) {
                try {
                    ScriptedBackend::from_json(*doc);
                    config.script = std::move(*doc);
                } catch (const Error& e) {
                    fail(path + "/script", e.what());
                }
            }
        } else if (kind == "http") {
            config.kind = BackendConfig::Kind::http;
            config.http.endpoint = string_at(b, "endpoint", path, true).value_or("");
            config.http.model = string_at(b, "model", path, true).value_or("");
            config.http.api_key_env = string_at(b, "api_key_env", path, false).value_or("LLM_API_KEY");
            config.http.timeout = std::chrono::seconds(int_at<long long>(b, "timeout_s", path, 120, 1));
            config.http.retry.max_retries = int_at<int>(b, "max_retries", path, 3, 0);
            config.http.retry.backoff = std::chrono::milliseconds(int_at<long long>(b, "backoff_ms", path, 500, 0));
            if (!config.http.endpoint.empty() && config.http.endpoint.find("://") == std::string::npos) {
                fail(path + "/endpoint", "must be a URL such as http://host:port/v1/chat/completions");
            }
        } else if (kind) {
            fail(path + "/kind", "must be 'scripted' or 'http', got '" + *kind + "'");
        }
        return config;
    }

private:
    fs::path base_dir_;
    std::vector<Diagnostic> diags_;
    std::map<std::string, MemoryTemplatePtr> templates_;
};

void check_semantics(const ScenarioConfig& c, std::vector<Diagnostic>& diags)
{
    std::set<std::string> ids;
    for (std::size_t i = 0; i < c.agents.size(); ++i) {
        const auto& a = c.agents[i];
        const auto path = "/agents/" + std::to_string(i);
        if (a.agent_id.empty()) {
            diags.push_back({path + "/id", "must not be empty"});
        } else if (!ids.insert(a.agent_id).second) {
            diags.push_back({path + "/id", "duplicate agent id '" + a.agent_id + "'"});
        }
        if (trim(a.role_text).empty()) {
            diags.push_back({path + "/role_text", "must not be empty"});
        }
        if (!a.backend.empty() && !c.backends.contains(a.backend)) {
            diags.push_back({path + "/backend", "unknown backend '" + a.backend + "'"});
        } else if (a.backend.empty()) {
            diags.push_back({path + "/backend", "no backend bound (set 'backend' or 'default_backend')"});
        }
        if (a.update_backend && !c.backends.contains(*a.update_backend)) {
            diags.push_back({path + "/update_backend", "unknown backend '" + *a.update_backend + "'"});
        }
    }
    if (c.agents.empty()) {
        diags.push_back({"/agents", "at least one agent is required"});
    }
    for (const auto role : {roles::kCoordinator, roles::kSummarizer, roles::kEvaluator, roles::kFinalizer}) {
        if (!ids.empty() && !ids.contains(std::string(role))) {
            diags.push_back({"/agents", "missing required agent '" + std::string(role) + "'"});
        }
    }
    if (c.worker_order.empty()) {
        diags.push_back({"/worker_order", "at least one worker is required"});
    }
    std::set<std::string> workers;
    for (std::size_t i = 0; i < c.worker_order.size(); ++i) {
        const auto& w = c.worker_order[i];
        const auto path = "/worker_order/" + std::to_string(i);
        if (!ids.contains(w)) {
            diags.push_back({path, "unknown agent '" + w + "'"});
        }
        if (!workers.insert(w).second) {
            diags.push_back({path, "agent '" + w + "' listed twice"});
        }
        if (w == roles::kCoordinator || w == roles::kSummarizer || w == roles::kEvaluator || w == roles::kFinalizer) {
            diags.push_back({path, "'" + w + "' has a fixed role and cannot be a worker"});
        }
    }
    if (trim(c.task_text).empty()) {
        diags.push_back({"/task_text", "must not be empty"});
    }
    if (c.judge_backend && !c.backends.contains(*c.judge_backend)) {
        diags.push_back({"/judge_backend", "unknown backend '" + *c.judge_backend + "'"});
    }
    if (c.max_turns < 1) {
        diags.push_back({"/max_turns", "must be >= 1"});
    }
    if (c.max_context_tokens < 1) {
        diags.push_back({"/max_context_tokens", "must be >= 1"});
    }
    if (c.memory_retry_limit < 0) {
        diags.push_back({"/memory_retry_limit", "must be >= 0"});
    }
    if (c.token_counter.mode == CounterMode::custom) {
        diags.push_back({"/token_counter/mode", "custom counters cannot be configured from a file"});
    }
}

}  // namespace

ScenarioConfig parse_scenario(const Doc& doc, const fs::path& base_dir, const std::string& source)
{
    if (!doc.is_object()) {
        throw LoadError(source, {{"", "scenario must be a JSON object"}});
    }
    Checker check(base_dir);
    ScenarioConfig c;

    for (const auto& [key, value] : doc.items()) {
        if (!kTopLevelKeys.contains(key)) {
            check.fail("/" + key, "unknown key");
        }
    }

    c.name = check.string_at(doc, "name", "", false).value_or("scenario");
    c.task_text = check.text_or_file(doc, "task_text", "task_file", "").value_or("");

    if (const auto it = doc.find("backends"); it != doc.end()) {
        if (!it->is_object()) {
            check.fail("/backends", "must be an object");
        } else {
            for (const auto& [name, b] : it->items()) {
                c.backends[name] = check.parse_backend(b, "/backends/" + name);
            }
        }
    }
    auto default_backend = check.string_at(doc, "default_backend", "", false);
    if (!default_backend && c.backends.size() == 1) {
        default_backend = c.backends.begin()->first;
    }

    if (const auto it = doc.find("agents"); it == doc.end() || !it->is_array()) {
        check.fail("/agents", "required array is missing");
    } else {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& a = (*it)[i];
            const auto path = "/agents/" + std::to_string(i);
            if (!a.is_object()) {
                check.fail(path, "must be an object");
                continue;
            }
            AgentSpec spec;
            spec.agent_id = roles::canonical_id(check.string_at(a, "id", path, true).value_or(""));
            spec.role_name = check.string_at(a, "role_name", path, false).value_or(spec.agent_id);
            spec.role_text = check.text_or_file(a, "role_text", "role_file", path).value_or("");
            spec.tmpl = check.load_template(a, path);
            spec.backend = check.string_at(a, "backend", path, false).value_or(default_backend.value_or(""));
            spec.update_backend = check.string_at(a, "update_backend", path, false);
            c.agents.push_back(std::move(spec));
        }
    }

    if (const auto it = doc.find("worker_order"); it == doc.end()) {
        c.worker_order = roles::default_worker_order();
    } else if (!it->is_array()) {
        check.fail("/worker_order", "must be an array of agent ids");
    } else {
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_string()) {
                check.fail("/worker_order/" + std::to_string(i), "must be a string");
                continue;
            }
            c.worker_order.push_back(roles::canonical_id((*it)[i].get<std::string>()));
        }
    }

    c.max_turns = check.int_at<std::int64_t>(doc, "max_turns", "", 64, 1);
    c.max_context_tokens = check.int_at<std::int64_t>(doc, "max_context_tokens", "", 8192, 1);
    if (const auto mode = check.string_at(doc, "mode", "", false)) {
        try {
            c.mode = mode_from_string(*mode);
        } catch (const Error& e) {
            check.fail("/mode", e.what());
        }
    }
    c.seed = check.int_at<std::int64_t>(doc, "seed", "", 0, std::numeric_limits<std::int64_t>::min());
    c.memory_retry_limit = check.int_at<int>(doc, "memory_retry_limit", "", 2, 0);
    c.proposal_marker = check.string_at(doc, "proposal_marker", "", false).value_or("PROPOSAL");
    if (const auto it = doc.find("temperature"); it != doc.end()) {
        if (!it->is_number() || it->get<double>() < 0.0) {
            check.fail("/temperature", "must be a number >= 0");
        } else {
            c.temperature = it->get<double>();
        }
    }
    if (doc.contains("max_output_tokens")) {
        c.max_output_tokens = check.int_at<std::int64_t>(doc, "max_output_tokens", "", 0, 1);
    }
    if (const auto it = doc.find("token_counter"); it != doc.end()) {
        if (!it->is_object()) {
            check.fail("/token_counter", "must be an object");
        } else {
            if (const auto mode = check.string_at(*it, "mode", "/token_counter", false)) {
                try {
                    c.token_counter.mode = counter_mode_from_string(*mode);
                } catch (const Error& e) {
                    check.fail("/token_counter/mode", e.what());
                }
            }
            c.token_counter.bytes_per_token = check.int_at<int>(*it, "bytes_per_token", "/token_counter", 4, 1);
        }
    }
    c.judge_backend = check.string_at(doc, "judge_backend", "", false);
    c.output_dir = check.string_at(doc, "output_dir", "", false).value_or("runs");

    auto diags = check.diagnostics();
    check_semantics(c, diags);
    if (!diags.empty()) {
        throw LoadError(source, std::move(diags));
    }
    return c;
}

ScenarioConfig load_scenario(const fs::path& path)
{
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw LoadError(path.string(), {{"", e.what()}});
    }
    const auto doc = Doc::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        throw LoadError(path.string(), {{"", "not valid JSON"}});
    }
    return parse_scenario(doc, path.parent_path(), path.string());
}

void validate_scenario(const ScenarioConfig& config)
{
    std::vector<Diagnostic> diags;
    check_semantics(config, diags);
    if (!diags.empty()) {
        throw LoadError("<config>", std::move(diags));
    }
}

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& c)
{
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["task_text"] = c.task_text;
    auto agents = nlohmann::ordered_json::array();
    for (const auto& a : c.agents) {
        nlohmann::ordered_json aj;
        aj["id"] = a.agent_id;
        aj["role_name"] = a.role_name;
        aj["role_text"] = a.role_text;
        if (a.tmpl) {
            aj["template_id"] = a.tmpl->id();
            aj["template"] = a.tmpl->to_json();
        }
        aj["backend"] = a.backend;
        if (a.update_backend) {
            aj["update_backend"] = *a.update_backend;
        }
        agents.push_back(std::move(aj));
    }
    j["agents"] = std::move(agents);
    j["worker_order"] = c.worker_order;
    j["max_turns"] = c.max_turns;
    j["max_context_tokens"] = c.max_context_tokens;
    j["mode"] = to_string(c.mode);
    j["seed"] = c.seed;
    j["memory_retry_limit"] = c.memory_retry_limit;
    j["proposal_marker"] = c.proposal_marker;
    j["temperature"] = c.temperature;
    if (c.max_output_tokens) {
        j["max_output_tokens"] = *c.max_output_tokens;
    }
    j["token_counter"] = {{"mode", to_string(c.token_counter.mode)},
                          {"bytes_per_token", c.token_counter.bytes_per_token}};
    auto backends = nlohmann::ordered_json::object();
    for (const auto& [name, b] : c.backends) {
        if (b.kind == BackendConfig::Kind::scripted) {
            backends[name] = {{"kind", "scripted"}, {"script", nlohmann::ordered_json::parse(b.script.dump())}};
        } else {
            backends[name] = {{"kind", "http"},
                              {"endpoint", b.http.endpoint},
                              {"model", b.http.model},
                              {"api_key_env", b.http.api_key_env},
                              {"timeout_s", b.http.timeout.count()},
                              {"max_retries", b.http.retry.max_retries},
                              {"backoff_ms", b.http.retry.backoff.count()}};
        }
    }
    j["backends"] = std::move(backends);
    if (c.judge_backend) {
        j["judge_backend"] = *c.judge_backend;
    }
    j["output_dir"] = c.output_dir;
    return j;
}

void write_scenario(const ScenarioConfig& config, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PersistError("cannot write " + path.string());
    }
    out << dump_json(scenario_to_json(config), 2) << "\n";
    if (!out) {
        throw PersistError("failed writing " + path.string());
    }
}

}  // namespace ima
