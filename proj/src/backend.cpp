#include "ima/backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "ima/text.hpp"

namespace ima {

std::string to_string(Purpose purpose)
{
    switch (purpose) {
    case Purpose::turn: return "turn";
    case Purpose::memory_update: return "memory_update";
    case Purpose::judge: return "judge";
    }
    return "unknown";
}

UsageTotals count_remote_usage(std::span<const ChatResult> results)
{
    UsageTotals totals;
    for (const auto& r : results) {
        totals.prompt_tokens += r.prompt_tokens;
        totals.completion_tokens += r.completion_tokens;
    }
    return totals;
}

// ---------------------------------------------------------------------------
// ScriptedBackend

void ScriptedBackend::push(const std::string& key, std::string response)
{
    std::lock_guard lock(mutex_);
    queues_[key].push_back(std::move(response));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& script)
{
    auto backend = std::make_shared<ScriptedBackend>();
    const auto queues = script.find("queues");
    if (queues == script.end() || !queues->is_object()) {
        throw Error("scripted backend: expected an object under \"queues\"");
    }
    for (const auto& [key, responses] : queues->items()) {
        if (!responses.is_array()) {
            throw Error("scripted backend: queue '" + key + "' must be an array");
        }
        auto& queue = backend->queues_[key];
        for (const auto& response : responses) {
            queue.push_back(response.is_string() ? response.get<std::string>() : dump_json(response));
        }
    }
    return backend;
}

ChatResult ScriptedBackend::complete(const ChatExchange& exchange)
{
    const auto purpose = to_string(exchange.purpose);
    const std::string candidates[] = {
        exchange.agent_id + "/" + purpose,
        "*/" + purpose,
        exchange.agent_id,
        "*",
    };
    std::lock_guard lock(mutex_);
    for (const auto& key : candidates) {
        auto it = queues_.find(key);
        if (it == queues_.end()) {
            continue;
        }
        if (it->second.empty()) {
            throw ScriptExhausted(key);
        }
        ChatResult result;
        result.text = std::move(it->second.front());
        it->second.pop_front();
        return result;
    }
    throw ScriptExhausted(candidates[0]);
}

std::size_t ScriptedBackend::remaining(const std::string& key) const
{
    std::lock_guard lock(mutex_);
    const auto it = queues_.find(key);
    return it == queues_.end() ? 0 : it->second.size();
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config))
{
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("http backend: endpoint '" + config_.endpoint + "' has no scheme");
    }
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_port_ = config_.endpoint;
        path_ = "/";
    } else {
        scheme_host_port_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
    if (config_.retry.max_retries < 0) {
        throw Error("http backend: max_retries must be >= 0");
    }
}

nlohmann::json HttpBackend::request_body(const ChatExchange& exchange) const
{
    auto messages = nlohmann::json::array();
    if (!exchange.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", exchange.system_text}});
    }
    messages.push_back({{"role", "user"}, {"content", exchange.user_text}});

    nlohmann::json body = {
        {"model", config_.model},
        {"messages", std::move(messages)},
        {"temperature", exchange.sampling.temperature},
    };
    if (exchange.sampling.seed) {
        body["seed"] = *exchange.sampling.seed;
    }
    if (exchange.sampling.max_output_tokens) {
        body["max_tokens"] = *exchange.sampling.max_output_tokens;
    }
    return body;
}

namespace {

ChatResult parse_completion(const std::string& body)
{
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw BackendError(BackendErrorKind::permanent, "http backend: response is not a JSON object", 200);
    }
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) {
        throw BackendError(BackendErrorKind::permanent, "http backend: response has no choices", 200);
    }
    const auto& first = choices->front();
    ChatResult result;
    if (first.contains("message") && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
        result.text = first["message"]["content"].get<std::string>();
    } else if (first.contains("text") && first["text"].is_string()) {
        result.text = first["text"].get<std::string>();
    } else {
        throw BackendError(BackendErrorKind::permanent, "http backend: first choice has no message content", 200);
    }
    if (const auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
        result.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
        result.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    }
    return result;
}

}  // namespace

ChatResult HttpBackend::complete(const ChatExchange& exchange)
{
    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const auto body = dump_json(request_body(exchange));

    auto backoff = config_.retry.backoff;
    std::string last_failure;
    int last_status = 0;
    for (int attempt = 0; attempt <= config_.retry.max_retries; ++attempt) {
        if (attempt > 0 && backoff.count() > 0) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        const auto started = std::chrono::steady_clock::now();
        auto response = client.Post(path_, headers, body, "application/json");
        if (!response) {
            last_failure = "http backend: transport error: " + httplib::to_string(response.error());
            last_status = 0;
            continue;
        }
        const int status = response->status;
        if (status >= 500) {
            last_failure = "http backend: server error " + std::to_string(status);
            last_status = status;
            continue;
        }
        if (status < 200 || status >= 300) {
            throw BackendError(BackendErrorKind::permanent,
                               "http backend: request rejected with status " + std::to_string(status) + ": " +
                                   response->body.substr(0, 512),
                               status);
        }
        auto result = parse_completion(response->body);
        result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
        return result;
    }
    throw BackendError(BackendErrorKind::transient,
                       last_failure + " (after " + std::to_string(config_.retry.max_retries + 1) + " attempts)",
                       last_status);
}

}  // namespace ima
