#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "ima/errors.hpp"

namespace ima {

struct Sampling {
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::optional<std::int64_t> max_output_tokens;
};

// What a request is for. Scripted backends route on it; HTTP backends ignore it.
enum class Purpose { turn, memory_update, judge };

std::string to_string(Purpose purpose);

struct ChatExchange {
    std::string system_text;
    std::string user_text;
    Sampling sampling;

    // Routing metadata, never sent as content.
    std::string agent_id;
    Purpose purpose = Purpose::turn;
};

struct ChatResult {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
};

struct UsageTotals {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    std::int64_t total() const { return prompt_tokens + completion_tokens; }
    bool operator==(const UsageTotals&) const = default;
};

UsageTotals count_remote_usage(std::span<const ChatResult> results);

class Backend {
public:
    virtual ~Backend() = default;

    // Must be safe to call from several threads at once.
    virtual ChatResult complete(const ChatExchange& exchange) = 0;
};

using BackendHandle = std::shared_ptr<Backend>;

// Deterministic backend replaying queued responses.
//
// Queues are keyed by strings. For a request from agent A with purpose P the
// first existing queue among "A/P", "*/P", "A", "*" is used; if that queue is
// empty the call fails with ScriptExhausted rather than falling through.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;

    void push(const std::string& key, std::string response);

    // {"queues": {"<key>": [response, ...]}}; non-string responses are
    // stored as their compact JSON serialization.
    static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& script);

    ChatResult complete(const ChatExchange& exchange) override;

    std::size_t remaining(const std::string& key) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>> queues_;
};

// Backend whose behavior is an arbitrary callable. Handy for tests and bindings.
class FunctionBackend : public Backend {
public:
    using Fn = std::function<ChatResult(const ChatExchange&)>;
    explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
    ChatResult complete(const ChatExchange& exchange) override { return fn_(exchange); }

private:
    Fn fn_;
};

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds backoff{500};  // doubled after every failed attempt
};

struct HttpBackendConfig {
    std::string endpoint;  // full URL, e.g. http://localhost:11434/v1/chat/completions
    std::string model;
    std::string api_key_env = "LLM_API_KEY";
    std::chrono::seconds timeout{120};
    RetryPolicy retry;
};

// Client for chat-completions style endpoints.
//
// Request body: {"model", "messages": [{"role":"system",...}?, {"role":"user",...}],
// "temperature", "seed"?, "max_tokens"?}. The system message is omitted when
// system_text is empty. The reply text is choices[0].message.content; usage is
// read from usage.prompt_tokens / usage.completion_tokens when present.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ChatResult complete(const ChatExchange& exchange) override;

    nlohmann::json request_body(const ChatExchange& exchange) const;
    const HttpBackendConfig& config() const { return config_; }

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace ima
