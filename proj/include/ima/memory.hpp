#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ima/backend.hpp"

namespace ima {

struct SlotSpec {
    std::string identifier;
    std::string description;
    std::vector<SlotSpec> children;

    bool is_leaf() const { return children.empty(); }
    bool operator==(const SlotSpec&) const = default;
};

// An ordered tree of named memory slots. Immutable once built; share it
// through MemoryTemplatePtr.
class MemoryTemplate {
public:
    // Throws TemplateError when there are no slots, an identifier is empty,
    // or siblings share an identifier.
    MemoryTemplate(std::string id, std::vector<SlotSpec> slots);

    // Template file form: a slot with children is an object, a leaf slot is a
    // string holding its description. Key order is preserved.
    static MemoryTemplate from_json(std::string id, const nlohmann::ordered_json& doc);
    nlohmann::ordered_json to_json() const;

    const std::string& id() const { return id_; }
    const std::vector<SlotSpec>& slots() const { return slots_; }

    // Every leaf path, e.g. "/proposed_solution/details", in template order.
    std::vector<std::string> leaf_paths() const;

    bool operator==(const MemoryTemplate&) const = default;

private:
    std::string id_;
    std::vector<SlotSpec> slots_;
};

using MemoryTemplatePtr = std::shared_ptr<const MemoryTemplate>;

// M_{n,m}: one agent's slot-conforming memory. `content` mirrors the template
// tree with string leaves. `turn_index` counts applied update calls.
struct MemoryState {
    MemoryTemplatePtr tmpl;
    nlohmann::json content;
    std::int64_t turn_index = 0;

    const std::string& template_id() const { return tmpl->id(); }
};

enum class ViolationKind { missing, extra, not_string, not_object };

std::string to_string(ViolationKind kind);

struct Violation {
    std::string path;
    ViolationKind kind;
    bool operator==(const Violation&) const = default;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

ValidationResult validate_content(const nlohmann::json& content, const MemoryTemplate& tmpl);
ValidationResult validate_state(const MemoryState& state, const MemoryTemplate& tmpl);

MemoryState initial_memory(MemoryTemplatePtr tmpl);

// JSON pointer escaping for one path segment ("~" -> "~0", "/" -> "~1").
std::string escape_pointer_segment(std::string_view segment);

// Compact, key-sorted serialization used everywhere memory content is shown.
std::string serialize_content(const nlohmann::json& content);

std::string render_update_prompt(std::string_view role, const MemoryState& previous,
                                 std::string_view output);

enum class UpdateOutcome { applied, retried_then_applied, rejected_kept_previous };

std::string to_string(UpdateOutcome outcome);

struct MemoryUpdateEvent {
    std::string agent_id;
    std::int64_t turn_index = 0;  // global turn that triggered the update
    UpdateOutcome outcome = UpdateOutcome::applied;
    int attempts = 1;
    std::string raw_response;     // the last response received
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t memory_bytes = 0;  // size of the serialized content after the update
};

nlohmann::ordered_json to_json(const MemoryUpdateEvent& event);
MemoryUpdateEvent memory_update_event_from_json(const nlohmann::json& j);

struct UpdateRequest {
    std::string agent_id;
    std::string role;
    std::int64_t turn = 0;
    int retry_limit = 2;
    Sampling sampling;
};

struct UpdateResult {
    MemoryState state;
    MemoryUpdateEvent event;
    std::vector<ChatResult> exchanges;  // one per attempt, for usage accounting
};

// Parses an update response into a JSON value. Accepts bare JSON or JSON
// wrapped in a single ``` fence. Returns a discarded value on failure.
nlohmann::json parse_update_response(std::string_view response);

// Intrinsic memory update. Sends the update prompt, accepting the first
// response that parses and validates; after retry_limit failed retries keeps
// the previous content. turn_index is incremented in every case. Backend
// failures propagate as BackendError.
UpdateResult update_memory(const MemoryState& previous, std::string_view output,
                           const UpdateRequest& request, Backend& backend);

}  // namespace ima
