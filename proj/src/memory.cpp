#include "ima/memory.hpp"

#include <set>
#include <utility>

#include "ima/prompts.hpp"
#include "ima/text.hpp"

namespace ima {

namespace {

void check_siblings(const std::vector<SlotSpec>& slots, const std::string& parent_path)
{
    if (slots.empty()) {
        throw TemplateError("memory template " + (parent_path.empty() ? std::string("root") : parent_path) +
                            " has no slots");
    }
    std::set<std::string_view> seen;
    for (const auto& slot : slots) {
        if (slot.identifier.empty()) {
            throw TemplateError("memory template slot under '" + parent_path + "' has an empty identifier");
        }
        const auto path = parent_path + "/" + escape_pointer_segment(slot.identifier);
        if (!seen.insert(slot.identifier).second) {
            throw TemplateError("duplicate memory slot " + path);
        }
        if (!slot.children.empty()) {
            check_siblings(slot.children, path);
        }
    }
}

std::vector<SlotSpec> slots_from_json(const nlohmann::ordered_json& obj, const std::string& path)
{
    if (!obj.is_object()) {
        throw TemplateError("memory template " + (path.empty() ? std::string("root") : path) +
                            " must be a JSON object");
    }
    if (obj.empty()) {
        throw TemplateError("memory template " + (path.empty() ? std::string("root") : path) +
                            " has no slots");
    }
    std::vector<SlotSpec> slots;
    slots.reserve(obj.size());
    for (const auto& [key, value] : obj.items()) {
        const auto child_path = path + "/" + escape_pointer_segment(key);
        SlotSpec slot;
        slot.identifier = key;
        if (value.is_string()) {
            slot.description = value.get<std::string>();
        } else if (value.is_object()) {
            slot.children = slots_from_json(value, child_path);
        } else {
            throw TemplateError("memory template slot " + child_path +
                                " must be a string description or an object of child slots");
        }
        slots.push_back(std::move(slot));
    }
    return slots;
}

nlohmann::ordered_json slots_to_json(const std::vector<SlotSpec>& slots)
{
    auto obj = nlohmann::ordered_json::object();
    for (const auto& slot : slots) {
        obj[slot.identifier] = slot.is_leaf() ? nlohmann::ordered_json(slot.description) : slots_to_json(slot.children);
    }
    return obj;
}

void collect_leaf_paths(const std::vector<SlotSpec>& slots, const std::string& prefix,
                        std::vector<std::string>& out)
{
    for (const auto& slot : slots) {
        auto path = prefix + "/" + escape_pointer_segment(slot.identifier);
        if (slot.is_leaf()) {
            out.push_back(std::move(path));
        } else {
            collect_leaf_paths(slot.children, path, out);
        }
    }
}

void validate_object(const nlohmann::json& obj, const std::vector<SlotSpec>& slots,
                     const std::string& prefix, std::vector<Violation>& out)
{
    for (const auto& slot : slots) {
        const auto path = prefix + "/" + escape_pointer_segment(slot.identifier);
        const auto it = obj.find(slot.identifier);
        if (it == obj.end()) {
            out.push_back({path, ViolationKind::missing});
        } else if (slot.is_leaf()) {
            if (!it->is_string()) {
                out.push_back({path, ViolationKind::not_string});
            }
        } else if (!it->is_object()) {
            out.push_back({path, ViolationKind::not_object});
        } else {
            validate_object(*it, slot.children, path, out);
        }
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const auto& slot : slots) {
            if (slot.identifier == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            out.push_back({prefix + "/" + escape_pointer_segment(key), ViolationKind::extra});
        }
    }
}

nlohmann::json empty_content(const std::vector<SlotSpec>& slots)
{
    auto obj = nlohmann::json::object();
    for (const auto& slot : slots) {
        obj[slot.identifier] = slot.is_leaf() ? nlohmann::json("") : empty_content(slot.children);
    }
    return obj;
}

}  // namespace

MemoryTemplate::MemoryTemplate(std::string id, std::vector<SlotSpec> slots)
    : id_(std::move(id)), slots_(std::move(slots))
{
    check_siblings(slots_, "");
}

MemoryTemplate MemoryTemplate::from_json(std::string id, const nlohmann::ordered_json& doc)
{
    return MemoryTemplate(std::move(id), slots_from_json(doc, ""));
}

nlohmann::ordered_json MemoryTemplate::to_json() const
{
    return slots_to_json(slots_);
}

std::vector<std::string> MemoryTemplate::leaf_paths() const
{
    std::vector<std::string> out;
    collect_leaf_paths(slots_, "", out);
    return out;
}

std::string to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::missing: return "missing";
    case ViolationKind::extra: return "extra";
    case ViolationKind::not_string: return "not_string";
    case ViolationKind::not_object: return "not_object";
    }
    return "unknown";
}

ValidationResult validate_content(const nlohmann::json& content, const MemoryTemplate& tmpl)
{
    ValidationResult result;
    if (!content.is_object()) {
        result.violations.push_back({"", ViolationKind::not_object});
        return result;
    }
    validate_object(content, tmpl.slots(), "", result.violations);
    return result;
}

ValidationResult validate_state(const MemoryState& state, const MemoryTemplate& tmpl)
{
    return validate_content(state.content, tmpl);
}

MemoryState initial_memory(MemoryTemplatePtr tmpl)
{
    if (!tmpl) {
        throw PreconditionError("initial_memory: null template");
    }
    auto content = empty_content(tmpl->slots());
    return MemoryState{std::move(tmpl), std::move(content), 0};
}

std::string escape_pointer_segment(std::string_view segment)
{
    std::string out;
    out.reserve(segment.size());
    for (char c : segment) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

std::string serialize_content(const nlohmann::json& content)
{
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    return content.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string render_update_prompt(std::string_view role, const MemoryState& previous,
                                 std::string_view output)
{
    const auto memory = serialize_content(previous.content);
    return substitute_once(prompts::kMemoryUpdate, {{prompts::kRolePlaceholder, role},
                                                    {prompts::kMemoryPlaceholder, memory},
                                                    {prompts::kOutputPlaceholder, output}});
}

std::string to_string(UpdateOutcome outcome)
{
    switch (outcome) {
    case UpdateOutcome::applied: return "applied";
    case UpdateOutcome::retried_then_applied: return "retried_then_applied";
    case UpdateOutcome::rejected_kept_previous: return "rejected_kept_previous";
    }
    return "unknown";
}

nlohmann::ordered_json to_json(const MemoryUpdateEvent& event)
{
    return nlohmann::ordered_json{
        {"agent_id", event.agent_id},
        {"turn_index", event.turn_index},
        {"outcome", to_string(event.outcome)},
        {"attempts", event.attempts},
        {"raw_response", event.raw_response},
        {"prompt_tokens", event.prompt_tokens},
        {"completion_tokens", event.completion_tokens},
        {"memory_bytes", event.memory_bytes},
    };
}

MemoryUpdateEvent memory_update_event_from_json(const nlohmann::json& j)
{
    MemoryUpdateEvent event;
    event.agent_id = j.at("agent_id").get<std::string>();
    event.turn_index = j.at("turn_index").get<std::int64_t>();
    const auto outcome = j.at("outcome").get<std::string>();
    if (outcome == "applied") {
        event.outcome = UpdateOutcome::applied;
    } else if (outcome == "retried_then_applied") {
        event.outcome = UpdateOutcome::retried_then_applied;
    } else if (outcome == "rejected_kept_previous") {
        event.outcome = UpdateOutcome::rejected_kept_previous;
    } else {
        throw Error("unknown memory update outcome '" + outcome + "'");
    }
    event.attempts = j.at("attempts").get<int>();
    event.raw_response = j.value("raw_response", "");
    event.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    event.completion_tokens = j.value("completion_tokens", std::int64_t{0});
    event.memory_bytes = j.value("memory_bytes", std::int64_t{0});
    return event;
}

nlohmann::json parse_update_response(std::string_view response)
{
    auto body = trim(response);
    if (body.starts_with("```")) {
        const auto first_newline = body.find('\n');
        const auto closing = body.rfind("```");
        if (first_newline != std::string_view::npos && closing > first_newline) {
            body = trim(body.substr(first_newline + 1, closing - first_newline - 1));
        }
    }
    return nlohmann::json::parse(body.begin(), body.end(), nullptr, false);
}

UpdateResult update_memory(const MemoryState& previous, std::string_view output,
                           const UpdateRequest& request, Backend& backend)
{
    if (!previous.tmpl) {
        throw PreconditionError("update_memory: state has no template");
    }
    if (request.retry_limit < 0) {
        throw PreconditionError("update_memory: retry_limit must be >= 0");
    }
    const auto& tmpl = *previous.tmpl;

    ChatExchange exchange;
    exchange.system_text = std::string(prompts::kMemoryUpdateSystem);
    exchange.user_text = render_update_prompt(request.role, previous, output);
    exchange.sampling = request.sampling;
    exchange.agent_id = request.agent_id;
    exchange.purpose = Purpose::memory_update;

    UpdateResult result{previous, {}, {}};
    result.state.turn_index = previous.turn_index + 1;
    result.event.agent_id = request.agent_id;
    result.event.turn_index = request.turn;
    result.event.outcome = UpdateOutcome::rejected_kept_previous;

    const int max_attempts = request.retry_limit + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        auto reply = backend.complete(exchange);
        result.event.attempts = attempt;
        result.event.raw_response = reply.text;
        result.event.prompt_tokens += reply.prompt_tokens;
        result.event.completion_tokens += reply.completion_tokens;
        auto parsed = parse_update_response(reply.text);
        result.exchanges.push_back(std::move(reply));
        if (parsed.is_discarded() || !validate_content(parsed, tmpl).ok()) {
            continue;
        }
        result.state.content = std::move(parsed);
        result.event.outcome = attempt == 1 ? UpdateOutcome::applied : UpdateOutcome::retried_then_applied;
        break;
    }
    result.event.memory_bytes = static_cast<std::int64_t>(serialize_content(result.state.content).size());
    return result;
}

}  // namespace ima
