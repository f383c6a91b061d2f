// Python bindings. Structured values cross the boundary as JSON text and are
// decoded by the package's __init__.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ima/context.hpp"
#include "ima/evaluation.hpp"
#include "ima/memory.hpp"
#include "ima/orchestrator.hpp"
#include "ima/scenario.hpp"
#include "ima/scheduler.hpp"
#include "ima/text.hpp"

namespace py = pybind11;

namespace {

std::string run_scenario(const std::filesystem::path& path, std::optional<std::int64_t> seed,
                         std::optional<std::string> mode, std::optional<std::int64_t> max_turns,
                         std::optional<std::int64_t> max_context_tokens,
                         std::optional<std::filesystem::path> out)
{
    auto config = ima::load_scenario(path);
    if (seed) {
        config.seed = *seed;
    }
    if (mode) {
        config.mode = ima::mode_from_string(*mode);
    }
    if (max_turns) {
        config.max_turns = *max_turns;
    }
    if (max_context_tokens) {
        config.max_context_tokens = *max_context_tokens;
    }
    ima::validate_scenario(config);
    ima::RunOptions options;
    options.out = std::move(out);
    ima::RunResult result;
    {
        py::gil_scoped_release release;
        result = ima::run_conversation(config, options);
    }
    auto j = ima::to_json(result.report);
    auto turns = nlohmann::ordered_json::array();
    for (const auto& t : result.transcript.turns) {
        turns.push_back(nlohmann::ordered_json::parse(ima::to_json(t).dump()));
    }
    j["transcript"] = std::move(turns);
    if (result.run_dir) {
        j["run_dir"] = result.run_dir->string();
    }
    return ima::dump_json(j);
}

py::tuple validate_memory(const std::string& template_json, const std::string& content_json)
{
    const auto tmpl = ima::MemoryTemplate::from_json("template", nlohmann::ordered_json::parse(template_json));
    const auto result = ima::validate_content(nlohmann::json::parse(content_json), tmpl);
    std::vector<std::pair<std::string, std::string>> violations;
    for (const auto& v : result.violations) {
        violations.emplace_back(v.path, ima::to_string(v.kind));
    }
    return py::make_tuple(result.ok(), violations);
}

std::string render_update_prompt(const std::string& role, const std::string& memory_json,
                                 const std::string& output)
{
    ima::MemoryState state;
    state.content = nlohmann::json::parse(memory_json);
    return ima::render_update_prompt(role, state, output);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Multi-agent conversations with intrinsic structured memory";

    auto error = py::register_exception<ima::Error>(m, "Error");
    py::register_exception<ima::LoadError>(m, "LoadError", error);
    py::register_exception<ima::PreconditionError>(m, "PreconditionError", error);
    py::register_exception<ima::TemplateError>(m, "TemplateError", error);
    py::register_exception<ima::ParseError>(m, "ParseError", error);
    py::register_exception<ima::BackendError>(m, "BackendError", error);
    py::register_exception<ima::PersistError>(m, "PersistError", error);

    m.def("_run_scenario", &run_scenario, py::arg("path"), py::arg("seed") = py::none(),
          py::arg("mode") = py::none(), py::arg("max_turns") = py::none(),
          py::arg("max_context_tokens") = py::none(), py::arg("out") = py::none());

    m.def("_load_scenario", [](const std::filesystem::path& path) {
        return ima::dump_json(ima::scenario_to_json(ima::load_scenario(path)));
    });

    m.def("detect_flags", [](const std::string& text) {
        const auto f = ima::detect_flags(text);
        return py::make_tuple(f.accept, f.finalize);
    }, py::arg("text"), "(accept, finalize) flags carried by an agent output.");

    m.def("select_context",
          [](const std::vector<std::string>& history, const std::string& memory_block, std::int64_t max_tokens,
             int bytes_per_token) {
              const auto s = ima::select_context(history, memory_block, max_tokens,
                                                 ima::TokenCounter::heuristic(bytes_per_token));
              return py::make_tuple(s.first_recent, s.total_tokens, s.over_budget);
          },
          py::arg("history"), py::arg("memory_block"), py::arg("max_tokens"), py::arg("bytes_per_token") = 4,
          "(first_recent, total_tokens, over_budget) for history[0] = task.");

    m.def("_validate_memory", &validate_memory);
    m.def("_render_update_prompt", &render_update_prompt);
    m.def("render_judge_prompt", [](const std::string& design) { return ima::render_judge_prompt(design); },
          py::arg("design"));
    m.def("_parse_scorecard", [](const std::string& response) {
        return ima::dump_json(ima::to_json(ima::parse_scorecard(response)));
    });

    m.def("token_efficiency", &ima::token_efficiency, py::arg("avg_reward"), py::arg("avg_tokens"));
    m.def("format_percent_change", &ima::format_percent_change, py::arg("pct"));
    m.def("rank_sum_test",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const auto r = ima::rank_sum_test(a, b);
              return py::make_tuple(r.statistic, r.p_value, r.exact);
          },
          py::arg("sample_a"), py::arg("sample_b"), "(statistic, two-sided p, exact).");
}
