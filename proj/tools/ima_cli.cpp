// ima: run, judge and compare multi-agent conversations.

#include <atomic>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI/CLI.hpp>

#include "ima/evaluation.hpp"
#include "ima/orchestrator.hpp"
#include "ima/persist.hpp"
#include "ima/scenario.hpp"
#include "ima/text.hpp"

namespace fs = std::filesystem;

namespace {

struct RunArgs {
    std::string scenario;
    std::optional<std::int64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::int64_t> max_turns;
    std::optional<std::int64_t> max_context_tokens;
    std::optional<std::string> backend;
    int repeat = 1;
    int jobs = 1;
    std::optional<std::string> out;
};

ima::ScenarioConfig apply_overrides(ima::ScenarioConfig config, const RunArgs& args)
{
    if (args.seed) {
        config.seed = *args.seed;
    }
    if (args.mode) {
        config.mode = ima::mode_from_string(*args.mode);
    }
    if (args.max_turns) {
        config.max_turns = *args.max_turns;
    }
    if (args.max_context_tokens) {
        config.max_context_tokens = *args.max_context_tokens;
    }
    if (args.backend) {
        if (!config.backends.contains(*args.backend)) {
            throw ima::PreconditionError("--backend: scenario defines no backend named '" + *args.backend + "'");
        }
        for (auto& agent : config.agents) {
            agent.backend = *args.backend;
            agent.update_backend.reset();
        }
    }
    ima::validate_scenario(config);
    return config;
}

int cmd_run(const RunArgs& args)
{
    const auto base = apply_overrides(ima::load_scenario(args.scenario), args);
    const fs::path out = args.out ? fs::path(*args.out) : fs::path(base.output_dir);

    std::vector<ima::ScenarioConfig> runs;
    for (int i = 0; i < args.repeat; ++i) {
        auto config = base;
        config.seed = base.seed + i;
        runs.push_back(std::move(config));
    }

    std::mutex print_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    const auto worker = [&] {
        for (auto i = next++; i < runs.size(); i = next++) {
            try {
                ima::RunOptions options;
                options.out = out;
                const auto result = ima::run_conversation(runs[i], options);
                std::lock_guard lock(print_mutex);
                std::cout << result.report.run_id << ": " << ima::to_string(result.report.outcome) << ", "
                          << result.report.total_turns << " turns, " << result.report.total_tokens << " tokens -> "
                          << result.run_dir->string() << "\n";
                if (!result.report.error.empty()) {
                    std::cout << "  error: " << result.report.error << "\n";
                }
                if (result.report.outcome == ima::RunOutcome::aborted) {
                    ++failures;
                }
            } catch (const std::exception& e) {
                std::lock_guard lock(print_mutex);
                std::cerr << "run " << i << " failed: " << e.what() << "\n";
                ++failures;
            }
        }
    };
    const int jobs = std::max(1, std::min(args.jobs, args.repeat));
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }
    return failures == 0 ? 0 : 2;
}

int cmd_validate(const std::string& path)
{
    const auto config = ima::load_scenario(path);
    std::cout << path << ": ok\n"
              << "  name: " << config.name << "\n"
              << "  mode: " << ima::to_string(config.mode) << "\n"
              << "  agents: " << config.agents.size() << "\n"
              << "  worker_order:";
    for (const auto& w : config.worker_order) {
        std::cout << " " << w;
    }
    std::cout << "\n  max_turns: " << config.max_turns << "\n  max_context_tokens: " << config.max_context_tokens
              << "\n";
    return 0;
}

void write_summary(const ima::SummaryTable& table, const std::optional<std::string>& out)
{
    const auto text = ima::format_summary_table(table);
    std::cout << text;
    if (out) {
        ima::write_text_file(fs::path(*out) / "summary.json", ima::dump_json(ima::to_json(table), 2) + "\n");
        ima::write_text_file(fs::path(*out) / "summary.txt", text);
    }
}

int cmd_evaluate(const std::vector<std::string>& inputs, const std::optional<std::string>& scenario_path,
                 const std::optional<std::string>& judge_name, const std::optional<std::string>& out)
{
    ima::BackendHandle judge;
    if (scenario_path) {
        const auto scenario = ima::load_scenario(*scenario_path);
        const auto name = judge_name ? judge_name : scenario.judge_backend;
        if (name) {
            const auto it = scenario.backends.find(*name);
            if (it == scenario.backends.end()) {
                throw ima::PreconditionError("no backend named '" + *name + "' in " + *scenario_path);
            }
            judge = ima::make_backend(it->second);
        }
    }

    std::vector<ima::RunReport> reports;
    for (const auto& input : inputs) {
        for (const auto& dir : ima::find_run_dirs(input)) {
            auto report = ima::read_report(dir);
            if (!report.scorecard && judge && !ima::trim(report.final_document).empty()) {
                try {
                    report.scorecard = ima::judge_design(*judge, report.final_document);
                    ima::write_text_file(dir / "scorecard.json",
                                         ima::dump_json(ima::to_json(*report.scorecard), 2) + "\n");
                } catch (const ima::ParseError& e) {
                    std::cerr << dir.string() << ": judge response rejected: " << e.what() << "\n";
                } catch (const ima::BackendError& e) {
                    std::cerr << dir.string() << ": judge backend failed: " << e.what() << "\n";
                }
            }
            reports.push_back(std::move(report));
        }
    }
    if (reports.empty()) {
        std::cerr << "no run directories found\n";
        return 1;
    }
    write_summary(ima::aggregate_runs(reports), out);
    return 0;
}

std::vector<ima::RunReport> load_group(const std::string& root)
{
    std::vector<ima::RunReport> reports;
    for (const auto& dir : ima::find_run_dirs(root)) {
        reports.push_back(ima::read_report(dir));
    }
    if (reports.empty()) {
        throw ima::PreconditionError("no run directories found under " + root);
    }
    return reports;
}

int cmd_compare(const std::string& group_a, const std::string& group_b, const std::optional<std::string>& out)
{
    const auto a = load_group(group_a);
    const auto b = load_group(group_b);
    write_summary(ima::compare_groups(fs::path(group_a).filename().string(), a,
                                      fs::path(group_b).filename().string(), b),
                  out);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-agent conversations with intrinsic structured memory"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run a scenario and persist its artifacts");
    run->add_option("scenario", run_args.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", run_args.seed, "Override the scenario seed");
    run->add_option("--mode", run_args.mode, "intrinsic or baseline")
        ->check(CLI::IsMember({"intrinsic", "baseline"}));
    run->add_option("--max-turns", run_args.max_turns, "Turn limit")->check(CLI::PositiveNumber);
    run->add_option("--max-context-tokens", run_args.max_context_tokens, "Context budget per turn")
        ->check(CLI::PositiveNumber);
    run->add_option("--backend", run_args.backend, "Bind every agent to this scenario backend");
    run->add_option("--repeat", run_args.repeat, "Independent runs, seeds seed..seed+N-1")
        ->check(CLI::PositiveNumber);
    run->add_option("--jobs", run_args.jobs, "Runs executed concurrently")->check(CLI::PositiveNumber);
    run->add_option("--out", run_args.out, "Output directory (default: scenario output_dir)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Load and check a scenario");
    validate->add_option("scenario", validate_path, "Scenario JSON file")->required();

    std::vector<std::string> eval_inputs;
    std::optional<std::string> eval_scenario;
    std::optional<std::string> eval_judge;
    std::optional<std::string> eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Judge final documents and summarize runs");
    evaluate->add_option("runs", eval_inputs, "Run directories or directories of runs")->required();
    evaluate->add_option("--scenario", eval_scenario, "Scenario providing the judge backend");
    evaluate->add_option("--backend", eval_judge, "Judge backend name (default: scenario judge_backend)");
    evaluate->add_option("--out", eval_out, "Write summary.json and summary.txt here");

    std::string group_a;
    std::string group_b;
    std::optional<std::string> compare_out;
    auto* compare = app.add_subcommand("compare", "Compare two groups of runs with rank-sum tests");
    compare->add_option("group-a", group_a, "Directory of runs (reference)")->required();
    compare->add_option("group-b", group_b, "Directory of runs")->required();
    compare->add_option("--out", compare_out, "Write summary.json and summary.txt here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            return cmd_run(run_args);
        }
        if (*validate) {
            return cmd_validate(validate_path);
        }
        if (*evaluate) {
            return cmd_evaluate(eval_inputs, eval_scenario, eval_judge, eval_out);
        }
        if (*compare) {
            return cmd_compare(group_a, group_b, compare_out);
        }
    } catch (const ima::LoadError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
