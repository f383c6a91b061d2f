#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ima/persist.hpp"
#include "ima/scenario.hpp"

using namespace ima;
namespace fs = std::filesystem;

namespace {

const fs::path kBundled = fs::path(IMA_DATA_DIR) / "scenarios" / "data_pipeline" / "scenario.json";

fs::path fresh_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("ima_persist_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Sha256, KnownVectors)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SnapshotPath, ZeroPadded)
{
    EXPECT_EQ(snapshot_path("DEA", 7), "memory/DEA/memory_0007.json");
    EXPECT_EQ(snapshot_path("CDA", 12345), "memory/CDA/memory_12345.json");
}

TEST(PersistRun, ThreeTurnRunManifest)
{
    auto scenario = load_scenario(kBundled);
    scenario.max_turns = 3;
    const auto dir = fresh_dir("three");
    RunOptions options;
    options.run_id = "three";
    options.out = dir;
    const auto result = run_conversation(scenario, options);
    EXPECT_EQ(result.report.outcome, RunOutcome::turn_limit);
    const auto manifest = read_manifest(dir / "three");
    EXPECT_TRUE(manifest.complete);
    ASSERT_EQ(manifest.files.size(), 5u);
    int transcripts = 0;
    int snapshots = 0;
    int reports = 0;
    for (const auto& f : manifest.files) {
        transcripts += f.path == "transcript.jsonl";
        reports += f.path == "report.json";
        snapshots += f.path.rfind("memory/", 0) == 0;
    }
    EXPECT_EQ(transcripts, 1);
    EXPECT_EQ(snapshots, 3);
    EXPECT_EQ(reports, 1);
    EXPECT_TRUE(verify_manifest(dir / "three").empty());
    fs::remove_all(dir);
}

TEST(PersistRun, RerunIsByteIdentical)
{
    const auto scenario = load_scenario(kBundled);
    const auto a = fresh_dir("rerun_a");
    const auto b = fresh_dir("rerun_b");
    run_conversation(scenario, {"same", a});
    run_conversation(scenario, {"same", b});
    const auto ma = read_manifest(a / "same");
    const auto mb = read_manifest(b / "same");
    EXPECT_EQ(ma.files, mb.files);
    EXPECT_EQ(slurp(a / "same" / "manifest.json"), slurp(b / "same" / "manifest.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(PersistRun, RerunIntoSameDirectoryReplacesSnapshots)
{
    auto scenario = load_scenario(kBundled);
    const auto dir = fresh_dir("overwrite");
    run_conversation(scenario, {"r", dir});
    scenario.max_turns = 2;
    run_conversation(scenario, {"r", dir});
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir / "r" / "memory")) {
        files += entry.is_regular_file();
    }
    EXPECT_EQ(files, 2u);
    EXPECT_TRUE(verify_manifest(dir / "r").empty());
    fs::remove_all(dir);
}

TEST(PersistRun, TamperingIsDetected)
{
    const auto dir = fresh_dir("tamper");
    run_conversation(load_scenario(kBundled), {"t", dir});
    {
        std::ofstream out(dir / "t" / "report.json", std::ios::app);
        out << " ";
    }
    fs::remove(dir / "t" / "memory" / "EA" / "memory_0010.json");
    const auto bad = verify_manifest(dir / "t");
    EXPECT_EQ(bad, (std::vector<std::string>{"memory/EA/memory_0010.json", "report.json"}));
    fs::remove_all(dir);
}

TEST(PersistRun, UnwritableDirectory)
{
    const auto dir = fresh_dir("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    RunReport report;
    report.run_id = "x";
    Transcript transcript;
    EXPECT_THROW(persist_run(report, transcript, {}, dir / "file" / "run"), PersistError);
    fs::remove_all(dir);
}

TEST(PersistRun, ReadBackMatches)
{
    const auto dir = fresh_dir("readback");
    const auto result = run_conversation(load_scenario(kBundled), {"rb", dir});
    EXPECT_EQ(read_transcript(dir / "rb"), result.transcript.turns);
    const auto report = read_report(dir / "rb");
    EXPECT_EQ(to_json(report).dump(), to_json(result.report).dump());
    EXPECT_EQ(find_run_dirs(dir), (std::vector<fs::path>{dir / "rb"}));
    EXPECT_EQ(find_run_dirs(dir / "rb"), (std::vector<fs::path>{dir / "rb"}));
    fs::remove_all(dir);
}

TEST(PersistRun, ScorecardFileIsMergedIntoReport)
{
    const auto dir = fresh_dir("scorecard");
    run_conversation(load_scenario(kBundled), {"s", dir});
    EXPECT_FALSE(read_report(dir / "s").scorecard.has_value());
    std::ofstream(dir / "s" / "scorecard.json") << R"({"scalability": {"score": 8, "justification": ""},
        "reliability": {"score": 5, "justification": ""}, "usability": {"score": 4, "justification": ""},
        "cost_effectiveness": {"score": 6, "justification": ""}, "documentation": {"score": 4, "justification": ""}})";
    const auto report = read_report(dir / "s");
    ASSERT_TRUE(report.scorecard.has_value());
    EXPECT_EQ(report.scorecard->at(Metric::reliability).score, 5);
    fs::remove_all(dir);
}
