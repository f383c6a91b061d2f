#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ima/orchestrator.hpp"

namespace ima {

struct ManifestEntry {
    std::string path;  // relative to the run directory, '/' separated
    std::string sha256;
    std::uint64_t bytes = 0;
    bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
    std::string run_id;
    bool complete = false;
    std::string error;  // why the write stopped when !complete
    std::vector<ManifestEntry> files;
};

nlohmann::ordered_json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j);

std::string sha256_hex(std::string_view data);

std::string snapshot_path(const std::string& agent_id, std::int64_t turn);  // "memory/<agent>/memory_0007.json"
std::string transcript_jsonl(const Transcript& transcript);

// Writes transcript.jsonl, one memory snapshot per updated turn, report.json
// and manifest.json (hashes of every other file). Files are written through
// a temporary name and renamed. On failure a manifest marked incomplete is
// left behind when possible and PersistError is thrown.
Manifest persist_run(const RunReport& report, const Transcript& transcript,
                     std::span<const MemorySnapshot> snapshots, const std::filesystem::path& run_dir);

Manifest read_manifest(const std::filesystem::path& run_dir);

// Paths listed in the manifest whose content no longer matches its hash.
std::vector<std::string> verify_manifest(const std::filesystem::path& run_dir);

std::vector<TurnRecord> read_transcript(const std::filesystem::path& run_dir);

// report.json, with the scorecard taken from scorecard.json when that exists.
RunReport read_report(const std::filesystem::path& run_dir);

// Run directories under `root`: root itself when it has a report.json,
// otherwise its immediate subdirectories that do. Sorted by name.
std::vector<std::filesystem::path> find_run_dirs(const std::filesystem::path& root);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ima
