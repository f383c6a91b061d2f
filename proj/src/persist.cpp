#include "ima/persist.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "ima/text.hpp"

namespace ima {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
        throw Error("sha256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0x0f];
    }
    return out;
}

nlohmann::ordered_json to_json(const Manifest& manifest)
{
    nlohmann::ordered_json j;
    j["run_id"] = manifest.run_id;
    j["complete"] = manifest.complete;
    if (!manifest.error.empty()) {
        j["error"] = manifest.error;
    }
    auto files = nlohmann::ordered_json::array();
    for (const auto& f : manifest.files) {
        files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    }
    j["files"] = std::move(files);
    return j;
}

Manifest manifest_from_json(const nlohmann::json& j)
{
    Manifest m;
    m.run_id = j.value("run_id", "");
    m.complete = j.value("complete", false);
    m.error = j.value("error", "");
    for (const auto& f : j.at("files")) {
        m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                           f.at("bytes").get<std::uint64_t>()});
    }
    return m;
}

std::string snapshot_path(const std::string& agent_id, std::int64_t turn)
{
    char name[32];
    std::snprintf(name, sizeof(name), "memory_%04lld.json", static_cast<long long>(turn));
    return "memory/" + agent_id + "/" + name;
}

std::string transcript_jsonl(const Transcript& transcript)
{
    std::string out;
    for (const auto& turn : transcript.turns) {
        out += dump_json(to_json(turn));
        out += '\n';
    }
    return out;
}

void write_text_file(const fs::path& path, std::string_view content)
{
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw PersistError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
        }
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw PersistError("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw PersistError("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw PersistError("cannot move " + tmp.string() + " into place");
    }
}

Manifest persist_run(const RunReport& report, const Transcript& transcript,
                     std::span<const MemorySnapshot> snapshots, const fs::path& run_dir)
{
    Manifest manifest;
    manifest.run_id = report.run_id;

    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) {
        throw PersistError("cannot create run directory " + run_dir.string() + ": " + ec.message());
    }
    // Snapshots of an earlier run in the same directory would otherwise linger.
    fs::remove_all(run_dir / "memory", ec);

    const auto put = [&](const std::string& relative, const std::string& content) {
        write_text_file(run_dir / relative, content);
        manifest.files.push_back({relative, sha256_hex(content), content.size()});
    };

    try {
        put("transcript.jsonl", transcript_jsonl(transcript));
        for (const auto& snapshot : snapshots) {
            put(snapshot_path(snapshot.agent_id, snapshot.turn), dump_json(to_json(snapshot), 2) + "\n");
        }
        put("report.json", dump_json(to_json(report), 2) + "\n");
        manifest.complete = true;
    } catch (const PersistError& e) {
        manifest.complete = false;
        manifest.error = e.what();
        try {
            write_text_file(run_dir / "manifest.json", dump_json(to_json(manifest), 2) + "\n");
        } catch (const PersistError&) {
        }
        throw;
    }
    write_text_file(run_dir / "manifest.json", dump_json(to_json(manifest), 2) + "\n");
    return manifest;
}

Manifest read_manifest(const fs::path& run_dir)
{
    std::ifstream in(run_dir / "manifest.json");
    if (!in) {
        throw Error("no manifest.json in " + run_dir.string());
    }
    return manifest_from_json(nlohmann::json::parse(in));
}

std::vector<std::string> verify_manifest(const fs::path& run_dir)
{
    std::vector<std::string> mismatched;
    for (const auto& f : read_manifest(run_dir).files) {
        std::ifstream in(run_dir / f.path, std::ios::binary);
        if (!in) {
            mismatched.push_back(f.path);
            continue;
        }
        const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (content.size() != f.bytes || sha256_hex(content) != f.sha256) {
            mismatched.push_back(f.path);
        }
    }
    return mismatched;
}

std::vector<TurnRecord> read_transcript(const fs::path& run_dir)
{
    std::ifstream in(run_dir / "transcript.jsonl");
    if (!in) {
        throw Error("no transcript.jsonl in " + run_dir.string());
    }
    std::vector<TurnRecord> turns;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            turns.push_back(turn_record_from_json(nlohmann::json::parse(line)));
        }
    }
    return turns;
}

RunReport read_report(const fs::path& run_dir)
{
    std::ifstream in(run_dir / "report.json");
    if (!in) {
        throw Error("no report.json in " + run_dir.string());
    }
    auto j = nlohmann::json::parse(in);
    std::ifstream card(run_dir / "scorecard.json");
    if (card) {
        j["scorecard"] = nlohmann::json::parse(card);
    }
    return run_report_from_json(j);
}

std::vector<fs::path> find_run_dirs(const fs::path& root)
{
    if (fs::exists(root / "report.json")) {
        return {root};
    }
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        if (entry.is_directory() && fs::exists(entry.path() / "report.json")) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace ima
