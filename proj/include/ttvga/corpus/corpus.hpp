#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttvga/agent/validate.hpp"

namespace ttvga {

/// One design directory: project.v plus meta.json.
struct CorpusEntry {
    std::string name;
    std::string category;  // static | animation | interactive
    std::string expected_tiles;
    std::vector<std::string> expected_frame_digests;
    std::string description;
    std::filesystem::path dir;
    DesignSource source;
};

/// Loads every subdirectory of `dir` holding a project.v, sorted by directory
/// name. Throws std::runtime_error on unreadable or malformed entries.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

struct CorpusRow {
    std::string name;
    std::string category;
    size_t sloc = 0;
    std::string tiles;
    bool functional_ok = false;
    bool tapeout_ok = false;
    bool tiles_match = false;
    bool goldens_match = false;
    std::string problem;  // first reason the row fails, empty when it passes
    std::vector<std::string> frame_digests;

    bool passed() const { return functional_ok && tapeout_ok && tiles_match && goldens_match; }
    nlohmann::ordered_json to_json() const;
};

CorpusRow run_entry(const CorpusEntry& entry);

/// Full validation of every entry. With `threads` == 1 the loop runs
/// serially; 0 leaves the thread count to OpenMP. Rows keep entry order.
std::vector<CorpusRow> run_corpus(const std::vector<CorpusEntry>& entries, int threads = 0);

/// Plain-text table with one row per design and a summary line.
std::string format_corpus_table(const std::vector<CorpusRow>& rows);

} // namespace ttvga
