#include "ttvga/corpus/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <omp.h>

#include "ttvga/util/files.hpp"

namespace ttvga {

namespace fs = std::filesystem;

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error("corpus directory not found: " + dir.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "project.v"))
            dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());

    std::vector<CorpusEntry> out;
    for (const auto& d : dirs) {
        CorpusEntry entry;
        entry.dir = d;
        entry.name = d.filename().string();
        entry.source = DesignSource{read_file(d / "project.v"), Origin::Fixture, 1};
        if (fs::exists(d / "meta.json")) {
            nlohmann::json meta;
            try {
                meta = nlohmann::json::parse(read_file(d / "meta.json"));
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error((d / "meta.json").string() + ": " + e.what());
            }
            entry.name = meta.value("name", entry.name);
            entry.category = meta.value("category", "");
            entry.expected_tiles = meta.value("expected_tiles", "");
            entry.description = meta.value("description", "");
            if (meta.contains("expected_frame_digests"))
                entry.expected_frame_digests = meta["expected_frame_digests"].get<std::vector<std::string>>();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

CorpusRow run_entry(const CorpusEntry& entry) {
    CorpusRow row;
    row.name = entry.name;
    row.category = entry.category;
    ValidationReport report = validate(entry.source, Depth::Full);
    row.sloc = report.sloc;
    row.functional_ok = report.functional_ok();
    row.tapeout_ok = report.tapeout_ok();
    row.tiles = report.area ? report.area->tiles.str() : "-";
    row.tiles_match = entry.expected_tiles.empty() || entry.expected_tiles == row.tiles;
    row.frame_digests = report.frame_digests;
    row.goldens_match = entry.expected_frame_digests.size() <= report.frame_digests.size() &&
                        std::equal(entry.expected_frame_digests.begin(), entry.expected_frame_digests.end(),
                                   report.frame_digests.begin());
    if (!report.errors().empty())
        row.problem = report.error_text().substr(0, report.error_text().find('\n'));
    else if (!row.tapeout_ok)
        row.problem = "tapeout pre-flight failed";
    else if (!row.tiles_match)
        row.problem = "tiles " + row.tiles + ", expected " + entry.expected_tiles;
    else if (!row.goldens_match)
        row.problem = "frame digests differ from the recorded goldens";
    return row;
}

std::vector<CorpusRow> run_corpus(const std::vector<CorpusEntry>& entries, int threads) {
    std::vector<CorpusRow> rows(entries.size());
    const int n = static_cast<int>(entries.size());
    if (threads == 1) {
        for (int i = 0; i < n; ++i)
            rows[i] = run_entry(entries[i]);
        return rows;
    }
    if (threads <= 0)
        threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int i = 0; i < n; ++i)
        rows[i] = run_entry(entries[i]);
    return rows;
}

nlohmann::ordered_json CorpusRow::to_json() const {
    return {{"name", name},
            {"category", category},
            {"sloc", sloc},
            {"tiles", tiles},
            {"functional_ok", functional_ok},
            {"tapeout_ok", tapeout_ok},
            {"tiles_match", tiles_match},
            {"goldens_match", goldens_match},
            {"passed", passed()},
            {"problem", problem},
            {"frame_digests", frame_digests}};
}

std::string format_corpus_table(const std::vector<CorpusRow>& rows) {
    size_t name_w = 6;
    for (const auto& r : rows)
        name_w = std::max(name_w, r.name.size());
    auto yes = [](bool b) { return b ? "yes" : "no"; };
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s  %-11s  %5s  %-5s  %-10s  %-10s\n", static_cast<int>(name_w), "design",
                  "category", "sloc", "tiles", "functional", "tapeout");
    out += buf;
    size_t passed = 0;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %-11s  %5zu  %-5s  %-10s  %-10s", static_cast<int>(name_w),
                      r.name.c_str(), r.category.c_str(), r.sloc, r.tiles.c_str(), yes(r.functional_ok),
                      yes(r.tapeout_ok));
        out += buf;
        if (!r.passed())
            out += "  FAIL: " + r.problem;
        out += "\n";
        passed += r.passed() ? 1 : 0;
    }
    out += std::to_string(passed) + "/" + std::to_string(rows.size()) + " designs passed\n";
    return out;
}

} // namespace ttvga
