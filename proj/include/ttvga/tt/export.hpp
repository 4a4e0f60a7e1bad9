#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ttvga/tt/compliance.hpp"

namespace ttvga {

struct ExportInput {
    std::string source;        // written verbatim to src/project.v
    std::string top;
    TileShape tiles;
    std::string title;
    std::string author;
    std::string description;
    std::string frame0_ppm;    // test/frame0.ppm
    std::string extra_yaml;    // appended verbatim to info.yaml, may be empty
    std::vector<std::string> notes;  // copied into the manifest
};

struct ExportManifest {
    std::map<std::string, std::string> files;  // relative path -> SHA-256
    std::string tiles;
    std::vector<std::string> notes;

    std::string to_json() const;
};

std::string render_info_yaml(const ExportInput& in);
std::string render_info_md(const ExportInput& in);

/// Minimal POSIX ustar archive with fixed metadata (mtime 0, mode 0644), so the
/// bytes depend only on the file names and contents.
std::string make_tar(const std::map<std::string, std::string>& files);

/// Writes the project files, manifest.json and export.tar under `dest`.
ExportManifest write_export_bundle(const ExportInput& in, const std::filesystem::path& dest);

} // namespace ttvga
