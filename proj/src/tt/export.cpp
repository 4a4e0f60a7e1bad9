#include "ttvga/tt/export.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

#include "ttvga/util/digest.hpp"
#include "ttvga/util/files.hpp"

namespace ttvga {

namespace {

std::string yaml_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': break;
        default: out += c;
        }
    }
    return out + "\"";
}

} // namespace

std::string render_info_yaml(const ExportInput& in) {
    std::string y = "project:\n";
    y += "  top: " + yaml_quote(in.top) + "\n";
    y += "  tiles: " + yaml_quote(in.tiles.str()) + "\n";
    y += "  title: " + yaml_quote(in.title) + "\n";
    y += "  author: " + yaml_quote(in.author) + "\n";
    y += "  description: " + yaml_quote(in.description) + "\n";
    if (!in.extra_yaml.empty()) {
        y += in.extra_yaml;
        if (y.back() != '\n')
            y += '\n';
    }
    return y;
}

std::string render_info_md(const ExportInput& in) {
    std::string md = "## " + (in.title.empty() ? in.top : in.title) + "\n\n";
    md += "## How it works\n\n" + (in.description.empty() ? std::string("(no description yet)") : in.description) +
          "\n\n";
    md += "## How to test\n\nConnect a VGA monitor through the TinyVGA Pmod on the dedicated outputs. Top module: `" +
          in.top + "`, tiles: " + in.tiles.str() + ".\n";
    return md;
}

std::string make_tar(const std::map<std::string, std::string>& files) {
    std::string out;
    for (const auto& [name, data] : files) {
        if (name.size() >= 100)
            throw std::invalid_argument("tar entry name too long: " + name);
        char h[512];
        std::memset(h, 0, sizeof h);
        std::memcpy(h, name.data(), name.size());
        std::snprintf(h + 100, 8, "%07o", 0644);
        std::snprintf(h + 108, 8, "%07o", 0);
        std::snprintf(h + 116, 8, "%07o", 0);
        std::snprintf(h + 124, 12, "%011llo", static_cast<unsigned long long>(data.size()));
        std::snprintf(h + 136, 12, "%011o", 0);
        std::memset(h + 148, ' ', 8);
        h[156] = '0';
        std::memcpy(h + 257, "ustar", 6);
        std::memcpy(h + 263, "00", 2);
        unsigned sum = 0;
        for (unsigned char c : h)
            sum += c;
        std::snprintf(h + 148, 8, "%06o", sum);
        h[155] = ' ';
        out.append(h, sizeof h);
        out += data;
        out.append((512 - data.size() % 512) % 512, '\0');
    }
    out.append(1024, '\0');
    return out;
}

std::string ExportManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tiles"] = tiles;
    j["files"] = nlohmann::ordered_json::object();
    for (const auto& [path, digest] : files)
        j["files"][path] = digest;
    j["notes"] = notes;
    return j.dump(2) + "\n";
}

ExportManifest write_export_bundle(const ExportInput& in, const std::filesystem::path& dest) {
    std::map<std::string, std::string> files = {
        {"src/project.v", in.source},
        {"info.yaml", render_info_yaml(in)},
        {"docs/info.md", render_info_md(in)},
        {"test/frame0.ppm", in.frame0_ppm},
    };
    ExportManifest m;
    m.tiles = in.tiles.str();
    m.notes = in.notes;
    for (const auto& [path, data] : files) {
        write_file_atomic(dest / path, data);
        m.files[path] = sha256_hex(data);
    }
    std::string manifest = m.to_json();
    write_file_atomic(dest / "manifest.json", manifest);
    files["manifest.json"] = manifest;
    write_file_atomic(dest / "export.tar", make_tar(files));
    return m;
}

} // namespace ttvga
