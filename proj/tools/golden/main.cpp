// Renders corpus designs with the reference interpreter and records the frame
// digests in each design's meta.json. The compiled simulator is not involved.
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttvga/frontend/parser.hpp"
#include "ttvga/reference/oracle_render.hpp"
#include "ttvga/tt/compliance.hpp"
#include "ttvga/util/digest.hpp"
#include "ttvga/util/files.hpp"
#include "ttvga/vga/timing.hpp"

namespace fs = std::filesystem;
using namespace ttvga;

int main(int argc, char** argv) {
    CLI::App app{"Record golden frame digests from the reference renderer"};
    std::string dir;
    uint32_t frames = 3;
    bool write = false;
    app.add_option("corpus", dir, "Corpus directory")->required();
    app.add_option("--frames", frames, "Frames per design");
    app.add_flag("--write", write, "Update meta.json files (otherwise only print)");
    CLI11_PARSE(app, argc, argv);

    std::vector<fs::path> designs;
    for (const auto& e : fs::directory_iterator(dir))
        if (fs::exists(e.path() / "project.v"))
            designs.push_back(e.path());
    std::sort(designs.begin(), designs.end());

    int rc = 0;
    for (const auto& d : designs) {
        ParseResult parsed = parse(read_file(d / "project.v"));
        if (!parsed.ok()) {
            std::cerr << d.filename().string() << ": " << format_diagnostic(parsed.errors.front()) << "\n";
            rc = 1;
            continue;
        }
        ComplianceReport c = check_interface(*parsed.ast);
        if (!c.detected_top) {
            std::cerr << d.filename().string() << ": no top module\n";
            rc = 1;
            continue;
        }
        reference::Interpreter interp(*parsed.ast, *c.detected_top, standard_library());
        interp.reset(2);
        std::vector<std::string> digests;
        for (const auto& rgb : reference::oracle_render(interp, frames))
            digests.push_back(sha256_hex(rgb));
        std::cout << d.filename().string();
        for (const auto& h : digests)
            std::cout << " " << h.substr(0, 16);
        std::cout << "\n";
        if (write) {
            fs::path meta_path = d / "meta.json";
            nlohmann::ordered_json meta =
                fs::exists(meta_path) ? nlohmann::ordered_json::parse(read_file(meta_path)) : nlohmann::ordered_json{};
            meta["expected_frame_digests"] = digests;
            write_file_atomic(meta_path, meta.dump(2) + "\n");
        }
    }
    return rc;
}
