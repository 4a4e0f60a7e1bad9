#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ttvga/elab/elaborate.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/util/files.hpp"
#include "ttvga/vga/timing.hpp"

namespace ttvga::testing {

inline std::filesystem::path source_dir() { return TTVGA_SOURCE_DIR; }
inline std::filesystem::path fixtures_dir() { return source_dir() / "tests" / "fixtures"; }
inline std::filesystem::path corpus_dir() { return TTVGA_CORPUS_DIR; }
inline std::filesystem::path data_dir() { return TTVGA_DATA_DIR; }

inline std::string fixture(const std::string& rel) { return read_file(fixtures_dir() / rel); }
inline std::string corpus_source(const std::string& name) { return read_file(corpus_dir() / name / "project.v"); }

inline Ast parse_ok(const std::string& text) {
    ParseResult r = parse(text);
    if (!r.ok())
        throw std::runtime_error("parse failed: " + format_diagnostic(r.errors.front()));
    return std::move(*r.ast);
}

inline ElaboratedDesign elaborate_text(const std::string& text, const std::string& top) {
    return elaborate(parse_ok(text), top, standard_library());
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "ttvga") {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Wraps `body` in the Tiny Tapeout top-module header.
inline std::string tt_module(const std::string& name, const std::string& body) {
    return "module " + name + " (\n"
           "    input  wire [7:0] ui_in,\n"
           "    output wire [7:0] uo_out,\n"
           "    input  wire [7:0] uio_in,\n"
           "    output wire [7:0] uio_out,\n"
           "    output wire [7:0] uio_oe,\n"
           "    input  wire       ena,\n"
           "    input  wire       clk,\n"
           "    input  wire       rst_n\n"
           ");\n" +
           body + "endmodule\n";
}

/// Routes the timing controller straight to the pins: hsync and vsync in their
/// default places, display_on on both red bits.
inline std::string timing_probe_source() {
    return tt_module("tt_um_timing_probe",
                     "  wire hsync, vsync, display_on;\n"
                     "  wire [9:0] hpos, vpos;\n"
                     "  hvsync_generator hvsync_gen (.clk(clk), .reset(~rst_n), .hsync(hsync), .vsync(vsync),\n"
                     "                               .display_on(display_on), .hpos(hpos), .vpos(vpos));\n"
                     "  assign uo_out = {hsync, 1'b0, 1'b0, display_on, vsync, 1'b0, 1'b0, display_on};\n"
                     "  assign uio_out = 8'b0;\n"
                     "  assign uio_oe = 8'b0;\n"
                     "  wire _unused_ok = &{ena, ui_in, uio_in, hpos, vpos};\n");
}

/// Pulse statistics counted directly from raw uo_out samples (bit 7 hsync,
/// bit 3 vsync, bit 0 display_on), independent of the capture code.
struct PinCounts {
    uint64_t hsync_pulses = 0;
    uint64_t hsync_min_width = UINT64_MAX;
    uint64_t hsync_max_width = 0;
    uint64_t vsync_pulses = 0;
    std::vector<uint64_t> vsync_widths;
    std::vector<uint64_t> vsync_falls;  // sample index of each falling edge
    uint64_t display_on = 0;
};

inline PinCounts count_pins(const std::vector<uint8_t>& samples) {
    PinCounts c;
    uint64_t h_run = 0, v_run = 0;
    bool h_prev = true, v_prev = true;
    for (size_t i = 0; i < samples.size(); ++i) {
        bool h = samples[i] >> 7 & 1, v = samples[i] >> 3 & 1;
        c.display_on += samples[i] & 1;
        if (!h) {
            if (h_prev)
                ++c.hsync_pulses;
            ++h_run;
        } else if (!h_prev) {
            c.hsync_min_width = std::min(c.hsync_min_width, h_run);
            c.hsync_max_width = std::max(c.hsync_max_width, h_run);
            h_run = 0;
        }
        if (!v) {
            if (v_prev) {
                ++c.vsync_pulses;
                c.vsync_falls.push_back(i);
            }
            ++v_run;
        } else if (!v_prev) {
            c.vsync_widths.push_back(v_run);
            v_run = 0;
        }
        h_prev = h;
        v_prev = v;
    }
    return c;
}

} // namespace ttvga::testing
