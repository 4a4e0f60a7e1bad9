#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttvga/elab/design.hpp"
#include "ttvga/frontend/ast.hpp"
#include "ttvga/frontend/source.hpp"

namespace ttvga {

namespace tt_code {
inline constexpr const char* kBadTopName = "BAD_TOP_NAME";
inline constexpr const char* kMultipleTops = "MULTIPLE_TOPS";
inline constexpr const char* kMissingPort = "MISSING_PORT";
inline constexpr const char* kExtraPort = "EXTRA_PORT";
inline constexpr const char* kPortDirection = "PORT_DIRECTION";
inline constexpr const char* kPortWidth = "PORT_WIDTH";
} // namespace tt_code

struct ComplianceReport {
    bool interface_ok = false;
    std::vector<Diagnostic> findings;
    std::optional<std::string> detected_top;
};

/// Checks the Tiny Tapeout top-module contract: one `tt_um_*` module with
/// exactly ui_in[7:0], uio_in[7:0], ena, clk, rst_n inputs and uo_out[7:0],
/// uio_out[7:0], uio_oe[7:0] outputs.
ComplianceReport check_interface(const Ast& ast);

struct TileShape {
    uint32_t w = 1;
    uint32_t h = 1;

    std::string str() const { return std::to_string(w) + "x" + std::to_string(h); }
    uint32_t count() const { return w * h; }
    bool operator==(const TileShape&) const = default;
};

/// Ordered tile shapes a design may grow into.
const std::vector<TileShape>& tile_ladder();

struct AreaEstimate {
    double cell_units = 0;
    TileShape tiles;
    double utilization = 0;
    bool fits = true;  // false when even the largest ladder shape is too small
};

inline constexpr double kDefaultCapacityPer1x1 = 1000.0;

/// Per-net facts the area model relies on: which nets are constant and how
/// many low bits of each net can ever be nonzero. Synthesis trims the
/// constant-zero upper bits that Verilog's 32-bit unsized literals introduce,
/// so the weights use these significant widths.
struct NetFacts {
    std::vector<bool> constant;
    std::vector<uint32_t> significant;
};
NetFacts analyze_nets(const ElaboratedDesign& design);

/// Weighted primitive count of one cell (a synthesis proxy, not a synthesis result).
double cell_weight(const ElaboratedDesign& design, const Cell& cell, const NetFacts& facts);
inline constexpr double kRegisterBitWeight = 1.5;

AreaEstimate estimate_area(const ElaboratedDesign& design, double capacity_per_1x1 = kDefaultCapacityPer1x1);
AreaEstimate area_for_units(double cell_units, double capacity_per_1x1 = kDefaultCapacityPer1x1);

} // namespace ttvga
