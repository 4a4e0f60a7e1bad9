#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttvga/frontend/lint.hpp"
#include "ttvga/frontend/source.hpp"
#include "ttvga/tt/compliance.hpp"
#include "ttvga/vga/capture.hpp"

namespace ttvga {

enum class Depth { Quick, Full };
std::string_view to_string(Depth depth);
Depth depth_from_string(std::string_view text);  // "quick" | "full"

enum class StageStatus { Passed, Failed, Skipped };
std::string_view to_string(StageStatus status);

struct ValidationReport {
    Depth depth = Depth::Quick;
    size_t sloc = 0;

    StageStatus parse_stage = StageStatus::Skipped;
    std::vector<Diagnostic> parse_errors;

    StageStatus interface_stage = StageStatus::Skipped;
    ComplianceReport compliance;

    StageStatus lint_stage = StageStatus::Skipped;
    LintReport lint;

    StageStatus sim_stage = StageStatus::Skipped;
    std::optional<Diagnostic> sim_error;
    std::vector<std::string> sim_warnings;
    std::vector<std::string> frame_digests;

    StageStatus area_stage = StageStatus::Skipped;
    std::optional<AreaEstimate> area;

    bool parse_ok() const { return parse_stage == StageStatus::Passed; }
    bool interface_ok() const { return interface_stage == StageStatus::Passed; }
    bool sim_ok() const { return sim_stage == StageStatus::Passed; }
    bool area_fits() const { return area && area->fits; }
    bool functional_ok() const { return parse_ok() && sim_ok(); }
    bool tapeout_ok() const {
        return interface_ok() && lint_stage != StageStatus::Skipped && lint.synthesizable && area_fits();
    }

    /// Every Error-severity finding, in stage order.
    std::vector<Diagnostic> errors() const;
    /// The errors as "CODE (line L): message", one per line. This is the exact
    /// text the agent sees in a validator turn.
    std::string error_text() const;

    nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON form.
    std::string digest() const;
};

struct ValidateOptions {
    std::vector<ScheduledPoke> pokes;
    double capacity_per_1x1 = kDefaultCapacityPer1x1;
    uint32_t reset_cycles = 2;
    uint32_t frames = 0;  // frames to capture; 0 means 1 for Quick and 3 for Full
};

/// parse -> interface -> lint -> simulate and capture (1 frame Quick, 3 Full)
/// -> area. Stops at the first failing stage; later stages are marked skipped.
/// When `frames` is given it receives the captured frames.
ValidationReport validate(const DesignSource& src, Depth depth, const ValidateOptions& options = {},
                          std::vector<Frame>* frames = nullptr);

nlohmann::json diagnostic_to_json(const Diagnostic& d);

} // namespace ttvga
