#include "ttvga/agent/validate.hpp"

#include "ttvga/elab/elaborate.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/frontend/sloc.hpp"
#include "ttvga/sim/simulator.hpp"
#include "ttvga/util/digest.hpp"

namespace ttvga {

std::string_view to_string(Depth depth) { return depth == Depth::Full ? "full" : "quick"; }

Depth depth_from_string(std::string_view text) {
    if (text == "full")
        return Depth::Full;
    if (text == "quick")
        return Depth::Quick;
    throw std::invalid_argument("depth must be 'quick' or 'full'");
}

std::string_view to_string(StageStatus status) {
    switch (status) {
    case StageStatus::Passed: return "passed";
    case StageStatus::Failed: return "failed";
    case StageStatus::Skipped: return "skipped";
    }
    return "skipped";
}

std::vector<Diagnostic> ValidationReport::errors() const {
    std::vector<Diagnostic> out;
    auto take = [&](const std::vector<Diagnostic>& list) {
        for (const auto& d : list)
            if (d.severity == Severity::Error)
                out.push_back(d);
    };
    take(parse_errors);
    take(compliance.findings);
    take(lint.findings);
    if (sim_error)
        out.push_back(*sim_error);
    if (area_stage == StageStatus::Failed && area)
        out.push_back({"AREA_EXCEEDED", Severity::Error,
                       "The design needs about " + std::to_string(static_cast<long long>(area->cell_units)) +
                           " area units, more than the largest supported size (" + area->tiles.str() +
                           " tiles). Simplify the logic, for example by using fewer multiplications or comparisons.",
                       {}});
    return out;
}

std::string ValidationReport::error_text() const {
    std::string text;
    for (const auto& d : errors()) {
        if (!text.empty())
            text += "\n";
        text += format_diagnostic(d);
    }
    return text;
}

nlohmann::json diagnostic_to_json(const Diagnostic& d) {
    return {{"code", d.code},
            {"severity", std::string(to_string(d.severity))},
            {"message", d.message},
            {"line", d.span.line},
            {"col", d.span.col}};
}

nlohmann::json ValidationReport::to_json() const {
    using nlohmann::json;
    auto list = [](const std::vector<Diagnostic>& ds) {
        json a = json::array();
        for (const auto& d : ds)
            a.push_back(diagnostic_to_json(d));
        return a;
    };
    json j;
    j["depth"] = std::string(to_string(depth));
    j["sloc"] = sloc;
    j["parse"] = {{"status", std::string(to_string(parse_stage))}, {"errors", list(parse_errors)}};
    j["interface"] = {{"status", std::string(to_string(interface_stage))},
                      {"findings", list(compliance.findings)},
                      {"detected_top", compliance.detected_top ? json(*compliance.detected_top) : json(nullptr)}};
    j["lint"] = {{"status", std::string(to_string(lint_stage))},
                 {"synthesizable", lint_stage == StageStatus::Skipped ? json(nullptr) : json(lint.synthesizable)},
                 {"findings", list(lint.findings)}};
    j["simulation"] = {{"status", std::string(to_string(sim_stage))},
                       {"error", sim_error ? diagnostic_to_json(*sim_error) : json(nullptr)},
                       {"warnings", sim_warnings},
                       {"frame_digests", frame_digests}};
    if (area)
        j["area"] = {{"status", std::string(to_string(area_stage))},
                     {"cell_units", area->cell_units},
                     {"tiles", area->tiles.str()},
                     {"utilization", area->utilization},
                     {"fits", area->fits}};
    else
        j["area"] = {{"status", std::string(to_string(area_stage))}};
    j["parse_ok"] = parse_ok();
    j["interface_ok"] = interface_ok();
    j["sim_ok"] = sim_ok();
    j["functional_ok"] = functional_ok();
    j["tapeout_ok"] = tapeout_ok();
    return j;
}

std::string ValidationReport::digest() const { return sha256_hex(to_json().dump()); }

ValidationReport validate(const DesignSource& src, Depth depth, const ValidateOptions& options,
                          std::vector<Frame>* frames) {
    ValidationReport r;
    r.depth = depth;
    try {
        r.sloc = count_sloc(src.text);
    } catch (const SlocError&) {
        r.sloc = 0;
    }

    ParseResult parsed = parse(src);
    r.parse_errors = parsed.errors;
    if (!parsed.ok()) {
        r.parse_stage = StageStatus::Failed;
        return r;
    }
    r.parse_stage = StageStatus::Passed;

    r.compliance = check_interface(*parsed.ast);
    r.interface_stage = r.compliance.interface_ok ? StageStatus::Passed : StageStatus::Failed;
    if (!r.compliance.interface_ok)
        return r;

    r.lint = lint_synthesizable(*parsed.ast);
    r.lint_stage = r.lint.synthesizable ? StageStatus::Passed : StageStatus::Failed;
    if (!r.lint.synthesizable)
        return r;

    std::optional<ElaboratedDesign> design;
    try {
        design = elaborate(*parsed.ast, *r.compliance.detected_top, standard_library());
        Simulator sim(*design);
        sim.reset(options.reset_cycles);
        CaptureOptions capture;
        capture.frames = options.frames ? options.frames : (depth == Depth::Full ? 3 : 1);
        capture.schedule = options.pokes;
        CaptureResult result = capture_frames(sim, capture);
        for (const auto& f : result.frames)
            r.frame_digests.push_back(f.digest());
        r.sim_warnings = sim.warnings();
        if (frames)
            *frames = std::move(result.frames);
        r.sim_stage = StageStatus::Passed;
    } catch (const ElaborationError& e) {
        r.sim_error = Diagnostic{e.code(), Severity::Error, e.what(), e.span()};
    } catch (const SimError& e) {
        r.sim_error = Diagnostic{e.code(), Severity::Error, e.what(), {}};
    } catch (const TimingViolation& e) {
        r.sim_error = Diagnostic{"TIMING_VIOLATION", Severity::Error, e.what(), {}};
    }
    if (!r.sim_ok()) {
        r.sim_stage = StageStatus::Failed;
        return r;
    }

    r.area = estimate_area(*design, options.capacity_per_1x1);
    r.area_stage = r.area->fits ? StageStatus::Passed : StageStatus::Failed;
    return r;
}

} // namespace ttvga
