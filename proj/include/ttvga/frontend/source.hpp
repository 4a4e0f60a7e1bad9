#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ttvga {

/// Location of a construct in the source text. Lines and columns are 1-based,
/// byte offsets are 0-based and half-open.
struct Span {
    uint32_t line = 0;
    uint32_t col = 0;
    uint32_t begin = 0;
    uint32_t end = 0;

    bool valid() const { return line != 0; }
    bool contains(const Span& other) const { return begin <= other.begin && other.end <= end; }
};

enum class Origin { User, Agent, Fixture };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view text);

struct DesignSource {
    std::string text;
    Origin origin = Origin::User;
    uint32_t revision = 0;
};

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity severity);

/// A located message produced by any front-end stage.
struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    std::string message;
    Span span;
};

/// Renders "CODE (line L): message" -- the form quoted to learners and to the
/// agent's repair loop.
std::string format_diagnostic(const Diagnostic& diag);

} // namespace ttvga
