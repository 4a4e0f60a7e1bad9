#include "ttvga/frontend/source.hpp"

#include <stdexcept>

namespace ttvga {

std::string_view to_string(Origin origin) {
    switch (origin) {
    case Origin::User: return "user";
    case Origin::Agent: return "agent";
    case Origin::Fixture: return "fixture";
    }
    return "user";
}

Origin origin_from_string(std::string_view text) {
    if (text == "agent")
        return Origin::Agent;
    if (text == "fixture")
        return Origin::Fixture;
    if (text == "user")
        return Origin::User;
    throw std::invalid_argument("unknown design origin: " + std::string(text));
}

std::string_view to_string(Severity severity) {
    switch (severity) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
    }
    return "error";
}

std::string format_diagnostic(const Diagnostic& diag) {
    std::string out = diag.code;
    if (diag.span.valid())
        out += " (line " + std::to_string(diag.span.line) + ")";
    out += ": ";
    out += diag.message;
    return out;
}

} // namespace ttvga
