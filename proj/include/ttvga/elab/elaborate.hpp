#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttvga/elab/design.hpp"
#include "ttvga/frontend/ast.hpp"
#include "ttvga/frontend/library.hpp"

namespace ttvga {

namespace elab_code {
inline constexpr const char* kUnresolvedInstance = "UNRESOLVED_INSTANCE";
inline constexpr const char* kUnknownTop = "UNKNOWN_TOP";
inline constexpr const char* kNonConstLoop = "NONCONST_LOOP";
inline constexpr const char* kCombCycle = "COMB_CYCLE";
inline constexpr const char* kParamOverride = "PARAM_OVERRIDE";
inline constexpr const char* kMultipleDrivers = "MULTIPLE_DRIVERS";
inline constexpr const char* kUndeclared = "UNDECLARED";
inline constexpr const char* kWidth = "WIDTH";
inline constexpr const char* kNotConstant = "NOT_CONSTANT";
inline constexpr const char* kUnsupported = "UNSUPPORTED";
inline constexpr const char* kBadPort = "BAD_PORT";
inline constexpr const char* kBadAssign = "BAD_ASSIGN";
} // namespace elab_code

class ElaborationError : public std::runtime_error {
public:
    ElaborationError(std::string code, std::string message, Span span = {}, std::vector<std::string> nets = {})
        : std::runtime_error(message), code_(std::move(code)), span_(span), nets_(std::move(nets)) {}

    const std::string& code() const { return code_; }
    const Span& span() const { return span_; }
    /// Net names involved, e.g. the members of a combinational cycle.
    const std::vector<std::string>& nets() const { return nets_; }

private:
    std::string code_;
    Span span_;
    std::vector<std::string> nets_;
};

struct ElaborateOptions {
    uint32_t max_loop_iterations = 4096;
};

/// Resolves parameters, unrolls constant loops, flattens the hierarchy into
/// primitive cells and orders them. Throws ElaborationError.
ElaboratedDesign elaborate(const Ast& ast, std::string_view top, const BuiltinLibrary& library,
                           const ElaborateOptions& options = {});

} // namespace ttvga
