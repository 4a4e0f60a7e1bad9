#pragma once

#include <string>
#include <vector>

#include "ttvga/frontend/ast.hpp"
#include "ttvga/frontend/source.hpp"

namespace ttvga {

/// Finding codes. Errors block tapeout; warnings and infos are advisory.
namespace lint_code {
inline constexpr const char* kDelayControl = "DELAY_CONTROL";
inline constexpr const char* kInitialBlock = "INITIAL_BLOCK";
inline constexpr const char* kUnboundedLoop = "UNBOUNDED_LOOP";
inline constexpr const char* kEventControl = "EVENT_CONTROL";
inline constexpr const char* kMultipleClocks = "MULTIPLE_CLOCKS";
inline constexpr const char* kForkJoin = "FORK_JOIN";
inline constexpr const char* kHierarchicalRef = "HIERARCHICAL_REF";
inline constexpr const char* kRealType = "REAL_TYPE";
inline constexpr const char* kNonConstLoopBound = "NONCONST_LOOP_BOUND";
inline constexpr const char* kLatchInferred = "LATCH_INFERRED";
inline constexpr const char* kSystemTask = "SYSTEM_TASK";
inline constexpr const char* kNoReset = "NO_RESET";
inline constexpr const char* kUnusedNet = "UNUSED_NET";
} // namespace lint_code

struct LintReport {
    std::vector<Diagnostic> findings;
    bool synthesizable = true;

    size_t count(Severity severity) const;
    size_t count(std::string_view code) const;
};

LintReport lint_synthesizable(const Ast& ast);

/// True when `cond` looks like a reset test such as `!rst_n`, `~rst_n`,
/// `rst_n == 0` or `reset`.
bool is_reset_condition(const Expr& cond);

} // namespace ttvga
