#pragma once

#include <string>

#include "ttvga/frontend/ast.hpp"

namespace ttvga {

/// Prints an Ast back as Verilog. Expressions are fully parenthesized, so the
/// output re-parses to a structurally identical tree.
std::string print(const Ast& ast);
std::string print(const Module& module);
std::string print(const Expr& expr);

} // namespace ttvga
