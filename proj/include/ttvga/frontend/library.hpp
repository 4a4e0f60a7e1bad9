#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ttvga/frontend/ast.hpp"

namespace ttvga {

/// Modules that designs may instantiate without defining them, such as the
/// VGA timing controller.
class BuiltinLibrary {
public:
    /// Parses `verilog` and adds every module in it. Throws std::invalid_argument
    /// when the text does not parse.
    void add(std::string_view verilog);

    const Module* find(std::string_view name) const { return ast_.find(name); }
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    std::vector<std::string> names() const;

private:
    Ast ast_;
};

} // namespace ttvga
