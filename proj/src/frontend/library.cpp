#include "ttvga/frontend/library.hpp"

#include <stdexcept>

#include "ttvga/frontend/parser.hpp"

namespace ttvga {

void BuiltinLibrary::add(std::string_view verilog) {
    ParseResult parsed = parse(verilog);
    if (!parsed.ok())
        throw std::invalid_argument("built-in module does not parse: " + format_diagnostic(parsed.errors.front()));
    for (auto& m : parsed.ast->modules) {
        if (contains(m.name))
            throw std::invalid_argument("built-in module defined twice: " + m.name);
        ast_.modules.push_back(std::move(m));
    }
}

std::vector<std::string> BuiltinLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& m : ast_.modules)
        out.push_back(m.name);
    return out;
}

} // namespace ttvga
