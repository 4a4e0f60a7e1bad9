#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ttvga/frontend/ast.hpp"
#include "ttvga/frontend/source.hpp"

namespace ttvga {

/// Error codes: LEXICAL_ERROR, SYNTAX_ERROR, UNSUPPORTED_CONSTRUCT.
struct ParseResult {
    std::optional<Ast> ast;           // set only when there are no errors
    std::vector<Diagnostic> errors;

    bool ok() const { return ast.has_value(); }
};

ParseResult parse(std::string_view text);
ParseResult parse(const DesignSource& src);

struct NumberLiteral {
    uint64_t value = 0;
    uint64_t care = ~0ull;
    uint32_t width = 32;
    bool sized = false;
};

/// Decodes a Verilog number such as 8'hF?, 'b101 or 1_000.
std::optional<NumberLiteral> parse_number_literal(std::string_view text, std::string* error = nullptr);

} // namespace ttvga
