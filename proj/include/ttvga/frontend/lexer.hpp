#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ttvga/frontend/source.hpp"

namespace ttvga {

enum class TokenKind {
    Ident,
    SysIdent,   // $display
    Number,
    String,
    Punct,
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    Span span;

    bool is(std::string_view punct_or_word) const {
        return (kind == TokenKind::Punct || kind == TokenKind::Ident) && text == punct_or_word;
    }
};

struct LexResult {
    std::vector<Token> tokens;      // always terminated by an End token
    std::vector<Diagnostic> errors;
};

/// Splits Verilog text into tokens. Comments are dropped, and the harmless
/// compiler directives `default_nettype and `timescale are skipped; any other
/// directive is reported as unsupported.
LexResult lex(std::string_view text);

bool is_keyword(std::string_view word);

} // namespace ttvga
