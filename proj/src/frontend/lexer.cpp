#include "ttvga/frontend/lexer.hpp"

#include <array>
#include <cctype>

namespace ttvga {

namespace {

constexpr std::array kKeywords = {
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "integer", "real", "parameter",
    "localparam", "assign", "always", "initial", "begin", "end", "if", "else", "case", "casez", "casex",
    "endcase", "default", "for", "while", "repeat", "forever", "fork", "join", "posedge", "negedge",
    "or", "signed", "generate", "endgenerate", "genvar", "function", "endfunction", "task", "endtask",
    "logic", "always_ff", "always_comb", "always_latch",
};

// Longest first so that greedy matching works.
constexpr std::array kPuncts = {
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^", "^~",
    "+:", "-:", "**",
    "+", "-", "*", "/", "%", "<", ">", "!", "~", "&", "|", "^", "?", ":", ";", ",", ".", "(", ")", "[",
    "]", "{", "}", "=", "#", "@",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    LexResult run() {
        LexResult out;
        while (true) {
            skip_space_and_comments(out);
            if (pos_ >= text_.size())
                break;
            char c = text_[pos_];
            Span start = here();
            if (c == '`') {
                directive(out);
                continue;
            }
            if (ident_start(c)) {
                size_t b = pos_;
                while (pos_ < text_.size() && ident_char(text_[pos_]))
                    advance();
                push(out, TokenKind::Ident, b, start);
                continue;
            }
            if (c == '\\') {
                error(out, start, "Escaped identifiers (names starting with a backslash) are not supported. "
                                  "Fix: use a plain name made of letters, digits and underscores.");
                while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
                    advance();
                continue;
            }
            if (c == '$') {
                size_t b = pos_;
                advance();
                while (pos_ < text_.size() && ident_char(text_[pos_]))
                    advance();
                push(out, TokenKind::SysIdent, b, start);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
                number(out);
                continue;
            }
            if (c == '"') {
                size_t b = pos_;
                advance();
                while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
                    if (text_[pos_] == '\\')
                        advance();
                    advance();
                }
                if (pos_ >= text_.size() || text_[pos_] != '"') {
                    error(out, start, "This text string is missing its closing quote (\"). "
                                      "Fix: end the string on the same line with a \".");
                    continue;
                }
                advance();
                push(out, TokenKind::String, b, start);
                continue;
            }
            bool matched = false;
            for (std::string_view p : kPuncts) {
                if (text_.substr(pos_, p.size()) == p) {
                    size_t b = pos_;
                    for (size_t i = 0; i < p.size(); ++i)
                        advance();
                    push(out, TokenKind::Punct, b, start);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                std::string shown(1, c);
                error(out, start, "The character '" + shown + "' does not belong in Verilog code here. "
                                  "Fix: delete it or check for a typo.");
                advance();
            }
        }
        Token end;
        end.kind = TokenKind::End;
        end.span = here();
        out.tokens.push_back(end);
        return out;
    }

private:
    Span here() const { return Span{line_, col_, static_cast<uint32_t>(pos_), static_cast<uint32_t>(pos_)}; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void push(LexResult& out, TokenKind kind, size_t b, Span start) {
        Token t;
        t.kind = kind;
        t.text = std::string(text_.substr(b, pos_ - b));
        t.span = start;
        t.span.end = static_cast<uint32_t>(pos_);
        out.tokens.push_back(std::move(t));
    }

    void error(LexResult& out, Span at, std::string message) {
        at.end = std::max<uint32_t>(at.begin + 1, static_cast<uint32_t>(std::min(pos_ + 1, text_.size())));
        if (at.end > text_.size())
            at.end = static_cast<uint32_t>(text_.size());
        out.errors.push_back(Diagnostic{"LEXICAL_ERROR", Severity::Error, std::move(message), at});
    }

    void skip_space_and_comments(LexResult& out) {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (text_.substr(pos_, 2) == "//") {
                while (pos_ < text_.size() && text_[pos_] != '\n')
                    advance();
            } else if (text_.substr(pos_, 2) == "/*") {
                Span start = here();
                advance();
                advance();
                while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/")
                    advance();
                if (pos_ >= text_.size()) {
                    error(out, start, "This comment starts with /* but never ends. Fix: close it with */.");
                    return;
                }
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    void directive(LexResult& out) {
        Span start = here();
        size_t b = pos_;
        advance();
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            advance();
        std::string_view name = text_.substr(b + 1, pos_ - b - 1);
        if (name == "default_nettype" || name == "timescale" || name == "resetall") {
            while (pos_ < text_.size() && text_[pos_] != '\n')
                advance();
            return;
        }
        out.errors.push_back(Diagnostic{"UNSUPPORTED_CONSTRUCT", Severity::Error,
                                        "The compiler directive `" + std::string(name) +
                                            " is not supported. Fix: write the value out directly, "
                                            "for example with a localparam.",
                                        Span{start.line, start.col, start.begin, static_cast<uint32_t>(pos_)}});
        while (pos_ < text_.size() && text_[pos_] != '\n')
            advance();
    }

    void number(LexResult& out) {
        Span start = here();
        size_t b = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            advance();
        // Optional base part, possibly separated from the size by spaces.
        size_t save_pos = pos_;
        uint32_t save_line = line_, save_col = col_;
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
            advance();
        if (pos_ < text_.size() && text_[pos_] == '\'') {
            advance();
            if (pos_ < text_.size() && (text_[pos_] == 's' || text_[pos_] == 'S'))
                advance();
            if (pos_ >= text_.size() || std::string_view("bBoOdDhH").find(text_[pos_]) == std::string_view::npos) {
                error(out, start, "A number like 8'hFF needs a base letter (b, o, d or h) after the quote. "
                                  "Fix: write for example 4'b1010 or 8'd200.");
                return;
            }
            advance();
            while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
                advance();
            size_t digits = pos_;
            while (pos_ < text_.size() &&
                   (std::isxdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    std::string_view("xXzZ?").find(text_[pos_]) != std::string_view::npos))
                advance();
            if (digits == pos_) {
                error(out, start, "This number has a base but no digits. Fix: add digits, for example 8'h00.");
                return;
            }
        } else {
            pos_ = save_pos;
            line_ = save_line;
            col_ = save_col;
            if (b == pos_) {
                // A lone quote.
                error(out, start, "A stray ' character was found. Fix: remove it or write a full number like 1'b0.");
                advance();
                return;
            }
        }
        push(out, TokenKind::Number, b, start);
    }

    std::string_view text_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

} // namespace

bool is_keyword(std::string_view word) {
    for (std::string_view k : kKeywords)
        if (k == word)
            return true;
    return false;
}

LexResult lex(std::string_view text) { return Lexer(text).run(); }

} // namespace ttvga
