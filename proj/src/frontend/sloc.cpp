#include "ttvga/frontend/sloc.hpp"

#include <cctype>
#include <string>

namespace ttvga {

size_t count_sloc(std::string_view text) {
    size_t count = 0;
    bool in_block = false;
    bool in_string = false;
    bool line_has_code = false;
    size_t block_start_line = 0;
    size_t line = 1;

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') {
            if (line_has_code)
                ++count;
            line_has_code = false;
            in_string = false;
            ++line;
            continue;
        }
        if (in_block) {
            if (c == '*' && i + 1 < text.size() && text[i + 1] == '/') {
                in_block = false;
                ++i;
            }
            continue;
        }
        if (in_string) {
            line_has_code = true;
            if (c == '\\')
                ++i;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i + 1 < text.size() && text[i + 1] != '\n')
                ++i;
            continue;
        }
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
            in_block = true;
            block_start_line = line;
            ++i;
            continue;
        }
        if (c == '"') {
            in_string = true;
            line_has_code = true;
            continue;
        }
        if (!std::isspace(static_cast<unsigned char>(c)))
            line_has_code = true;
    }
    if (in_block)
        throw SlocError("unterminated block comment starting on line " + std::to_string(block_start_line));
    if (line_has_code)
        ++count;
    return count;
}

} // namespace ttvga
