#pragma once

#include <cstddef>
#include <stdexcept>
#include <string_view>

namespace ttvga {

class SlocError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Effective source lines: lines holding at least one character that is
/// neither whitespace nor part of a // or /* */ comment. Throws SlocError on an
/// unterminated block comment.
size_t count_sloc(std::string_view text);

} // namespace ttvga
