#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ttvga::testing {

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        lines.push_back(line);
    return lines;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

/// Inserts one to five empty or whitespace-only lines at random positions.
inline std::string with_blank_lines(const std::string& text, std::mt19937_64& rng) {
    auto lines = split_lines(text);
    size_t inserts = 1 + rng() % 5;
    for (size_t k = 0; k < inserts; ++k) {
        size_t at = rng() % (lines.size() + 1);
        lines.insert(lines.begin() + static_cast<long>(at), (rng() % 2) ? "" : "  \t ");
    }
    return join_lines(lines);
}

/// Comments out every line, mixing line and block comment styles.
inline std::string commented_out(const std::string& text, std::mt19937_64& rng) {
    std::string out;
    bool in_block = false;
    for (auto line : split_lines(text)) {
        for (size_t p; (p = line.find("*/")) != std::string::npos;)
            line.replace(p, 2, "* /");
        if (rng() % 4 == 0) {
            out += in_block ? line + " */\n" : "/* " + line + "\n";
            in_block = !in_block;
        } else {
            out += (in_block ? "" : "// ") + line + "\n";
        }
    }
    if (in_block)
        out += "*/\n";
    return out;
}

} // namespace ttvga::testing
