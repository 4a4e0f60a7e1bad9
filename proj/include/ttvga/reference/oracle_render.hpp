#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttvga/reference/interpreter.hpp"

namespace ttvga::reference {

struct OraclePoke {
    uint64_t cycle = 0;   // counted from the end of reset
    std::string input;
    uint64_t value = 0;
};

/// Renders frames with the reference interpreter, placing pixels purely from
/// the 640x480 timing equations: after reset the timing controller starts at
/// line 0, so frame k's pixel (x, y) is the output sampled at cycle
/// (k + 1) * 420000 + y * 800 + x. Returns one RGB888 buffer per frame.
std::vector<std::string> oracle_render(Interpreter& interp, uint32_t frames, std::vector<OraclePoke> pokes = {});

} // namespace ttvga::reference
