#include "ttvga/reference/oracle_render.hpp"

#include <algorithm>

namespace ttvga::reference {

namespace {

constexpr uint64_t kLine = 800;
constexpr uint64_t kFrame = 800 * 525;

// Output bit layout: {hsync, B0, G0, R0, vsync, B1, G1, R1}.
char channel(uint64_t out, int hi_bit, int lo_bit) {
    uint64_t level = 2 * ((out >> hi_bit) & 1) + ((out >> lo_bit) & 1);
    return static_cast<char>(level * 255 / 3);
}

} // namespace

std::vector<std::string> oracle_render(Interpreter& interp, uint32_t frames, std::vector<OraclePoke> pokes) {
    std::stable_sort(pokes.begin(), pokes.end(), [](const auto& a, const auto& b) { return a.cycle < b.cycle; });
    std::vector<std::string> out(frames, std::string(640 * 480 * 3, '\0'));
    size_t next = 0;
    const uint64_t end = (frames + 1) * kFrame;
    for (uint64_t c = 0; c < end; ++c) {
        while (next < pokes.size() && pokes[next].cycle <= c) {
            interp.poke(pokes[next].input, pokes[next].value);
            ++next;
        }
        if (c >= kFrame) {
            uint64_t k = c / kFrame - 1;
            uint64_t o = c % kFrame;
            uint64_t y = o / kLine, x = o % kLine;
            if (x < 640 && y < 480) {
                uint64_t v = interp.peek("uo_out");
                std::string& f = out[k];
                size_t i = (y * 640 + x) * 3;
                f[i] = channel(v, 0, 4);
                f[i + 1] = channel(v, 1, 5);
                f[i + 2] = channel(v, 2, 6);
            }
        }
        interp.step(1);
    }
    return out;
}

} // namespace ttvga::reference
