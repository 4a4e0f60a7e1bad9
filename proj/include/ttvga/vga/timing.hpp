#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "ttvga/frontend/library.hpp"

namespace ttvga {

/// 640x480@60 horizontal and vertical timing, in pixel clocks and lines.
struct VgaTiming {
    uint32_t h_visible = 640;
    uint32_t h_front = 16;
    uint32_t h_sync = 96;
    uint32_t h_back = 48;
    uint32_t v_visible = 480;
    uint32_t v_front = 10;
    uint32_t v_sync = 2;
    uint32_t v_back = 33;

    constexpr uint32_t h_total() const { return h_visible + h_front + h_sync + h_back; }
    constexpr uint32_t v_total() const { return v_visible + v_front + v_sync + v_back; }
    constexpr uint32_t frame_cycles() const { return h_total() * v_total(); }
    constexpr uint32_t h_sync_start() const { return h_visible + h_front; }
    constexpr uint32_t v_sync_start() const { return v_visible + v_front; }
};

inline constexpr VgaTiming kVga640x480{};

/// Verilog source of the built-in `hvsync_generator` timing controller.
std::string_view hvsync_generator_source();

/// Library holding every built-in module (currently the timing controller).
const BuiltinLibrary& standard_library();

/// Bit positions of the VGA signals within the 8-bit output port.
struct PinMap {
    int hsync = 7;
    int vsync = 3;
    int r1 = 0, r0 = 4;
    int g1 = 1, g0 = 5;
    int b1 = 2, b0 = 6;

    bool valid() const;  // the eight positions are a permutation of 0..7
};

struct PinSample {
    bool hsync = false;
    bool vsync = false;
    uint8_t r = 0, g = 0, b = 0;  // 0..3

    bool operator==(const PinSample&) const = default;
};

PinSample decode_pins(uint8_t sample, const PinMap& map = {});
uint8_t encode_pins(const PinSample& s, const PinMap& map = {});

} // namespace ttvga
