#include "ttvga/vga/timing.hpp"

namespace ttvga {

std::string_view hvsync_generator_source() {
    static const char* src = R"(module hvsync_generator (
    input wire clk,
    input wire reset,
    output wire hsync,
    output wire vsync,
    output wire display_on,
    output reg [9:0] hpos,
    output reg [9:0] vpos
);
  parameter H_DISPLAY = 640;
  parameter H_FRONT = 16;
  parameter H_SYNC = 96;
  parameter H_BACK = 48;
  parameter V_DISPLAY = 480;
  parameter V_FRONT = 10;
  parameter V_SYNC = 2;
  parameter V_BACK = 33;

  localparam H_SYNC_START = H_DISPLAY + H_FRONT;
  localparam H_SYNC_END = H_SYNC_START + H_SYNC;
  localparam H_MAX = H_DISPLAY + H_FRONT + H_SYNC + H_BACK - 1;
  localparam V_SYNC_START = V_DISPLAY + V_FRONT;
  localparam V_SYNC_END = V_SYNC_START + V_SYNC;
  localparam V_MAX = V_DISPLAY + V_FRONT + V_SYNC + V_BACK - 1;

  wire hmaxxed = (hpos == H_MAX);
  wire vmaxxed = (vpos == V_MAX);

  always @(posedge clk) begin
    if (reset)
      hpos <= 0;
    else if (hmaxxed)
      hpos <= 0;
    else
      hpos <= hpos + 1;
  end

  always @(posedge clk) begin
    if (reset)
      vpos <= 0;
    else if (hmaxxed) begin
      if (vmaxxed)
        vpos <= 0;
      else
        vpos <= vpos + 1;
    end
  end

  assign hsync = ~((hpos >= H_SYNC_START) && (hpos < H_SYNC_END));
  assign vsync = ~((vpos >= V_SYNC_START) && (vpos < V_SYNC_END));
  assign display_on = (hpos < H_DISPLAY) && (vpos < V_DISPLAY);
endmodule
)";
    return src;
}

const BuiltinLibrary& standard_library() {
    static const BuiltinLibrary lib = [] {
        BuiltinLibrary l;
        l.add(hvsync_generator_source());
        return l;
    }();
    return lib;
}

bool PinMap::valid() const {
    int seen = 0;
    for (int bit : {hsync, vsync, r1, r0, g1, g0, b1, b0}) {
        if (bit < 0 || bit > 7 || (seen & (1 << bit)))
            return false;
        seen |= 1 << bit;
    }
    return true;
}

PinSample decode_pins(uint8_t v, const PinMap& m) {
    auto bit = [v](int i) { return static_cast<uint8_t>((v >> i) & 1); };
    PinSample s;
    s.hsync = bit(m.hsync);
    s.vsync = bit(m.vsync);
    s.r = static_cast<uint8_t>(2 * bit(m.r1) + bit(m.r0));
    s.g = static_cast<uint8_t>(2 * bit(m.g1) + bit(m.g0));
    s.b = static_cast<uint8_t>(2 * bit(m.b1) + bit(m.b0));
    return s;
}

uint8_t encode_pins(const PinSample& s, const PinMap& m) {
    auto put = [](bool on, int i) { return static_cast<uint8_t>(on ? 1u << i : 0u); };
    return put(s.hsync, m.hsync) | put(s.vsync, m.vsync) | put(s.r & 2, m.r1) | put(s.r & 1, m.r0) |
           put(s.g & 2, m.g1) | put(s.g & 1, m.g0) | put(s.b & 2, m.b1) | put(s.b & 1, m.b0);
}

} // namespace ttvga
