#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttvga/sim/simulator.hpp"
#include "ttvga/vga/timing.hpp"

namespace ttvga {

struct Rgb222 {
    uint8_t r = 0, g = 0, b = 0;

    bool operator==(const Rgb222&) const = default;
};

struct SyncStats {
    uint32_t hsync_pulses = 0;
    uint32_t vsync_pulses = 0;
    uint32_t hsync_low_cycles = 0;  // width of every hsync pulse
    uint32_t vsync_low_lines = 0;

    bool operator==(const SyncStats&) const = default;
};

struct Frame {
    uint32_t width = 640;
    uint32_t height = 480;
    std::vector<Rgb222> pixels;  // row-major
    SyncStats sync;
    uint32_t index = 0;

    const Rgb222& at(uint32_t x, uint32_t y) const { return pixels[static_cast<size_t>(y) * width + x]; }
    /// Raw RGB888 bytes with channel scaling 0,1,2,3 -> 0,85,170,255.
    std::string rgb888() const;
    /// Lowercase hex SHA-256 of rgb888().
    std::string digest() const;
};

/// A scheduled input change. `cycle` counts from the start of the capture.
struct ScheduledPoke {
    uint64_t cycle = 0;
    std::string input;
    uint64_t value = 0;
};

struct CaptureOptions {
    uint32_t frames = 1;
    PinMap pins;
    VgaTiming timing;
    std::vector<ScheduledPoke> schedule;
    std::string output_port = "uo_out";
};

struct CaptureResult {
    std::vector<Frame> frames;
    uint64_t alignment_cycles = 0;  // cycles before the first vsync falling edge
    uint64_t cycles_used = 0;
};

/// Raised when the sync signals do not follow the expected VGA timing.
class TimingViolation : public std::runtime_error {
public:
    explicit TimingViolation(const std::string& message) : std::runtime_error(message) {}
};

/// Steps `sim`, sampling the output port each cycle, aligns to the first vsync
/// falling edge and rebuilds `frames` frames. Throws TimingViolation.
CaptureResult capture_frames(Simulator& sim, const CaptureOptions& options);

/// Sync statistics of one frame window of samples starting at a vsync falling edge.
SyncStats measure_sync(const uint8_t* samples, size_t count, const PinMap& pins, const VgaTiming& timing);

} // namespace ttvga
