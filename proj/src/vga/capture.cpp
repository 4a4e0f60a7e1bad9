#include "ttvga/vga/capture.hpp"

#include <algorithm>

#include "ttvga/util/digest.hpp"

namespace ttvga {

namespace {

uint8_t scale(uint8_t v) { return static_cast<uint8_t>(v * 85); }

} // namespace

std::string Frame::rgb888() const {
    std::string out(pixels.size() * 3, '\0');
    for (size_t i = 0; i < pixels.size(); ++i) {
        out[3 * i] = static_cast<char>(scale(pixels[i].r));
        out[3 * i + 1] = static_cast<char>(scale(pixels[i].g));
        out[3 * i + 2] = static_cast<char>(scale(pixels[i].b));
    }
    return out;
}

std::string Frame::digest() const { return sha256_hex(rgb888()); }

SyncStats measure_sync(const uint8_t* samples, size_t count, const PinMap& pins, const VgaTiming& t) {
    SyncStats s;
    uint32_t run = 0;
    bool widths_uniform = true;
    uint64_t vsync_low = 0;
    bool vsync_prev = true;
    bool hsync_prev = true;
    for (size_t i = 0; i < count; ++i) {
        PinSample p = decode_pins(samples[i], pins);
        if (!p.hsync) {
            if (hsync_prev)
                ++s.hsync_pulses;
            ++run;
        } else if (run) {
            if (s.hsync_low_cycles == 0)
                s.hsync_low_cycles = run;
            else if (run != s.hsync_low_cycles)
                widths_uniform = false;
            run = 0;
        }
        if (!p.vsync) {
            if (vsync_prev)
                ++s.vsync_pulses;
            ++vsync_low;
        }
        hsync_prev = p.hsync;
        vsync_prev = p.vsync;
    }
    if (run && s.hsync_low_cycles == 0)
        s.hsync_low_cycles = run;
    if (!widths_uniform)
        s.hsync_low_cycles = 0;
    s.vsync_low_lines = static_cast<uint32_t>(vsync_low / t.h_total());
    if (vsync_low % t.h_total())
        s.vsync_low_lines = 0;
    return s;
}

namespace {

std::string frame_label(uint32_t index) { return "In frame " + std::to_string(index) + ": "; }

/// Explains the first deviation of a frame window from the expected sync waveform.
[[noreturn]] void diagnose(const uint8_t* w, uint32_t index, const PinMap& pins, const VgaTiming& t) {
    const uint32_t H = t.h_total();
    std::string at = frame_label(index);

    // Horizontal pulses, line by line.
    for (uint32_t line = 0; line < t.v_total(); ++line) {
        uint32_t start = 0, width = 0, pulses = 0;
        bool prev = true;
        for (uint32_t h = 0; h < H; ++h) {
            bool hs = decode_pins(w[line * H + h], pins).hsync;
            if (!hs && prev) {
                ++pulses;
                if (pulses == 1)
                    start = h;
            }
            if (!hs && pulses == 1)
                ++width;
            prev = hs;
        }
        if (pulses == 0)
            throw TimingViolation(at + "no hsync pulse on line " + std::to_string(line) +
                                  " after the vsync pulse; hsync must go low once per 800-cycle line.");
        if (pulses > 1)
            throw TimingViolation(at + "saw " + std::to_string(pulses) + " hsync pulses on one line, expected 1.");
        if (width != t.h_sync)
            throw TimingViolation(at + "hsync pulse width " + std::to_string(width) + " cycles, expected " +
                                  std::to_string(t.h_sync) + ".");
        if (start != t.h_sync_start())
            throw TimingViolation(at + "hsync pulse starts at cycle " + std::to_string(start) +
                                  " of the line, expected " + std::to_string(t.h_sync_start()) +
                                  ". Check the front porch (pixels 640 to 655 must be blank).");
    }
    // Vertical pulse.
    uint32_t low_lines = 0;
    for (uint32_t line = 0; line < t.v_total(); ++line) {
        uint32_t low = 0;
        for (uint32_t h = 0; h < H; ++h)
            low += !decode_pins(w[line * H + h], pins).vsync;
        if (low != 0 && low != H)
            throw TimingViolation(at + "vsync changes in the middle of a line (line " + std::to_string(line) +
                                  "); it must switch only at the start of a line.");
        bool expect_low = line < t.v_sync;
        if ((low == H) != expect_low) {
            if (expect_low || line == t.v_sync) {
                for (uint32_t l = 0; l < t.v_total() && !decode_pins(w[l * H], pins).vsync; ++l)
                    ++low_lines;
                throw TimingViolation(at + "vsync pulse is " + std::to_string(low_lines) + " lines long, expected " +
                                      std::to_string(t.v_sync) + ".");
            }
            throw TimingViolation(at + "vsync went low again at line " + std::to_string(line) +
                                  " after the pulse; expected exactly one vsync pulse per frame of " +
                                  std::to_string(t.v_total()) + " lines.");
        }
    }
    throw TimingViolation(at + "the sync signals do not follow 640x480 VGA timing.");
}

} // namespace

CaptureResult capture_frames(Simulator& sim, const CaptureOptions& opt) {
    if (opt.frames == 0)
        throw std::invalid_argument("capture needs at least one frame");
    if (!opt.pins.valid())
        throw std::invalid_argument("pin map must use each of the 8 output bits exactly once");
    const VgaTiming& t = opt.timing;
    const uint64_t N = t.frame_cycles();
    const uint64_t H = t.h_total();
    const uint64_t window = 2 * N;

    const PortInfo* out = sim.design().find_output(opt.output_port);
    if (!out)
        throw TimingViolation("The design has no output port named '" + opt.output_port + "' to read VGA signals from.");
    const NetId out_net = out->net;

    std::vector<ScheduledPoke> schedule = opt.schedule;
    std::stable_sort(schedule.begin(), schedule.end(),
                     [](const ScheduledPoke& a, const ScheduledPoke& b) { return a.cycle < b.cycle; });
    size_t next_poke = 0;
    uint64_t cycle = 0;
    auto sample = [&]() {
        while (next_poke < schedule.size() && schedule[next_poke].cycle <= cycle) {
            sim.poke(schedule[next_poke].input, schedule[next_poke].value);
            ++next_poke;
        }
        uint8_t v = static_cast<uint8_t>(sim.value(out_net));
        sim.step(1);
        ++cycle;
        return v;
    };

    // Alignment: first sample with vsync low whose predecessor had vsync high.
    std::vector<uint8_t> samples;
    bool prev_vsync = decode_pins(sample(), opt.pins).vsync;
    uint64_t t_fall = 0;
    bool found = false;
    uint8_t first = 0;
    while (cycle < window) {
        uint8_t v = sample();
        bool vs = decode_pins(v, opt.pins).vsync;
        if (prev_vsync && !vs) {
            t_fall = cycle - 1;
            first = v;
            found = true;
            break;
        }
        prev_vsync = vs;
    }
    if (!found)
        throw TimingViolation("no vsync edge within " + std::to_string(window) +
                              " cycles (two frames). vsync must go low for 2 lines once every " +
                              std::to_string(N) + " cycles; check that uo_out carries the vsync signal.");

    samples.resize(static_cast<size_t>(opt.frames * N));
    samples[0] = first;
    for (size_t i = 1; i < samples.size(); ++i)
        samples[i] = sample();

    CaptureResult result;
    result.alignment_cycles = t_fall;
    result.cycles_used = cycle;

    const uint64_t top_skip = (t.v_sync + t.v_back) * H;
    for (uint32_t k = 0; k < opt.frames; ++k) {
        const uint8_t* w = samples.data() + k * N;
        Frame f;
        f.index = k;
        f.width = t.h_visible;
        f.height = t.v_visible;
        f.sync = measure_sync(w, N, opt.pins, t);
        SyncStats expected{t.v_total(), 1, t.h_sync, t.v_sync};
        bool exact = f.sync == expected;
        // Same counts can still hide a shifted pulse; compare every cycle.
        for (uint64_t o = 0; exact && o < N; ++o) {
            uint64_t line = o / H;
            uint64_t h = o % H;
            PinSample p = decode_pins(w[o], opt.pins);
            bool hs_expected = !(h >= t.h_sync_start() && h < t.h_sync_start() + t.h_sync);
            bool vs_expected = line >= t.v_sync;
            exact = p.hsync == hs_expected && p.vsync == vs_expected;
        }
        if (!exact)
            diagnose(w, k, opt.pins, t);
        f.pixels.resize(static_cast<size_t>(f.width) * f.height);
        for (uint32_t y = 0; y < f.height; ++y)
            for (uint32_t x = 0; x < f.width; ++x) {
                PinSample p = decode_pins(w[top_skip + y * H + x], opt.pins);
                f.pixels[static_cast<size_t>(y) * f.width + x] = Rgb222{p.r, p.g, p.b};
            }
        result.frames.push_back(std::move(f));
    }
    return result;
}

} // namespace ttvga
