#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttvga/elab/design.hpp"

namespace ttvga {

namespace sim_code {
inline constexpr const char* kTooLarge = "SIM_TOO_LARGE";
inline constexpr const char* kUnknownSignal = "UNKNOWN_SIGNAL";
inline constexpr const char* kNotAnInput = "NOT_AN_INPUT";
inline constexpr const char* kWidthOverflow = "WIDTH_OVERFLOW";
inline constexpr const char* kNoReset = "NO_RESET_INPUT";
inline constexpr const char* kBadArgument = "BAD_ARGUMENT";
inline constexpr const char* kInvalidDesign = "INVALID_DESIGN";
} // namespace sim_code

class SimError : public std::runtime_error {
public:
    SimError(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct SimLimits {
    size_t max_cells = 200000;
    size_t max_nets = 500000;
};

struct SignalValue {
    uint64_t bits = 0;
    uint32_t width = 1;

    bool operator==(const SignalValue&) const = default;
};

/// Cycle-based two-state simulator over an elaborated design. Single-threaded;
/// independent instances may run on different threads.
class Simulator {
public:
    explicit Simulator(ElaboratedDesign design, const SimLimits& limits = {});

    void poke(std::string_view input, uint64_t value);
    SignalValue peek(std::string_view name) const;

    /// Resolves a named net once, for fast repeated reads.
    NetId net(std::string_view name) const;
    uint64_t value(NetId net) const { return values_[net]; }

    void step(uint64_t cycles = 1);
    /// Holds rst_n low for `cycles` clock cycles, then releases it.
    void reset(uint64_t cycles);

    uint64_t cycle_count() const { return cycle_count_; }
    const ElaboratedDesign& design() const { return design_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    /// Test hook: order in which phase-2 register commits are applied.
    void set_commit_order(std::vector<uint32_t> order);

    /// True when one more combinational sweep would change nothing.
    bool at_fixed_point() const;

    /// Starts a value-change dump of all named nets, one timestep per cycle.
    void dump_vcd(std::ostream* out);

    size_t cell_count() const { return design_.cells.size(); }

private:
    struct Instr {
        CellKind kind;
        uint32_t out;
        uint32_t a, b, c;
        uint32_t param;
        uint64_t mask;
        uint64_t value;
    };

    void eval_comb();
    void eval_list(const std::vector<Instr>& list);
    void vcd_header();
    void vcd_sample();

    ElaboratedDesign design_;
    std::vector<uint64_t> values_;
    std::vector<Instr> input_instrs_;   // depend only on top-level inputs
    std::vector<Instr> state_instrs_;   // depend on register state
    std::vector<uint64_t> next_;
    std::vector<uint32_t> commit_order_;
    uint64_t cycle_count_ = 0;
    bool div_warned_ = false;
    std::vector<std::string> warnings_;
    std::ostream* vcd_ = nullptr;
    std::vector<std::pair<NetId, std::string>> vcd_nets_;
    std::vector<uint64_t> vcd_last_;
};

} // namespace ttvga
