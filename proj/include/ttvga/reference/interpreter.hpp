#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ttvga/frontend/ast.hpp"
#include "ttvga/frontend/library.hpp"

namespace ttvga::reference {

class ReferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Slow, direct Ast interpreter kept as a test oracle. It shares no code with
/// elaboration or the compiled simulator: identifiers are resolved to slots,
/// combinational logic is iterated to a fixed point in source order, and
/// clocked blocks are executed statement by statement on every cycle.
class Interpreter {
public:
    Interpreter(const Ast& ast, std::string_view top, const BuiltinLibrary& library);
    ~Interpreter();
    Interpreter(Interpreter&&) noexcept;
    Interpreter& operator=(Interpreter&&) noexcept;

    void poke(std::string_view input, uint64_t value);
    uint64_t peek(std::string_view name) const;
    void step(uint64_t cycles = 1);
    void reset(uint64_t cycles);  // rst_n low for `cycles`, then high

    uint64_t cycle_count() const { return cycles_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    uint64_t cycles_ = 0;
};

} // namespace ttvga::reference
