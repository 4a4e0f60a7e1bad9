#pragma once

#include <bit>
#include <cstdint>

#include "ttvga/elab/design.hpp"

namespace ttvga {

/// Two-state value of one cell. Inputs are zero-extended values; the result is
/// masked to `width`. Division by zero yields all ones and sets *div_by_zero.
inline uint64_t eval_cell(CellKind kind, uint32_t width, uint32_t param, uint64_t value, uint64_t a, uint64_t b,
                          uint64_t c, uint32_t a_width, bool* div_by_zero) {
    const uint64_t m = width_mask(width);
    switch (kind) {
    case CellKind::Const: return value & m;
    case CellKind::Buf: return a & m;
    case CellKind::Not: return ~a & m;
    case CellKind::Neg: return (0 - a) & m;
    case CellKind::And: return a & b & m;
    case CellKind::Or: return (a | b) & m;
    case CellKind::Xor: return (a ^ b) & m;
    case CellKind::Xnor: return ~(a ^ b) & m;
    case CellKind::Add: return (a + b) & m;
    case CellKind::Sub: return (a - b) & m;
    case CellKind::Mul: return (a * b) & m;
    case CellKind::Div:
        if (b == 0) {
            if (div_by_zero)
                *div_by_zero = true;
            return m;
        }
        return (a / b) & m;
    case CellKind::Mod:
        if (b == 0) {
            if (div_by_zero)
                *div_by_zero = true;
            return m;
        }
        return (a % b) & m;
    case CellKind::Shl: return b >= 64 ? 0 : (a << b) & m;
    case CellKind::Shr: return b >= 64 ? 0 : (a >> b) & m;
    case CellKind::Eq: return a == b;
    case CellKind::Ne: return a != b;
    case CellKind::Lt: return a < b;
    case CellKind::Le: return a <= b;
    case CellKind::Gt: return a > b;
    case CellKind::Ge: return a >= b;
    case CellKind::LogAnd: return (a != 0) && (b != 0);
    case CellKind::LogOr: return (a != 0) || (b != 0);
    case CellKind::LogNot: return a == 0;
    case CellKind::RedAnd: return a == width_mask(a_width);
    case CellKind::RedOr: return a != 0;
    case CellKind::RedXor: return static_cast<uint64_t>(std::popcount(a) & 1);
    case CellKind::Mux: return (a != 0 ? b : c) & m;
    case CellKind::Concat: return (param >= 64 ? 0 : (a << param) | b) & m;
    case CellKind::Slice: return param >= 64 ? 0 : (a >> param) & m;
    }
    return 0;
}

} // namespace ttvga
