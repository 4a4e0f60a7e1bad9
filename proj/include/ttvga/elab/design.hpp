#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttvga {

using NetId = uint32_t;
inline constexpr NetId kNoNet = UINT32_MAX;

enum class CellKind : uint8_t {
    Const,
    Buf,     // copy (zero-extends a narrower input)
    Not,
    Neg,
    And,
    Or,
    Xor,
    Xnor,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LogAnd,
    LogOr,
    LogNot,
    RedAnd,
    RedOr,
    RedXor,
    Mux,     // in[0] != 0 ? in[1] : in[2]
    Concat,  // (in[0] << param) | in[1]
    Slice,   // (in[0] >> param) & mask(width)
};

std::string_view to_string(CellKind kind);
int arity(CellKind kind);

struct Cell {
    CellKind kind = CellKind::Const;
    uint32_t width = 1;  // output width
    NetId out = kNoNet;
    std::array<NetId, 3> in{kNoNet, kNoNet, kNoNet};
    uint32_t param = 0;
    uint64_t value = 0;  // Const only

    bool operator==(const Cell&) const = default;
};

struct Net {
    std::string name;   // hierarchical signal name; empty for internal nets
    uint32_t width = 1;

    bool operator==(const Net&) const = default;
};

struct Register {
    NetId q = kNoNet;
    NetId d = kNoNet;
    uint32_t width = 1;
    uint64_t reset_value = 0;

    bool operator==(const Register&) const = default;
};

struct PortInfo {
    std::string name;
    NetId net = kNoNet;
    uint32_t width = 1;

    bool operator==(const PortInfo&) const = default;
};

struct InstanceRecord {
    std::string path;
    std::string module;
    bool builtin = false;

    bool operator==(const InstanceRecord&) const = default;
};

/// A flattened, parameter-resolved design: nets, primitive cells, registers
/// and a topological evaluation order for the combinational cells.
struct ElaboratedDesign {
    std::string top;
    std::vector<Net> nets;
    std::vector<Cell> cells;
    std::vector<Register> registers;
    std::vector<PortInfo> inputs;
    std::vector<PortInfo> outputs;
    std::vector<uint32_t> comb_order;
    std::vector<InstanceRecord> instance_tree;
    std::map<std::string, NetId> signals;   // every declared signal, by hierarchical name

    std::optional<NetId> find_net(std::string_view name) const;
    const PortInfo* find_input(std::string_view name) const;
    const PortInfo* find_output(std::string_view name) const;
    size_t count_instances(std::string_view module) const;

    /// Empty when the structural invariants hold (single driver per net, valid
    /// topological order, widths within 1..64); otherwise one line per problem.
    std::vector<std::string> check_invariants() const;
};

inline uint64_t width_mask(uint32_t width) { return width >= 64 ? ~0ull : ((1ull << width) - 1); }

} // namespace ttvga
