#include "ttvga/elab/design.hpp"

#include <algorithm>

namespace ttvga {

std::string_view to_string(CellKind kind) {
    switch (kind) {
    case CellKind::Const: return "const";
    case CellKind::Buf: return "buf";
    case CellKind::Not: return "not";
    case CellKind::Neg: return "neg";
    case CellKind::And: return "and";
    case CellKind::Or: return "or";
    case CellKind::Xor: return "xor";
    case CellKind::Xnor: return "xnor";
    case CellKind::Add: return "add";
    case CellKind::Sub: return "sub";
    case CellKind::Mul: return "mul";
    case CellKind::Div: return "div";
    case CellKind::Mod: return "mod";
    case CellKind::Shl: return "shl";
    case CellKind::Shr: return "shr";
    case CellKind::Eq: return "eq";
    case CellKind::Ne: return "ne";
    case CellKind::Lt: return "lt";
    case CellKind::Le: return "le";
    case CellKind::Gt: return "gt";
    case CellKind::Ge: return "ge";
    case CellKind::LogAnd: return "log_and";
    case CellKind::LogOr: return "log_or";
    case CellKind::LogNot: return "log_not";
    case CellKind::RedAnd: return "red_and";
    case CellKind::RedOr: return "red_or";
    case CellKind::RedXor: return "red_xor";
    case CellKind::Mux: return "mux";
    case CellKind::Concat: return "concat";
    case CellKind::Slice: return "slice";
    }
    return "?";
}

int arity(CellKind kind) {
    switch (kind) {
    case CellKind::Const: return 0;
    case CellKind::Buf: case CellKind::Not: case CellKind::Neg: case CellKind::LogNot: case CellKind::RedAnd:
    case CellKind::RedOr: case CellKind::RedXor: case CellKind::Slice:
        return 1;
    case CellKind::Mux: return 3;
    default: return 2;
    }
}

std::optional<NetId> ElaboratedDesign::find_net(std::string_view name) const {
    auto it = signals.find(std::string(name));
    if (it == signals.end())
        return std::nullopt;
    return it->second;
}

const PortInfo* ElaboratedDesign::find_input(std::string_view name) const {
    for (const auto& p : inputs)
        if (p.name == name)
            return &p;
    return nullptr;
}

const PortInfo* ElaboratedDesign::find_output(std::string_view name) const {
    for (const auto& p : outputs)
        if (p.name == name)
            return &p;
    return nullptr;
}

size_t ElaboratedDesign::count_instances(std::string_view module) const {
    return static_cast<size_t>(std::count_if(instance_tree.begin(), instance_tree.end(),
                                              [&](const InstanceRecord& r) { return r.module == module; }));
}

std::vector<std::string> ElaboratedDesign::check_invariants() const {
    std::vector<std::string> problems;
    std::vector<int> drivers(nets.size(), 0);
    auto bad_net = [&](NetId n) { return n == kNoNet || n >= nets.size(); };
    for (size_t i = 0; i < nets.size(); ++i)
        if (nets[i].width < 1 || nets[i].width > 64)
            problems.push_back("net " + std::to_string(i) + " has width " + std::to_string(nets[i].width));
    for (size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (bad_net(c.out)) {
            problems.push_back("cell " + std::to_string(i) + " has no output net");
            continue;
        }
        ++drivers[c.out];
        if (c.width != nets[c.out].width)
            problems.push_back("cell " + std::to_string(i) + " width differs from its output net");
        for (int k = 0; k < arity(c.kind); ++k)
            if (bad_net(c.in[k]))
                problems.push_back("cell " + std::to_string(i) + " input " + std::to_string(k) + " is unconnected");
    }
    for (const auto& r : registers) {
        if (bad_net(r.q) || bad_net(r.d)) {
            problems.push_back("register with unconnected net");
            continue;
        }
        ++drivers[r.q];
        if (nets[r.q].width != r.width || nets[r.d].width > r.width)
            problems.push_back("register " + nets[r.q].name + " width mismatch");
    }
    for (const auto& p : inputs) {
        if (bad_net(p.net)) {
            problems.push_back("input " + p.name + " has no net");
            continue;
        }
        ++drivers[p.net];
    }
    for (size_t i = 0; i < nets.size(); ++i) {
        if (drivers[i] > 1)
            problems.push_back("net " + (nets[i].name.empty() ? std::to_string(i) : nets[i].name) +
                               " has several drivers");
        if (drivers[i] == 0)
            problems.push_back("net " + (nets[i].name.empty() ? std::to_string(i) : nets[i].name) +
                               " has no driver");
    }
    if (comb_order.size() != cells.size()) {
        problems.push_back("evaluation order does not cover every cell");
        return problems;
    }
    // Every cell input must be a register, an input, or an output of an earlier cell.
    std::vector<bool> ready(nets.size(), false);
    for (const auto& r : registers)
        if (!bad_net(r.q))
            ready[r.q] = true;
    for (const auto& p : inputs)
        if (!bad_net(p.net))
            ready[p.net] = true;
    std::vector<bool> visited(cells.size(), false);
    for (uint32_t idx : comb_order) {
        if (idx >= cells.size() || visited[idx]) {
            problems.push_back("evaluation order is not a permutation");
            return problems;
        }
        visited[idx] = true;
        const Cell& c = cells[idx];
        for (int k = 0; k < arity(c.kind); ++k)
            if (!bad_net(c.in[k]) && !ready[c.in[k]])
                problems.push_back("cell " + std::to_string(idx) + " reads a net before it is computed");
        if (!bad_net(c.out))
            ready[c.out] = true;
    }
    return problems;
}

} // namespace ttvga
