#include <algorithm>
#include <map>
#include <tuple>

#include "ttvga/elab/design.hpp"
#include "ttvga/elab/elaborate.hpp"

namespace ttvga {

namespace {

enum class DriverType : uint8_t { None, Cell, Register, Input };

struct Driver {
    DriverType type = DriverType::None;
    uint32_t index = 0;
};

std::vector<Driver> driver_table(const ElaboratedDesign& d) {
    std::vector<Driver> drivers(d.nets.size());
    for (uint32_t i = 0; i < d.cells.size(); ++i)
        drivers[d.cells[i].out] = {DriverType::Cell, i};
    for (uint32_t i = 0; i < d.registers.size(); ++i)
        drivers[d.registers[i].q] = {DriverType::Register, i};
    for (uint32_t i = 0; i < d.inputs.size(); ++i)
        drivers[d.inputs[i].net] = {DriverType::Input, i};
    return drivers;
}

std::string cycle_message(const std::vector<std::string>& names) {
    std::string chain;
    for (const auto& n : names)
        chain += n + " -> ";
    if (!names.empty())
        chain += names.front();
    return "There is a combinational loop: " + (chain.empty() ? std::string("(internal signals)") : chain) +
           ". A signal ends up depending on itself without a register in between. Fix: break the loop with a "
           "register (always @(posedge clk)), or remove the feedback.";
}

/// Topological order of all cells. Throws COMB_CYCLE naming the nets on the loop.
std::vector<uint32_t> topo_order(const ElaboratedDesign& d) {
    const auto drivers = driver_table(d);
    std::vector<uint8_t> color(d.cells.size(), 0);  // 0 new, 1 on stack, 2 done
    std::vector<uint32_t> order;
    order.reserve(d.cells.size());
    struct Frame {
        uint32_t cell;
        int next_input;
    };
    std::vector<Frame> stack;
    for (uint32_t root = 0; root < d.cells.size(); ++root) {
        if (color[root])
            continue;
        stack.push_back({root, 0});
        color[root] = 1;
        while (!stack.empty()) {
            Frame& f = stack.back();
            const Cell& c = d.cells[f.cell];
            if (f.next_input < 3) {
                NetId in = c.in[f.next_input++];
                if (in == kNoNet || drivers[in].type != DriverType::Cell)
                    continue;
                uint32_t dep = drivers[in].index;
                if (color[dep] == 2)
                    continue;
                if (color[dep] == 1) {
                    std::vector<std::string> names;
                    size_t start = 0;
                    while (stack[start].cell != dep)
                        ++start;
                    for (size_t i = start; i < stack.size(); ++i) {
                        const std::string& n = d.nets[d.cells[stack[i].cell].out].name;
                        if (!n.empty() && std::find(names.begin(), names.end(), n) == names.end())
                            names.push_back(n);
                    }
                    std::sort(names.begin(), names.end());
                    throw ElaborationError(elab_code::kCombCycle, cycle_message(names), {}, names);
                }
                color[dep] = 1;
                stack.push_back({dep, 0});
                continue;
            }
            color[f.cell] = 2;
            order.push_back(f.cell);
            stack.pop_back();
        }
    }
    return order;
}

/// Merges structurally identical cells and transparent buffers on internal nets.
void share_cells(ElaboratedDesign& d, const std::vector<uint32_t>& order, std::vector<bool>& dead) {
    std::vector<NetId> rep(d.nets.size());
    for (NetId i = 0; i < rep.size(); ++i)
        rep[i] = i;
    using Key = std::tuple<CellKind, uint32_t, NetId, NetId, NetId, uint32_t, uint64_t>;
    std::map<Key, NetId> seen;
    for (uint32_t idx : order) {
        Cell& c = d.cells[idx];
        for (auto& in : c.in)
            if (in != kNoNet)
                in = rep[in];
        bool internal = d.nets[c.out].name.empty();
        if (!internal)
            continue;
        if (c.kind == CellKind::Buf && d.nets[c.in[0]].width == c.width) {
            rep[c.out] = c.in[0];
            dead[idx] = true;
            continue;
        }
        Key key{c.kind, c.width, c.in[0], c.in[1], c.in[2], c.param, c.value};
        auto [it, inserted] = seen.emplace(key, c.out);
        if (!inserted) {
            rep[c.out] = it->second;
            dead[idx] = true;
        }
    }
    for (auto& r : d.registers)
        r.d = rep[r.d];
}

void mark_live(const ElaboratedDesign& d, const std::vector<bool>& dead, std::vector<bool>& live_cell,
               std::vector<bool>& live_reg) {
    const auto drivers = driver_table(d);
    std::vector<bool> seen(d.nets.size(), false);
    std::vector<NetId> work;
    for (NetId n = 0; n < d.nets.size(); ++n)
        if (!d.nets[n].name.empty()) {
            seen[n] = true;
            work.push_back(n);
        }
    auto push = [&](NetId n) {
        if (n != kNoNet && !seen[n]) {
            seen[n] = true;
            work.push_back(n);
        }
    };
    while (!work.empty()) {
        NetId n = work.back();
        work.pop_back();
        const Driver& drv = drivers[n];
        if (drv.type == DriverType::Cell && !dead[drv.index]) {
            live_cell[drv.index] = true;
            for (NetId in : d.cells[drv.index].in)
                push(in);
        } else if (drv.type == DriverType::Register) {
            live_reg[drv.index] = true;
            push(d.registers[drv.index].d);
        }
    }
}

bool low_bits_closed(CellKind k) {
    switch (k) {
    case CellKind::Add: case CellKind::Sub: case CellKind::Mul: case CellKind::Neg: case CellKind::Not:
    case CellKind::And: case CellKind::Or: case CellKind::Xor: case CellKind::Xnor: case CellKind::Buf:
        return true;
    default:
        return false;
    }
}

/// Shrinks internal nets to the number of low bits any consumer observes.
void narrow(ElaboratedDesign& d, const std::vector<uint32_t>& order) {
    std::vector<uint32_t> need(d.nets.size(), 0);
    auto require = [&](NetId n, uint32_t bits) {
        if (n != kNoNet)
            need[n] = std::max(need[n], std::min(bits, d.nets[n].width));
    };
    for (NetId n = 0; n < d.nets.size(); ++n)
        if (!d.nets[n].name.empty())
            need[n] = d.nets[n].width;
    for (const auto& r : d.registers)
        require(r.d, r.width);
    for (size_t i = order.size(); i-- > 0;) {
        Cell& c = d.cells[order[i]];
        uint32_t w = std::max<uint32_t>(1, std::min(c.width, need[c.out]));
        if (d.nets[c.out].name.empty()) {
            c.width = w;
            d.nets[c.out].width = w;
            if (c.kind == CellKind::Const)
                c.value &= width_mask(w);
        }
        w = c.width;
        if (low_bits_closed(c.kind)) {
            require(c.in[0], w);
            require(c.in[1], w);
        } else if (c.kind == CellKind::Mux) {
            require(c.in[0], 64);
            require(c.in[1], w);
            require(c.in[2], w);
        } else if (c.kind == CellKind::Shl) {
            require(c.in[0], w);
            require(c.in[1], 64);
        } else if (c.kind == CellKind::Concat) {
            require(c.in[0], w > c.param ? w - c.param : 1);
            require(c.in[1], std::min(w, c.param));
        } else if (c.kind == CellKind::Slice) {
            require(c.in[0], c.param + w);
        } else {
            for (NetId in : c.in)
                require(in, 64);
        }
    }
}

} // namespace

void finalize_design(ElaboratedDesign& d) {
    std::vector<uint32_t> order = topo_order(d);
    std::vector<bool> dead(d.cells.size(), false);
    share_cells(d, order, dead);

    std::vector<bool> live_cell(d.cells.size(), false);
    std::vector<bool> live_reg(d.registers.size(), false);
    mark_live(d, dead, live_cell, live_reg);

    std::vector<uint32_t> live_order;
    for (uint32_t idx : order)
        if (live_cell[idx])
            live_order.push_back(idx);
    narrow(d, live_order);

    // Compact: cells stored in evaluation order, nets renumbered densely.
    std::vector<NetId> remap(d.nets.size(), kNoNet);
    std::vector<Net> nets;
    auto keep = [&](NetId n) {
        if (n == kNoNet)
            return kNoNet;
        if (remap[n] == kNoNet) {
            remap[n] = static_cast<NetId>(nets.size());
            nets.push_back(d.nets[n]);
        }
        return remap[n];
    };
    for (NetId n = 0; n < d.nets.size(); ++n)
        if (!d.nets[n].name.empty())
            keep(n);
    std::vector<Cell> cells;
    cells.reserve(live_order.size());
    for (uint32_t idx : live_order) {
        Cell c = d.cells[idx];
        c.out = keep(c.out);
        for (auto& in : c.in)
            in = keep(in);
        cells.push_back(c);
    }
    std::vector<Register> regs;
    for (size_t i = 0; i < d.registers.size(); ++i) {
        if (!live_reg[i])
            continue;
        Register r = d.registers[i];
        r.q = keep(r.q);
        r.d = keep(r.d);
        regs.push_back(r);
    }
    for (auto& p : d.inputs)
        p.net = remap[p.net];
    for (auto& p : d.outputs)
        p.net = remap[p.net];
    for (auto& [name, net] : d.signals)
        net = remap[net];
    d.nets = std::move(nets);
    d.cells = std::move(cells);
    d.registers = std::move(regs);
    d.comb_order.resize(d.cells.size());
    for (uint32_t i = 0; i < d.cells.size(); ++i)
        d.comb_order[i] = i;
}

} // namespace ttvga
