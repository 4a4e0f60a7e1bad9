#include "ttvga/sim/simulator.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>

#include "ttvga/elab/cell_eval.hpp"

namespace ttvga {

Simulator::Simulator(ElaboratedDesign design, const SimLimits& limits) : design_(std::move(design)) {
    if (design_.cells.size() > limits.max_cells)
        throw SimError(sim_code::kTooLarge, "The design has " + std::to_string(design_.cells.size()) +
                                                " logic cells, more than the simulator limit of " +
                                                std::to_string(limits.max_cells) + ".");
    if (design_.nets.size() > limits.max_nets)
        throw SimError(sim_code::kTooLarge, "The design has " + std::to_string(design_.nets.size()) +
                                                " nets, more than the simulator limit of " +
                                                std::to_string(limits.max_nets) + ".");
    if (auto problems = design_.check_invariants(); !problems.empty())
        throw SimError(sim_code::kInvalidDesign, "internal error, malformed design: " + problems.front());

    values_.assign(design_.nets.size(), 0);
    std::vector<bool> stateful(design_.nets.size(), false);
    for (const auto& r : design_.registers) {
        values_[r.q] = r.reset_value & width_mask(r.width);
        stateful[r.q] = true;
    }
    for (uint32_t idx : design_.comb_order) {
        const Cell& c = design_.cells[idx];
        Instr in{c.kind, c.out, c.in[0], c.in[1], c.in[2], c.param, width_mask(c.width), c.value};
        auto safe = [](NetId n) { return n == kNoNet ? 0u : n; };
        in.a = safe(in.a);
        in.b = safe(in.b);
        in.c = safe(in.c);
        if (c.kind == CellKind::Const) {
            values_[c.out] = c.value & in.mask;
            continue;
        }
        bool st = false;
        for (int k = 0; k < arity(c.kind); ++k)
            st = st || stateful[c.in[k]];
        stateful[c.out] = st;
        if (c.kind == CellKind::RedAnd)
            in.value = width_mask(c.param);
        (st ? state_instrs_ : input_instrs_).push_back(in);
    }
    next_.assign(design_.registers.size(), 0);
    commit_order_.resize(design_.registers.size());
    std::iota(commit_order_.begin(), commit_order_.end(), 0u);
    eval_comb();
}

void Simulator::eval_list(const std::vector<Instr>& list) {
    uint64_t* v = values_.data();
    for (const Instr& i : list) {
        const uint64_t a = v[i.a];
        const uint64_t b = v[i.b];
        uint64_t r;
        switch (i.kind) {
        case CellKind::Const: r = i.value; break;
        case CellKind::Buf: r = a; break;
        case CellKind::Not: r = ~a; break;
        case CellKind::Neg: r = 0 - a; break;
        case CellKind::And: r = a & b; break;
        case CellKind::Or: r = a | b; break;
        case CellKind::Xor: r = a ^ b; break;
        case CellKind::Xnor: r = ~(a ^ b); break;
        case CellKind::Add: r = a + b; break;
        case CellKind::Sub: r = a - b; break;
        case CellKind::Mul: r = a * b; break;
        case CellKind::Div:
        case CellKind::Mod:
            if (b == 0) {
                r = ~0ull;
                if (!div_warned_) {
                    div_warned_ = true;
                    warnings_.push_back("Division by zero during simulation (cycle " + std::to_string(cycle_count_) +
                                        "); the result was set to all ones.");
                }
            } else {
                r = i.kind == CellKind::Div ? a / b : a % b;
            }
            break;
        case CellKind::Shl: r = b >= 64 ? 0 : a << b; break;
        case CellKind::Shr: r = b >= 64 ? 0 : a >> b; break;
        case CellKind::Eq: r = a == b; break;
        case CellKind::Ne: r = a != b; break;
        case CellKind::Lt: r = a < b; break;
        case CellKind::Le: r = a <= b; break;
        case CellKind::Gt: r = a > b; break;
        case CellKind::Ge: r = a >= b; break;
        case CellKind::LogAnd: r = (a != 0) & (b != 0); break;
        case CellKind::LogOr: r = (a != 0) | (b != 0); break;
        case CellKind::LogNot: r = a == 0; break;
        case CellKind::RedAnd: r = a == i.value; break;
        case CellKind::RedOr: r = a != 0; break;
        case CellKind::RedXor: r = static_cast<uint64_t>(std::popcount(a) & 1); break;
        case CellKind::Mux: r = a != 0 ? b : v[i.c]; break;
        case CellKind::Concat: r = i.param >= 64 ? b : (a << i.param) | b; break;
        case CellKind::Slice: r = i.param >= 64 ? 0 : a >> i.param; break;
        default: r = 0; break;
        }
        v[i.out] = r & i.mask;
    }
}

void Simulator::eval_comb() {
    eval_list(input_instrs_);
    eval_list(state_instrs_);
}

NetId Simulator::net(std::string_view name) const {
    auto n = design_.find_net(name);
    if (!n)
        throw SimError(sim_code::kUnknownSignal, "There is no signal named '" + std::string(name) + "'.");
    return *n;
}

void Simulator::poke(std::string_view input, uint64_t value) {
    const PortInfo* p = design_.find_input(input);
    if (!p) {
        if (design_.find_net(input))
            throw SimError(sim_code::kNotAnInput, "'" + std::string(input) + "' is not a top-level input.");
        throw SimError(sim_code::kUnknownSignal, "There is no input named '" + std::string(input) + "'.");
    }
    if (value > width_mask(p->width))
        throw SimError(sim_code::kWidthOverflow, "The value " + std::to_string(value) + " does not fit in the " +
                                                     std::to_string(p->width) + "-bit input '" + p->name + "'.");
    if (values_[p->net] == value)
        return;
    values_[p->net] = value;
    eval_comb();
}

SignalValue Simulator::peek(std::string_view name) const {
    NetId n = net(name);
    return SignalValue{values_[n], design_.nets[n].width};
}

void Simulator::step(uint64_t cycles) {
    if (cycles == 0)
        throw SimError(sim_code::kBadArgument, "step needs at least one cycle");
    const auto& regs = design_.registers;
    for (uint64_t n = 0; n < cycles; ++n) {
        for (size_t i = 0; i < regs.size(); ++i)
            next_[i] = values_[regs[i].d];
        for (uint32_t i : commit_order_)
            values_[regs[i].q] = next_[i];
        eval_list(state_instrs_);
        ++cycle_count_;
        if (vcd_)
            vcd_sample();
    }
}

void Simulator::reset(uint64_t cycles) {
    if (cycles == 0)
        throw SimError(sim_code::kBadArgument, "reset needs at least one cycle");
    if (!design_.find_input("rst_n"))
        throw SimError(sim_code::kNoReset, "The design has no active-low reset input named 'rst_n'.");
    poke("rst_n", 0);
    step(cycles);
    poke("rst_n", 1);
}

void Simulator::set_commit_order(std::vector<uint32_t> order) {
    std::vector<uint32_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (uint32_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != i || sorted.size() != design_.registers.size())
            throw SimError(sim_code::kBadArgument, "commit order must be a permutation of the registers");
    commit_order_ = std::move(order);
}

bool Simulator::at_fixed_point() const {
    Simulator copy = *this;
    copy.vcd_ = nullptr;
    copy.eval_comb();
    return copy.values_ == values_;
}

void Simulator::dump_vcd(std::ostream* out) {
    vcd_ = out;
    if (!vcd_)
        return;
    vcd_nets_.clear();
    for (const auto& [name, net] : design_.signals)
        vcd_nets_.emplace_back(net, name);
    vcd_header();
    vcd_last_.assign(vcd_nets_.size(), ~0ull);
    vcd_sample();
}

namespace {

std::string vcd_id(size_t n) {
    std::string id;
    do {
        id += static_cast<char>('!' + n % 94);
        n /= 94;
    } while (n);
    return id;
}

std::string vcd_bits(uint64_t v, uint32_t width) {
    std::string s;
    for (uint32_t i = width; i-- > 0;)
        s += ((v >> i) & 1) ? '1' : '0';
    return s;
}

} // namespace

void Simulator::vcd_header() {
    std::ostream& o = *vcd_;
    o << "$timescale 1 ns $end\n$scope module " << design_.top << " $end\n";
    for (size_t i = 0; i < vcd_nets_.size(); ++i) {
        std::string name = vcd_nets_[i].second;
        for (char& ch : name)
            if (ch == '.')
                ch = '_';
        o << "$var wire " << design_.nets[vcd_nets_[i].first].width << ' ' << vcd_id(i) << ' ' << name << " $end\n";
    }
    o << "$upscope $end\n$enddefinitions $end\n";
}

void Simulator::vcd_sample() {
    std::ostream& o = *vcd_;
    o << '#' << cycle_count_ << '\n';
    for (size_t i = 0; i < vcd_nets_.size(); ++i) {
        NetId n = vcd_nets_[i].first;
        uint64_t v = values_[n];
        if (v == vcd_last_[i])
            continue;
        vcd_last_[i] = v;
        uint32_t w = design_.nets[n].width;
        if (w == 1)
            o << v << vcd_id(i) << '\n';
        else
            o << 'b' << vcd_bits(v, w) << ' ' << vcd_id(i) << '\n';
    }
}

} // namespace ttvga
