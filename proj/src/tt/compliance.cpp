#include "ttvga/tt/compliance.hpp"

#include <cmath>
#include <map>
#include <set>

namespace ttvga {

namespace {

struct ExpectedPort {
    const char* name;
    Direction dir;
    uint32_t width;
};

constexpr ExpectedPort kPorts[] = {
    {"ui_in", Direction::Input, 8},    {"uo_out", Direction::Output, 8}, {"uio_in", Direction::Input, 8},
    {"uio_out", Direction::Output, 8}, {"uio_oe", Direction::Output, 8}, {"ena", Direction::Input, 1},
    {"clk", Direction::Input, 1},      {"rst_n", Direction::Input, 1},
};

/// Small constant evaluator for port ranges, which may use module parameters.
std::optional<int64_t> const_eval(const Expr& e, const std::map<std::string, int64_t>& params) {
    switch (e.kind) {
    case ExprKind::Number: return static_cast<int64_t>(e.value);
    case ExprKind::Ident: {
        auto it = params.find(e.name);
        if (it == params.end())
            return std::nullopt;
        return it->second;
    }
    case ExprKind::Unary: {
        auto a = const_eval(e.args[0], params);
        if (!a)
            return std::nullopt;
        if (e.op == Op::Neg)
            return -*a;
        if (e.op == Op::Plus)
            return *a;
        return std::nullopt;
    }
    case ExprKind::Binary: {
        auto a = const_eval(e.args[0], params);
        auto b = const_eval(e.args[1], params);
        if (!a || !b)
            return std::nullopt;
        switch (e.op) {
        case Op::Add: return *a + *b;
        case Op::Sub: return *a - *b;
        case Op::Mul: return *a * *b;
        case Op::Div: return *b ? std::optional<int64_t>(*a / *b) : std::nullopt;
        default: return std::nullopt;
        }
    }
    default: return std::nullopt;
    }
}

std::string dir_word(Direction d) { return d == Direction::Input ? "input" : d == Direction::Output ? "output" : "inout"; }

std::string range_text(uint32_t width) { return width == 1 ? "" : "[" + std::to_string(width - 1) + ":0] "; }

void check_ports(const Module& m, ComplianceReport& r) {
    std::map<std::string, int64_t> params;
    auto add_param = [&](const ParamDecl& p) {
        if (auto v = const_eval(p.value, params))
            params[p.name] = *v;
    };
    for (const auto& p : m.header_params)
        add_param(p);
    for (const auto& item : m.items)
        if (auto* p = std::get_if<ParamDecl>(&item))
            add_param(*p);

    std::set<std::string> expected;
    for (const auto& e : kPorts)
        expected.insert(e.name);
    for (const auto& e : kPorts) {
        const PortDecl* p = m.find_port(e.name);
        if (!p) {
            r.findings.push_back({tt_code::kMissingPort, Severity::Error,
                                  "The top module is missing the port '" + std::string(e.name) + "'. Add '" +
                                      dir_word(e.dir) + " wire " + range_text(e.width) + e.name +
                                      "' to the port list; every Tiny Tapeout project needs all 8 template ports.",
                                  m.span});
            continue;
        }
        if (p->dir != e.dir)
            r.findings.push_back({tt_code::kPortDirection, Severity::Error,
                                  "Port '" + p->name + "' must be an " + dir_word(e.dir) + ", not an " +
                                      dir_word(p->dir) + ".",
                                  p->span});
        uint32_t width = 1;
        bool known = true;
        if (p->type == NetType::Integer) {
            width = 32;
        } else if (p->range) {
            auto msb = const_eval(p->range->msb, params);
            auto lsb = const_eval(p->range->lsb, params);
            known = msb && lsb && *lsb == 0 && *msb >= 0;
            if (known)
                width = static_cast<uint32_t>(*msb + 1);
        }
        if (!known || width != e.width)
            r.findings.push_back({tt_code::kPortWidth, Severity::Error,
                                  "Port '" + p->name + "' must be declared as " + range_text(e.width) + p->name +
                                      (e.width == 1 ? " (a single bit)." : " (8 bits, numbered 7 down to 0)."),
                                  p->span});
    }
    for (const auto& p : m.ports)
        if (!expected.count(p.name))
            r.findings.push_back({tt_code::kExtraPort, Severity::Error,
                                  "Port '" + p.name + "' is not part of the Tiny Tapeout template. Remove it and use "
                                                      "ui_in/uo_out/uio_* pins instead.",
                                  p.span});
}

} // namespace

ComplianceReport check_interface(const Ast& ast) {
    ComplianceReport r;
    std::vector<const Module*> tops;
    for (const auto& m : ast.modules)
        if (m.name.rfind("tt_um_", 0) == 0)
            tops.push_back(&m);
    if (tops.empty()) {
        std::string names;
        for (const auto& m : ast.modules)
            names += (names.empty() ? "'" : ", '") + m.name + "'";
        Span span = ast.modules.empty() ? Span{} : ast.modules.front().span;
        r.findings.push_back({tt_code::kBadTopName, Severity::Error,
                              "No module name starts with 'tt_um_'" + (names.empty() ? "" : " (found " + names + ")") +
                                  ". Rename the top module, for example to 'tt_um_my_design'.",
                              span});
    } else if (tops.size() > 1) {
        r.findings.push_back({tt_code::kMultipleTops, Severity::Error,
                              "More than one module name starts with 'tt_um_'. Keep exactly one top module with that "
                              "prefix and rename the others.",
                              tops[1]->span});
    } else {
        r.detected_top = tops[0]->name;
        check_ports(*tops[0], r);
    }
    r.interface_ok = true;
    for (const auto& f : r.findings)
        if (f.severity == Severity::Error)
            r.interface_ok = false;
    return r;
}

const std::vector<TileShape>& tile_ladder() {
    static const std::vector<TileShape> ladder = {{1, 1}, {1, 2}, {2, 2}, {2, 4}};
    return ladder;
}

NetFacts analyze_nets(const ElaboratedDesign& d) {
    NetFacts f;
    f.constant.assign(d.nets.size(), false);
    f.significant.resize(d.nets.size());
    for (size_t n = 0; n < d.nets.size(); ++n)
        f.significant[n] = d.nets[n].width;
    std::vector<uint64_t> value(d.nets.size(), 0);
    auto sig = [&](NetId n) { return f.significant[n]; };
    auto bit_length = [](uint64_t v) { return v == 0 ? 0u : static_cast<uint32_t>(64 - __builtin_clzll(v)); };
    // Cells are stored in evaluation order, so inputs are analyzed first.
    for (const Cell& c : d.cells) {
        uint32_t s = c.width;
        switch (c.kind) {
        case CellKind::Const:
            f.constant[c.out] = true;
            value[c.out] = c.value;
            s = bit_length(c.value);
            break;
        case CellKind::Buf: s = sig(c.in[0]); break;
        case CellKind::And: s = std::min(sig(c.in[0]), sig(c.in[1])); break;
        case CellKind::Or: case CellKind::Xor: s = std::max(sig(c.in[0]), sig(c.in[1])); break;
        case CellKind::Add: s = std::max(sig(c.in[0]), sig(c.in[1])) + 1; break;
        case CellKind::Mul: s = sig(c.in[0]) + sig(c.in[1]); break;
        case CellKind::Div: case CellKind::Shr: s = sig(c.in[0]); break;
        case CellKind::Mod: s = std::min(sig(c.in[0]), sig(c.in[1])); break;
        case CellKind::Shl:
            if (f.constant[c.in[1]])
                s = sig(c.in[0]) + static_cast<uint32_t>(std::min<uint64_t>(64, value[c.in[1]]));
            break;
        case CellKind::Mux: s = std::max(sig(c.in[1]), sig(c.in[2])); break;
        case CellKind::Concat: s = sig(c.in[0]) ? c.param + sig(c.in[0]) : sig(c.in[1]); break;
        case CellKind::Slice: s = sig(c.in[0]) > c.param ? sig(c.in[0]) - c.param : 0; break;
        case CellKind::Eq: case CellKind::Ne: case CellKind::Lt: case CellKind::Le: case CellKind::Gt:
        case CellKind::Ge: case CellKind::LogAnd: case CellKind::LogOr: case CellKind::LogNot:
        case CellKind::RedAnd: case CellKind::RedOr: case CellKind::RedXor:
            s = 1;
            break;
        default: break;  // Not, Xnor, Sub, Neg can set any bit
        }
        f.significant[c.out] = std::min(s, c.width);
    }
    return f;
}

double cell_weight(const ElaboratedDesign& d, const Cell& c, const NetFacts& facts) {
    const double w = std::max<uint32_t>(1, facts.significant[c.out]);
    // Width an operand contributes to the logic reading it; constants fold away.
    auto operand = [&](int k) {
        return facts.constant[c.in[k]] ? 0.0 : static_cast<double>(std::max<uint32_t>(1, facts.significant[c.in[k]]));
    };
    switch (c.kind) {
    case CellKind::Const:
    case CellKind::Buf:
    case CellKind::Concat:
    case CellKind::Slice:
        return 0;
    case CellKind::Not: case CellKind::And: case CellKind::Or: case CellKind::Xor: case CellKind::Xnor:
    case CellKind::Add: case CellKind::Sub: case CellKind::Neg: case CellKind::Mux:
        return w;
    case CellKind::Mul:
        return std::ceil(w * w / 2);
    case CellKind::Div:
    case CellKind::Mod:
        return w * w;
    case CellKind::Shl:
    case CellKind::Shr:
        if (facts.constant[c.in[1]])
            return 0;
        return w * std::max(1.0, std::ceil(std::log2(w)));
    case CellKind::Eq: case CellKind::Ne: case CellKind::Lt: case CellKind::Le: case CellKind::Gt: case CellKind::Ge:
        return std::max(operand(0), operand(1));
    case CellKind::LogAnd:
    case CellKind::LogOr:
        return operand(0) + operand(1);
    case CellKind::LogNot:
    case CellKind::RedAnd:
    case CellKind::RedOr:
    case CellKind::RedXor:
        return operand(0);
    }
    return 0;
}

AreaEstimate area_for_units(double units, double capacity) {
    AreaEstimate a;
    a.cell_units = units;
    const auto& ladder = tile_ladder();
    a.tiles = ladder.back();
    a.fits = false;
    for (const auto& shape : ladder)
        if (shape.count() * capacity >= units) {
            a.tiles = shape;
            a.fits = true;
            break;
        }
    a.utilization = units / (a.tiles.count() * capacity);
    return a;
}

AreaEstimate estimate_area(const ElaboratedDesign& d, double capacity) {
    const NetFacts facts = analyze_nets(d);
    // Synthesis drops logic no output observes, so only the output cones count.
    std::vector<int64_t> cell_of(d.nets.size(), -1), reg_of(d.nets.size(), -1);
    for (size_t i = 0; i < d.cells.size(); ++i)
        cell_of[d.cells[i].out] = static_cast<int64_t>(i);
    for (size_t i = 0; i < d.registers.size(); ++i)
        reg_of[d.registers[i].q] = static_cast<int64_t>(i);
    std::vector<bool> seen(d.nets.size(), false);
    std::vector<NetId> work;
    auto visit = [&](NetId n) {
        if (n != kNoNet && !seen[n]) {
            seen[n] = true;
            work.push_back(n);
        }
    };
    for (const auto& p : d.outputs)
        visit(p.net);
    double units = 0;
    while (!work.empty()) {
        NetId n = work.back();
        work.pop_back();
        if (cell_of[n] >= 0) {
            const Cell& c = d.cells[static_cast<size_t>(cell_of[n])];
            units += cell_weight(d, c, facts);
            for (NetId in : c.in)
                visit(in);
        } else if (reg_of[n] >= 0) {
            const Register& r = d.registers[static_cast<size_t>(reg_of[n])];
            units += kRegisterBitWeight * r.width;
            visit(r.d);
        }
    }
    return area_for_units(units, capacity);
}

} // namespace ttvga
