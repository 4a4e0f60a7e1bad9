#include "random_design.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <sstream>

#include "ttvga/elab/elaborate.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/reference/interpreter.hpp"
#include "ttvga/sim/simulator.hpp"
#include "ttvga/vga/timing.hpp"

namespace ttvga::testing {

namespace {

struct Gen {
    std::string text;
    uint32_t width = 1;  // self-determined width
};

class ExprGen {
public:
    ExprGen(std::mt19937_64& rng, std::vector<Port> leaves) : rng_(rng), leaves_(std::move(leaves)) {}

    uint32_t pick(uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(rng_); }
    uint64_t bits(uint32_t width) { return rng_() & ((width >= 64) ? ~0ull : ((1ull << width) - 1)); }

    Gen constant(bool sized_only) {
        if (!sized_only && pick(3) == 0) {
            uint32_t v = pick(20);
            return {std::to_string(v), 32};
        }
        uint32_t w = 1 + pick(8);
        uint64_t v = bits(w);
        std::ostringstream os;
        switch (pick(3)) {
        case 0: os << w << "'d" << v; break;
        case 1: os << w << "'h" << std::hex << v; break;
        default: {
            os << w << "'b";
            for (int i = static_cast<int>(w) - 1; i >= 0; --i)
                os << ((v >> i) & 1);
        }
        }
        return {os.str(), w};
    }

    Gen leaf(bool sized_only) {
        if (leaves_.empty() || pick(5) == 0)
            return constant(sized_only);
        const Port& p = leaves_[pick(static_cast<uint32_t>(leaves_.size()))];
        if (p.width > 1) {
            switch (pick(6)) {
            case 0: {
                uint32_t lsb = pick(p.width);
                uint32_t msb = lsb + pick(p.width - lsb);
                return {p.name + "[" + std::to_string(msb) + ":" + std::to_string(lsb) + "]", msb - lsb + 1};
            }
            case 1:
                return {p.name + "[" + std::to_string(pick(p.width)) + "]", 1};
            case 2: {
                uint32_t w = 1 + pick(p.width);
                uint32_t start = pick(p.width - w + 1);
                return {p.name + "[" + std::to_string(start) + " +: " + std::to_string(w) + "]", w};
            }
            case 3: {
                // Dynamic bit select with an index that always stays in range.
                for (const auto& s : leaves_)
                    if (s.name != p.name && (1u << s.width) <= p.width)
                        return {p.name + "[" + s.name + "]", 1};
                break;
            }
            default: break;
            }
        }
        return {p.name, p.width};
    }

    Gen expr(int depth, bool sized_only = false) {
        if (depth <= 0 || pick(5) == 0)
            return leaf(sized_only);
        switch (pick(10)) {
        case 0: case 1: {
            static const char* ops[] = {"~", "-", "!", "&", "|", "^", "~&", "~|", "~^", "+"};
            uint32_t k = pick(10);
            Gen a = expr(depth - 1, sized_only);
            bool reduce = k >= 2 && k <= 8;
            return {"(" + std::string(ops[k]) + a.text + ")", reduce ? 1 : a.width};
        }
        case 2: {
            Gen c = expr(depth - 1);
            Gen a = expr(depth - 1, sized_only);
            Gen b = expr(depth - 1, sized_only);
            return {"(" + c.text + " ? " + a.text + " : " + b.text + ")", std::max(a.width, b.width)};
        }
        case 3: {
            std::vector<Gen> parts;
            uint32_t total = 0;
            uint32_t n = 2 + pick(2);
            for (uint32_t i = 0; i < n; ++i) {
                Gen g = expr(depth - 1, true);
                if (total + g.width > 32)
                    break;
                total += g.width;
                parts.push_back(g);
            }
            if (parts.empty())
                return leaf(true);
            if (pick(4) == 0 && total <= 10) {
                uint32_t r = 1 + pick(3);
                std::string inner;
                for (size_t i = 0; i < parts.size(); ++i)
                    inner += (i ? ", " : "") + parts[i].text;
                return {"{" + std::to_string(r) + "{" + inner + "}}", r * total};
            }
            std::string s = "{";
            for (size_t i = 0; i < parts.size(); ++i)
                s += (i ? ", " : "") + parts[i].text;
            return {s + "}", total};
        }
        default: {
            static const char* ops[] = {"+", "-", "*", "/", "%", "&", "|", "^", "~^", "<<",
                                        ">>", "==", "!=", "<", "<=", ">", ">=", "&&", "||"};
            uint32_t k = pick(19);
            Gen a = expr(depth - 1, sized_only);
            Gen b = expr(depth - 1, sized_only);
            uint32_t w = k >= 11 ? 1 : (k == 9 || k == 10) ? a.width : std::max(a.width, b.width);
            return {"(" + a.text + " " + ops[k] + " " + b.text + ")", w};
        }
        }
    }

    void add_leaf(Port p) { leaves_.push_back(std::move(p)); }
    const std::vector<Port>& leaves() const { return leaves_; }

private:
    std::mt19937_64& rng_;
    std::vector<Port> leaves_;
};

std::string range(uint32_t width) {
    return width == 1 ? "" : "[" + std::to_string(width - 1) + ":0] ";
}

uint32_t rand_in(std::mt19937_64& rng, uint32_t lo, uint32_t hi) {
    return std::uniform_int_distribution<uint32_t>(lo, hi)(rng);
}

/// A combinational always block: default assignment first (so no latch is
/// implied), then an if or a case that may override it.
std::string comb_block(ExprGen& g, const std::string& target, int depth) {
    std::string s = "  always @* begin\n";
    s += "    " + target + " = " + g.expr(depth).text + ";\n";
    if (g.pick(2) == 0) {
        s += "    if (" + g.expr(depth - 1).text + ")\n";
        s += "      " + target + " = " + g.expr(depth).text + ";\n";
        if (g.pick(2) == 0)
            s += "    else\n      " + target + " = " + g.expr(depth).text + ";\n";
    } else {
        Gen sel = g.expr(1);
        s += "    case (" + sel.text + ")\n";
        uint32_t items = 1 + g.pick(3);
        for (uint32_t i = 0; i < items; ++i)
            s += "      " + std::to_string(i) + ": " + target + " = " + g.expr(depth).text + ";\n";
        if (g.pick(2) == 0)
            s += "      default: " + target + " = " + g.expr(depth).text + ";\n";
        s += "    endcase\n";
    }
    return s + "  end\n";
}

} // namespace

RandomDesign random_combinational(std::mt19937_64& rng, uint32_t index, const CombLimits& limits) {
    RandomDesign d;
    d.top = "rc_" + std::to_string(index);
    uint32_t n_in = rand_in(rng, 1, limits.max_inputs);
    uint32_t budget = limits.max_total_input_bits;
    std::vector<Port> ports;
    for (uint32_t i = 0; i < n_in && budget > 0; ++i) {
        uint32_t reserve = n_in - i - 1;  // one bit for each input still to come
        uint32_t w = rand_in(rng, 1, std::max(1u, std::min(limits.max_input_width, budget - reserve)));
        budget -= w;
        ports.push_back({std::string(1, static_cast<char>('a' + i)), w});
    }
    d.inputs = ports;
    ExprGen g(rng, ports);

    std::string header = "module " + d.top + "(";
    std::string body;
    for (const auto& p : ports)
        header += "input " + range(p.width) + p.name + ", ";

    uint32_t n_tmp = rand_in(rng, 0, 3);
    for (uint32_t i = 0; i < n_tmp; ++i) {
        Port t{"t" + std::to_string(i), rand_in(rng, 1, 12)};
        if (g.pick(3) == 0) {
            body += "  reg " + range(t.width) + t.name + ";\n" + comb_block(g, t.name, 3);
        } else {
            body += "  wire " + range(t.width) + t.name + " = " + g.expr(3).text + ";\n";
        }
        g.add_leaf(t);
        d.observed.push_back(t.name);
    }
    if (g.pick(4) == 0) {
        // Constant-bound loop folding one input into an accumulator.
        const Port& src = ports[g.pick(static_cast<uint32_t>(ports.size()))];
        body += "  integer i;\n  reg [7:0] acc;\n  always @* begin\n    acc = 8'd0;\n";
        body += "    for (i = 0; i < " + std::to_string(src.width) + "; i = i + 1)\n";
        body += "      acc = acc + (" + src.name + " >> i) + i;\n  end\n";
        g.add_leaf({"acc", 8});
        d.observed.push_back("acc");
    }
    uint32_t n_out = rand_in(rng, 1, 3);
    for (uint32_t i = 0; i < n_out; ++i) {
        Port y{"y" + std::to_string(i), rand_in(rng, 1, 16)};
        header += "output " + range(y.width) + y.name + (i + 1 < n_out ? ", " : "");
        body += "  assign " + y.name + " = " + g.expr(4).text + ";\n";
        d.observed.push_back(y.name);
    }
    d.source = header + ");\n" + body + "endmodule\n";
    return d;
}

RandomDesign random_sequential(std::mt19937_64& rng, uint32_t index, const SeqLimits& limits) {
    RandomDesign d;
    d.sequential = true;
    d.top = "rs_" + std::to_string(index);
    uint32_t n_in = rand_in(rng, 1, limits.max_inputs);
    std::vector<Port> ports;
    for (uint32_t i = 0; i < n_in; ++i)
        ports.push_back({std::string(1, static_cast<char>('a' + i)), rand_in(rng, 1, limits.max_width)});
    d.inputs = ports;

    uint32_t n_reg = rand_in(rng, 1, limits.max_registers);
    std::vector<Port> regs;
    for (uint32_t i = 0; i < n_reg; ++i)
        regs.push_back({"r" + std::to_string(i), rand_in(rng, 1, limits.max_width)});
    std::vector<Port> leaves = ports;
    leaves.insert(leaves.end(), regs.begin(), regs.end());
    ExprGen g(rng, leaves);

    std::string header = "module " + d.top + "(input clk, input rst_n, ";
    for (const auto& p : ports)
        header += "input " + range(p.width) + p.name + ", ";
    std::string body;
    for (const auto& r : regs) {
        body += "  reg " + range(r.width) + r.name + ";\n";
        d.observed.push_back(r.name);
    }

    // Registers are split over one or two clocked blocks; some skip the reset.
    uint32_t split = g.pick(2) == 0 ? n_reg : rand_in(rng, 1, n_reg);
    auto block = [&](uint32_t lo, uint32_t hi) {
        if (lo >= hi)
            return;
        bool with_reset = g.pick(5) != 0;
        std::string s = "  always @(posedge clk) begin\n";
        std::string indent = "    ";
        if (with_reset) {
            s += "    if (!rst_n) begin\n";
            for (uint32_t i = lo; i < hi; ++i)
                s += "      " + regs[i].name + " <= " + std::to_string(g.bits(regs[i].width)) + ";\n";
            s += "    end else begin\n";
            indent = "      ";
        }
        for (uint32_t i = lo; i < hi; ++i) {
            const std::string& r = regs[i].name;
            switch (g.pick(4)) {
            case 0:
                s += indent + "if (" + g.expr(2).text + ")\n";
                s += indent + "  " + r + " <= " + g.expr(3).text + ";\n";
                if (g.pick(2) == 0)
                    s += indent + "else\n" + indent + "  " + r + " <= " + g.expr(3).text + ";\n";
                break;
            case 1: {
                s += indent + "case (" + g.expr(1).text + ")\n";
                uint32_t items = 1 + g.pick(3);
                for (uint32_t k = 0; k < items; ++k)
                    s += indent + "  " + std::to_string(k) + ": " + r + " <= " + g.expr(3).text + ";\n";
                s += indent + "  default: " + r + " <= " + g.expr(3).text + ";\n";
                s += indent + "endcase\n";
                break;
            }
            case 2:
                if (regs[i].width > 1) {
                    // Part-select target: only the low bits change.
                    uint32_t lsb = g.pick(regs[i].width - 1);
                    s += indent + r + "[" + std::to_string(regs[i].width - 1) + ":" + std::to_string(lsb) +
                         "] <= " + g.expr(3).text + ";\n";
                    break;
                }
                [[fallthrough]];
            default:
                s += indent + r + " <= " + g.expr(3).text + ";\n";
            }
        }
        if (with_reset)
            s += "    end\n";
        body += s + "  end\n";
    };
    block(0, split);
    block(split, n_reg);

    if (g.pick(3) == 0) {
        Port t{"w0", rand_in(rng, 1, 12)};
        body += "  wire " + range(t.width) + t.name + " = " + g.expr(3).text + ";\n";
        g.add_leaf(t);
        d.observed.push_back(t.name);
    }
    uint32_t n_out = rand_in(rng, 1, 2);
    for (uint32_t i = 0; i < n_out; ++i) {
        Port y{"y" + std::to_string(i), rand_in(rng, 1, 16)};
        header += "output " + range(y.width) + y.name + (i + 1 < n_out ? ", " : "");
        body += "  assign " + y.name + " = " + g.expr(3).text + ";\n";
        d.observed.push_back(y.name);
    }
    d.source = header + ");\n" + body + "endmodule\n";
    return d;
}

namespace {

struct Engines {
    Ast ast;
    Simulator sim;
    reference::Interpreter ref;
};

Ast parse_or_throw(const std::string& text) {
    ParseResult pr = parse(text);
    if (!pr.ok())
        throw std::runtime_error("generated design does not parse: " + format_diagnostic(pr.errors.front()));
    return std::move(*pr.ast);
}

std::string describe(const RandomDesign& d, const std::string& what) {
    return what + "\n--- design ---\n" + d.source;
}

} // namespace

std::optional<std::string> compare_combinational(const RandomDesign& design) {
    try {
        Ast ast = parse_or_throw(design.source);
        Simulator sim(elaborate(ast, design.top, standard_library()));
        reference::Interpreter ref(ast, design.top, standard_library());
        uint32_t total = 0;
        for (const auto& p : design.inputs)
            total += p.width;
        for (uint64_t v = 0; v < (1ull << total); ++v) {
            uint64_t rest = v;
            std::string inputs;
            for (const auto& p : design.inputs) {
                uint64_t x = rest & width_mask(p.width);
                rest >>= p.width;
                sim.poke(p.name, x);
                ref.poke(p.name, x);
                inputs += p.name + "=" + std::to_string(x) + " ";
            }
            for (const auto& name : design.observed) {
                uint64_t a = sim.peek(name).bits;
                uint64_t b = ref.peek(name);
                if (a != b)
                    return describe(design, "inputs " + inputs + ": " + name + " is " + std::to_string(a) +
                                                " in the simulator, " + std::to_string(b) + " in the reference");
            }
        }
    } catch (const std::exception& e) {
        return describe(design, std::string("exception: ") + e.what());
    }
    return std::nullopt;
}

namespace {

template <typename Poke, typename Step, typename Observe>
std::optional<std::string> drive_trace(const RandomDesign& design, uint64_t seed, uint32_t cycles, Poke poke,
                                       Step step, Observe observe) {
    std::mt19937_64 rng(seed);
    poke("rst_n", 0);
    step();
    poke("rst_n", 1);
    for (uint32_t c = 0; c < cycles; ++c) {
        for (const auto& p : design.inputs)
            if (rng() % 3 == 0)
                poke(p.name, rng() & width_mask(p.width));
        if (rng() % 97 == 0)
            poke("rst_n", 0);
        else
            poke("rst_n", 1);
        if (auto diff = observe(c, "before edge"))
            return diff;
        step();
        if (auto diff = observe(c, "after edge"))
            return diff;
    }
    return std::nullopt;
}

} // namespace

std::optional<std::string> compare_sequential(const RandomDesign& design, uint64_t seed, uint32_t cycles) {
    try {
        Ast ast = parse_or_throw(design.source);
        Simulator sim(elaborate(ast, design.top, standard_library()));
        reference::Interpreter ref(ast, design.top, standard_library());
        auto poke = [&](const std::string& n, uint64_t v) {
            sim.poke(n, v);
            ref.poke(n, v);
        };
        auto step = [&] {
            sim.step(1);
            ref.step(1);
        };
        auto observe = [&](uint32_t c, const char* when) -> std::optional<std::string> {
            for (const auto& name : design.observed) {
                uint64_t a = sim.peek(name).bits;
                uint64_t b = ref.peek(name);
                if (a != b)
                    return describe(design, "cycle " + std::to_string(c) + " " + when + ": " + name + " is " +
                                                std::to_string(a) + " in the simulator, " + std::to_string(b) +
                                                " in the reference");
            }
            return std::nullopt;
        };
        return drive_trace(design, seed, cycles, poke, step, observe);
    } catch (const std::exception& e) {
        return describe(design, std::string("exception: ") + e.what());
    }
}

std::optional<std::string> compare_commit_orders(const RandomDesign& design, uint64_t seed, uint32_t cycles) {
    try {
        Ast ast = parse_or_throw(design.source);
        ElaboratedDesign elab = elaborate(ast, design.top, standard_library());
        std::vector<std::vector<uint64_t>> traces[2];
        for (int run = 0; run < 2; ++run) {
            Simulator sim(elab);
            if (run == 1) {
                std::vector<uint32_t> order(elab.registers.size());
                std::iota(order.begin(), order.end(), 0u);
                std::mt19937_64 shuffle_rng(seed ^ 0x9e3779b97f4a7c15ull);
                std::shuffle(order.begin(), order.end(), shuffle_rng);
                sim.set_commit_order(order);
            }
            auto poke = [&](const std::string& n, uint64_t v) { sim.poke(n, v); };
            auto step = [&] { sim.step(1); };
            auto observe = [&](uint32_t, const char*) -> std::optional<std::string> {
                std::vector<uint64_t> row;
                for (const auto& name : design.observed)
                    row.push_back(sim.peek(name).bits);
                traces[run].push_back(std::move(row));
                return std::nullopt;
            };
            drive_trace(design, seed, cycles, poke, step, observe);
        }
        for (size_t i = 0; i < traces[0].size(); ++i)
            if (traces[0][i] != traces[1][i])
                return describe(design, "trace differs at sample " + std::to_string(i));
    } catch (const std::exception& e) {
        return describe(design, std::string("exception: ") + e.what());
    }
    return std::nullopt;
}

} // namespace ttvga::testing
