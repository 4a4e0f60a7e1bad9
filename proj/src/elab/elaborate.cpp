#include "ttvga/elab/elaborate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "ttvga/elab/cell_eval.hpp"
#include "ttvga/frontend/lint.hpp"

namespace ttvga {

void finalize_design(ElaboratedDesign& design);  // optimize.cpp

namespace {

struct Value {
    bool is_const = true;
    uint64_t k = 0;
    NetId net = kNoNet;
    uint32_t width = 1;

    bool operator==(const Value&) const = default;
};

enum class DriverKind { None, Assign, Comb, Seq };

struct Partial {
    uint32_t lsb = 0;
    uint32_t width = 0;
    Value value;
};

struct Signal {
    std::string name;
    uint32_t width = 1;
    int64_t lsb = 0;
    NetId net = kNoNet;
    bool top_input = false;
    bool is_input_port = false;
    DriverKind kind = DriverKind::None;
    std::vector<Partial> partials;
    std::optional<Value> next;
    uint64_t reset_value = 0;
    NetId hold = kNoNet;
    Span span;
};

struct ParamValue {
    uint64_t value = 0;
    uint32_t width = 32;
    bool local = false;
};

struct Scope {
    std::string prefix;
    const Module* module = nullptr;
    std::map<std::string, ParamValue> params;
    std::map<std::string, size_t> signals;
    std::map<std::string, uint64_t> loop_vars;
};

struct ExecState {
    std::map<size_t, Value> env;
    std::map<size_t, Value> nb;
};

class Elaborator {
public:
    Elaborator(const Ast& ast, const BuiltinLibrary& lib, const ElaborateOptions& opts)
        : ast_(ast), lib_(lib), opts_(opts) {}

    ElaboratedDesign run(std::string_view top) {
        bool builtin = false;
        const Module* m = resolve(top, builtin);
        if (!m)
            throw ElaborationError(elab_code::kUnknownTop,
                                   "There is no module named '" + std::string(top) + "' to use as the top of the design.");
        d_.top = std::string(top);
        Scope scope;
        scope.module = m;
        eval_params(*m, scope, nullptr, nullptr);
        declare_signals(*m, scope, true);
        elaborate_items(*m, scope, 0);
        finalize_signals();
        finalize_design(d_);
        return std::move(d_);
    }

private:
    // ---- helpers -----------------------------------------------------------

    [[noreturn]] void fail(const char* code, std::string message, Span span = {}, std::vector<std::string> nets = {}) {
        throw ElaborationError(code, std::move(message), span, std::move(nets));
    }

    const Module* resolve(std::string_view name, bool& builtin) const {
        if (const Module* m = ast_.find(name)) {
            builtin = false;
            return m;
        }
        builtin = true;
        return lib_.find(name);
    }

    NetId new_net(uint32_t width, std::string name = {}) {
        d_.nets.push_back(Net{std::move(name), width});
        return static_cast<NetId>(d_.nets.size() - 1);
    }

    static Value konst(uint64_t k, uint32_t w) { return Value{true, k & width_mask(w), kNoNet, w}; }
    static Value of_net(NetId n, uint32_t w) { return Value{false, 0, n, w}; }

    uint32_t net_width(const Value& v) const { return v.is_const ? v.width : d_.nets[v.net].width; }

    NetId const_net(uint64_t k, uint32_t w) {
        auto key = std::make_pair(k & width_mask(w), w);
        auto it = const_cache_.find(key);
        if (it != const_cache_.end())
            return it->second;
        NetId out = new_net(w);
        Cell c;
        c.kind = CellKind::Const;
        c.width = w;
        c.out = out;
        c.value = key.first;
        d_.cells.push_back(c);
        const_cache_.emplace(key, out);
        return out;
    }

    NetId net_of(const Value& v) { return v.is_const ? const_net(v.k, v.width) : v.net; }

    Value cell(CellKind kind, uint32_t w, const Value& a, std::optional<Value> b = std::nullopt,
               std::optional<Value> c = std::nullopt, uint32_t param = 0) {
        if (w == 0 || w > 64)
            fail(elab_code::kWidth, "An expression is " + std::to_string(w) +
                                        " bits wide; values must be between 1 and 64 bits.");
        bool all_const = a.is_const && (!b || b->is_const) && (!c || c->is_const);
        if (kind == CellKind::Mux && a.is_const)
            return resize(a.k != 0 ? *b : *c, w);
        if (all_const) {
            uint64_t r = eval_cell(kind, w, param, 0, a.k, b ? b->k : 0, c ? c->k : 0, param, nullptr);
            // Constant division by zero follows the same all-ones rule as simulation.
            return konst(r, w);
        }
        Cell cl;
        cl.kind = kind;
        cl.width = w;
        cl.param = param;
        cl.in[0] = net_of(a);
        if (b)
            cl.in[1] = net_of(*b);
        if (c)
            cl.in[2] = net_of(*c);
        cl.out = new_net(w);
        d_.cells.push_back(cl);
        return of_net(cl.out, w);
    }

    Value trunc(const Value& v, uint32_t w) {
        if (v.is_const)
            return konst(v.k, w);
        if (net_width(v) > w)
            return cell(CellKind::Slice, w, v, std::nullopt, std::nullopt, 0);
        return of_net(v.net, w);
    }

    Value resize(const Value& v, uint32_t w) {
        if (w < v.width)
            return trunc(v, w);
        if (v.is_const)
            return konst(v.k, w);
        return of_net(v.net, w);
    }

    /// A net of exactly width `w` carrying `v`.
    NetId fit_net(const Value& v, uint32_t w) {
        if (v.is_const)
            return const_net(v.k, w);
        uint32_t nw = net_width(v);
        if (nw == w)
            return v.net;
        if (nw > w)
            return cell(CellKind::Slice, w, v, std::nullopt, std::nullopt, 0).net;
        Cell cl;
        cl.kind = CellKind::Buf;
        cl.width = w;
        cl.in[0] = v.net;
        cl.out = new_net(w);
        d_.cells.push_back(cl);
        return cl.out;
    }

    Value concat2(const Value& hi, uint32_t hw, const Value& lo, uint32_t lw) {
        if (hw + lw > 64)
            fail(elab_code::kWidth, "A concatenation is wider than 64 bits, which is not supported.");
        return cell(CellKind::Concat, hw + lw, trunc(hi, hw), trunc(lo, lw), std::nullopt, lw);
    }

    // ---- scopes --------------------------------------------------------------

    void eval_params(const Module& m, Scope& scope, const Instance* inst, const Scope* parent) {
        std::vector<const ParamDecl*> decls;
        for (const auto& p : m.header_params)
            decls.push_back(&p);
        for (const auto& item : m.items)
            if (auto* p = std::get_if<ParamDecl>(&item))
                decls.push_back(p);

        std::map<std::string, std::pair<uint64_t, uint32_t>> overrides;
        if (inst) {
            std::vector<const ParamDecl*> overridable;
            for (auto* p : decls)
                if (!p->local)
                    overridable.push_back(p);
            for (size_t i = 0; i < inst->params.size(); ++i) {
                const Connection& c = inst->params[i];
                std::string name;
                if (c.name.empty()) {
                    if (i >= overridable.size())
                        fail(elab_code::kParamOverride,
                             "Instance '" + inst->instance_name + "' sets more parameters than module '" + m.name +
                                 "' has.",
                             c.span);
                    name = overridable[i]->name;
                } else {
                    name = c.name;
                    auto found = std::find_if(decls.begin(), decls.end(), [&](auto* p) { return p->name == name; });
                    if (found == decls.end())
                        fail(elab_code::kParamOverride,
                             "Module '" + m.name + "' has no parameter named '" + name + "'.", c.span);
                    if ((*found)->local)
                        fail(elab_code::kParamOverride,
                             "'" + name + "' is a localparam of module '" + m.name + "' and cannot be changed.",
                             c.span);
                }
                if (!c.expr)
                    continue;
                Scope& ps = const_cast<Scope&>(*parent);
                uint32_t w = self_width(*c.expr, ps);
                Value v = lower(*c.expr, w, ps);
                if (!v.is_const)
                    fail(elab_code::kParamOverride,
                         "The value given for parameter '" + name + "' must be a constant number, not a signal.",
                         c.span);
                overrides[name] = {v.k, w};
            }
        }

        for (auto* p : decls) {
            ParamValue pv;
            pv.local = p->local;
            std::optional<uint32_t> range_w;
            if (p->range)
                range_w = range_width(*p->range, scope, p->span);
            auto ov = overrides.find(p->name);
            if (ov != overrides.end()) {
                pv.width = range_w.value_or(std::max<uint32_t>(ov->second.second, 1));
                pv.value = ov->second.first & width_mask(pv.width);
            } else {
                uint32_t sw = self_width(p->value, scope);
                pv.width = range_w.value_or(sw);
                Value v = lower(p->value, std::max(sw, pv.width), scope);
                if (!v.is_const)
                    fail(elab_code::kNotConstant,
                         "Parameter '" + p->name + "' must be a constant value, but it uses a signal.", p->span);
                pv.value = v.k & width_mask(pv.width);
            }
            scope.params[p->name] = pv;
        }
    }

    uint32_t range_width(const RangeDecl& r, Scope& scope, Span span) {
        int64_t msb = static_cast<int64_t>(const_eval(r.msb, scope));
        int64_t lsb = static_cast<int64_t>(const_eval(r.lsb, scope));
        if (msb < lsb)
            fail(elab_code::kUnsupported,
                 "Bit ranges must be written high-to-low, like [7:0]; ascending ranges like [0:7] are not supported.",
                 span);
        int64_t w = msb - lsb + 1;
        if (w > 64)
            fail(elab_code::kWidth, "Signals can be at most 64 bits wide; this one is " + std::to_string(w) + ".", span);
        return static_cast<uint32_t>(w);
    }

    size_t add_signal(Scope& scope, const std::string& name, uint32_t width, int64_t lsb, Span span) {
        Signal s;
        s.name = scope.prefix + name;
        s.width = width;
        s.lsb = lsb;
        s.span = span;
        s.net = new_net(width, s.name);
        sigs_.push_back(std::move(s));
        size_t idx = sigs_.size() - 1;
        scope.signals[name] = idx;
        d_.signals[sigs_[idx].name] = sigs_[idx].net;
        return idx;
    }

    std::pair<uint32_t, int64_t> decl_shape(const std::optional<RangeDecl>& range, NetType type, Scope& scope, Span span) {
        if (type == NetType::Integer)
            return {32, 0};
        if (type == NetType::Real)
            fail(elab_code::kUnsupported, "'real' values cannot be simulated or built. Use a reg with a bit width.", span);
        if (!range)
            return {1, 0};
        uint32_t w = range_width(*range, scope, span);
        return {w, static_cast<int64_t>(const_eval(range->lsb, scope))};
    }

    void declare_signals(const Module& m, Scope& scope, bool is_top) {
        for (const auto& p : m.ports) {
            if (p.dir == Direction::Inout)
                fail(elab_code::kUnsupported,
                     "inout port '" + p.name + "' is not supported. Use separate input and output ports.", p.span);
            auto [w, lsb] = decl_shape(p.range, p.type, scope, p.span);
            if (scope.signals.count(p.name))
                fail(elab_code::kBadPort, "Port '" + p.name + "' is declared twice.", p.span);
            size_t idx = add_signal(scope, p.name, w, lsb, p.span);
            sigs_[idx].is_input_port = p.dir == Direction::Input;
            if (is_top) {
                if (p.dir == Direction::Input) {
                    sigs_[idx].top_input = true;
                    d_.inputs.push_back(PortInfo{p.name, sigs_[idx].net, w});
                } else {
                    d_.outputs.push_back(PortInfo{p.name, sigs_[idx].net, w});
                }
            }
        }
        std::set<std::string> non_ansi_ports;
        if (!m.ansi)
            for (const auto& p : m.ports)
                non_ansi_ports.insert(p.name);
        for (const auto& item : m.items) {
            auto* n = std::get_if<NetDecl>(&item);
            if (!n)
                continue;
            if (non_ansi_ports.count(n->name)) {
                // `output [9:0] hpos; reg [9:0] hpos;` declares one signal.
                auto [w, lsb] = decl_shape(n->range, n->type, scope, n->span);
                const Signal& s = sigs_[scope.signals.at(n->name)];
                if (w != s.width)
                    fail(elab_code::kWidth,
                         "'" + n->name + "' is declared with two different widths (" + std::to_string(s.width) +
                             " and " + std::to_string(w) + " bits).",
                         n->span);
                non_ansi_ports.erase(n->name);
                continue;
            }
            if (scope.signals.count(n->name) || scope.params.count(n->name))
                fail(elab_code::kBadAssign, "The name '" + n->name + "' is declared more than once.", n->span);
            auto [w, lsb] = decl_shape(n->range, n->type, scope, n->span);
            add_signal(scope, n->name, w, lsb, n->span);
        }
    }

    // ---- expression widths and lowering -----------------------------------

    const Signal* find_signal(const std::string& name, Scope& scope) const {
        auto it = scope.signals.find(name);
        return it == scope.signals.end() ? nullptr : &sigs_[it->second];
    }

    [[noreturn]] void undeclared(const Expr& e, Scope& scope) {
        if (e.is_hierarchical())
            fail(elab_code::kUnsupported,
                 "'" + e.name + "' reaches into another module; pass the value through a port instead.", e.span);
        fail(elab_code::kUndeclared,
             "'" + e.name + "' is used but never declared in module '" + scope.module->name +
                 "'. Fix: declare it with wire or reg, or check the spelling.",
             e.span);
    }

    uint64_t const_eval(const Expr& e, Scope& scope) {
        Value v = lower(e, self_width(e, scope), scope);
        if (!v.is_const)
            fail(elab_code::kNotConstant, "This value must be a constant number, but it depends on a signal.", e.span);
        return v.k;
    }

    uint32_t self_width(const Expr& e, Scope& scope) {
        uint32_t w = self_width_impl(e, scope);
        if (w == 0 || w > 64)
            fail(elab_code::kWidth, "This expression is " + std::to_string(w) +
                                        " bits wide; values must be between 1 and 64 bits.", e.span);
        return w;
    }

    uint32_t self_width_impl(const Expr& e, Scope& scope) {
        switch (e.kind) {
        case ExprKind::Number:
            return e.width;
        case ExprKind::Ident: {
            if (scope.loop_vars.count(e.name)) {
                const Signal* s = find_signal(e.name, scope);
                return s ? s->width : 32;
            }
            if (auto it = scope.params.find(e.name); it != scope.params.end())
                return it->second.width;
            if (const Signal* s = find_signal(e.name, scope))
                return s->width;
            undeclared(e, scope);
        }
        case ExprKind::Index:
            return 1;
        case ExprKind::Range: {
            int64_t msb = static_cast<int64_t>(const_eval(e.args[1], scope));
            int64_t lsb = static_cast<int64_t>(const_eval(e.args[2], scope));
            if (msb < lsb)
                fail(elab_code::kUnsupported, "Part selects must be written high-to-low, like x[7:4].", e.span);
            return static_cast<uint32_t>(std::min<int64_t>(msb - lsb + 1, 65));
        }
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown:
            return static_cast<uint32_t>(std::min<uint64_t>(const_eval(e.args[2], scope), 65));
        case ExprKind::Unary:
            if (e.op == Op::Plus || e.op == Op::Neg || e.op == Op::BitNot)
                return self_width(e.args[0], scope);
            return 1;
        case ExprKind::Binary:
            switch (e.op) {
            case Op::Shl: case Op::Shr: case Op::AShl: case Op::AShr: case Op::Pow:
                return self_width(e.args[0], scope);
            case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne: case Op::CaseEq:
            case Op::CaseNe: case Op::LogAnd: case Op::LogOr:
                return 1;
            default:
                return std::max(self_width(e.args[0], scope), self_width(e.args[1], scope));
            }
        case ExprKind::Ternary:
            return std::max(self_width(e.args[1], scope), self_width(e.args[2], scope));
        case ExprKind::Concat: {
            uint32_t sum = 0;
            for (const auto& a : e.args)
                sum += self_width(a, scope);
            return std::min<uint32_t>(sum, 65);
        }
        case ExprKind::Replicate: {
            uint64_t n = const_eval(e.args[0], scope);
            uint64_t w = n * self_width(e.args[1], scope);
            return static_cast<uint32_t>(std::min<uint64_t>(w, 65));
        }
        case ExprKind::Call:
            if (e.name == "$clog2")
                return 32;
            if (e.name == "$unsigned" && e.args.size() == 1)
                return self_width(e.args[0], scope);
            fail(elab_code::kUnsupported, "The function '" + e.name + "' is not supported.", e.span);
        }
        return 1;
    }

    Value lower(const Expr& e, uint32_t w, Scope& scope) {
        uint32_t sw = self_width(e, scope);
        if (w < sw)
            return trunc(lower_impl(e, sw, scope), w);
        return lower_impl(e, w, scope);
    }

    Value read_signal(size_t idx) {
        if (state_) {
            if (auto it = state_->env.find(idx); it != state_->env.end())
                return it->second;
        }
        return of_net(sigs_[idx].net, sigs_[idx].width);
    }

    /// Bit position `index - decl_lsb` as a value.
    Value bit_position(const Value& index, int64_t decl_lsb) {
        if (decl_lsb == 0)
            return index;
        if (index.is_const)
            return konst(index.k - static_cast<uint64_t>(decl_lsb), 64);
        return cell(CellKind::Sub, 64, resize(index, 64), konst(static_cast<uint64_t>(decl_lsb), 64));
    }

    Value select(const Expr& base, const Value& start, uint32_t width, Scope& scope, Span span) {
        if (base.kind != ExprKind::Ident)
            fail(elab_code::kUnsupported, "Bit selects are only supported directly on a signal name.", span);
        Value src;
        int64_t decl_lsb = 0;
        uint32_t src_w = 0;
        if (scope.loop_vars.count(base.name)) {
            src = konst(scope.loop_vars.at(base.name), 32);
            src_w = 32;
        } else if (auto it = scope.params.find(base.name); it != scope.params.end()) {
            src = konst(it->second.value, it->second.width);
            src_w = it->second.width;
        } else if (auto sit = scope.signals.find(base.name); sit != scope.signals.end()) {
            src = read_signal(sit->second);
            decl_lsb = sigs_[sit->second].lsb;
            src_w = sigs_[sit->second].width;
        } else {
            undeclared(base, scope);
        }
        Value pos = bit_position(start, decl_lsb);
        if (pos.is_const) {
            int64_t p = static_cast<int64_t>(pos.k);
            if (decl_lsb != 0)
                p = static_cast<int64_t>(start.k) - decl_lsb;
            if (p < 0 || p >= static_cast<int64_t>(src_w))
                return konst(0, width);
            return cell(CellKind::Slice, width, src, std::nullopt, std::nullopt, static_cast<uint32_t>(p));
        }
        Value shifted = cell(CellKind::Shr, src_w, src, pos);
        return cell(CellKind::Slice, width, shifted, std::nullopt, std::nullopt, 0);
    }

    Value lower_impl(const Expr& e, uint32_t w, Scope& scope) {
        switch (e.kind) {
        case ExprKind::Number:
            return konst(e.value, w);
        case ExprKind::Ident: {
            if (auto it = scope.loop_vars.find(e.name); it != scope.loop_vars.end())
                return konst(it->second, w);
            if (auto it = scope.params.find(e.name); it != scope.params.end())
                return konst(it->second.value, w);
            if (auto it = scope.signals.find(e.name); it != scope.signals.end())
                return resize(read_signal(it->second), w);
            undeclared(e, scope);
        }
        case ExprKind::Index: {
            Value idx = lower(e.args[1], self_width(e.args[1], scope), scope);
            return resize(select(e.args[0], idx, 1, scope, e.span), w);
        }
        case ExprKind::Range: {
            uint64_t msb = const_eval(e.args[1], scope);
            uint64_t lsb = const_eval(e.args[2], scope);
            uint32_t sw = static_cast<uint32_t>(msb - lsb + 1);
            return resize(select(e.args[0], konst(lsb, 64), sw, scope, e.span), w);
        }
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown: {
            uint32_t sw = static_cast<uint32_t>(const_eval(e.args[2], scope));
            Value start = lower(e.args[1], self_width(e.args[1], scope), scope);
            if (e.kind == ExprKind::IndexedDown)
                start = start.is_const ? konst(start.k - sw + 1, 64)
                                       : cell(CellKind::Sub, 64, resize(start, 64), konst(sw - 1, 64));
            return resize(select(e.args[0], start, sw, scope, e.span), w);
        }
        case ExprKind::Unary: {
            const Expr& a = e.args[0];
            switch (e.op) {
            case Op::Plus: return lower(a, w, scope);
            case Op::Neg: return cell(CellKind::Neg, w, lower(a, w, scope));
            case Op::BitNot: return cell(CellKind::Not, w, lower(a, w, scope));
            default: break;
            }
            uint32_t aw = self_width(a, scope);
            Value av = lower(a, aw, scope);
            Value r;
            switch (e.op) {
            case Op::LogNot: r = cell(CellKind::LogNot, 1, av); break;
            case Op::RedAnd: r = cell(CellKind::RedAnd, 1, av, std::nullopt, std::nullopt, aw); break;
            case Op::RedNand: r = cell(CellKind::LogNot, 1, cell(CellKind::RedAnd, 1, av, std::nullopt, std::nullopt, aw)); break;
            case Op::RedOr: r = cell(CellKind::RedOr, 1, av); break;
            case Op::RedNor: r = cell(CellKind::LogNot, 1, av); break;
            case Op::RedXor: r = cell(CellKind::RedXor, 1, av); break;
            case Op::RedXnor: r = cell(CellKind::LogNot, 1, cell(CellKind::RedXor, 1, av)); break;
            default: fail(elab_code::kUnsupported, "Unsupported unary operator.", e.span);
            }
            return resize(r, w);
        }
        case ExprKind::Binary: {
            const Expr& a = e.args[0];
            const Expr& b = e.args[1];
            auto same = [&](CellKind k) { return cell(k, w, lower(a, w, scope), lower(b, w, scope)); };
            switch (e.op) {
            case Op::Add: return same(CellKind::Add);
            case Op::Sub: return same(CellKind::Sub);
            case Op::Mul: return same(CellKind::Mul);
            case Op::Div: return same(CellKind::Div);
            case Op::Mod: return same(CellKind::Mod);
            case Op::BitAnd: return same(CellKind::And);
            case Op::BitOr: return same(CellKind::Or);
            case Op::BitXor: return same(CellKind::Xor);
            case Op::BitXnor: return same(CellKind::Xnor);
            case Op::Shl:
            case Op::AShl:
                return cell(CellKind::Shl, w, lower(a, w, scope), lower(b, self_width(b, scope), scope));
            case Op::Shr:
            case Op::AShr:
                return cell(CellKind::Shr, w, lower(a, w, scope), lower(b, self_width(b, scope), scope));
            case Op::Pow: {
                Value base = lower(a, w, scope);
                Value exp = lower(b, self_width(b, scope), scope);
                if (!base.is_const || !exp.is_const)
                    fail(elab_code::kUnsupported, "The ** operator only works on constant numbers.", e.span);
                uint64_t r = 1;
                for (uint64_t i = 0; i < exp.k && i < 128; ++i)
                    r *= base.k;
                return konst(r, w);
            }
            case Op::LogAnd:
            case Op::LogOr: {
                Value av = lower(a, self_width(a, scope), scope);
                Value bv = lower(b, self_width(b, scope), scope);
                return resize(cell(e.op == Op::LogAnd ? CellKind::LogAnd : CellKind::LogOr, 1, av, bv), w);
            }
            default: {
                uint32_t ow = std::max(self_width(a, scope), self_width(b, scope));
                Value av = lower(a, ow, scope);
                Value bv = lower(b, ow, scope);
                CellKind k = CellKind::Eq;
                switch (e.op) {
                case Op::Lt: k = CellKind::Lt; break;
                case Op::Le: k = CellKind::Le; break;
                case Op::Gt: k = CellKind::Gt; break;
                case Op::Ge: k = CellKind::Ge; break;
                case Op::Eq: case Op::CaseEq: k = CellKind::Eq; break;
                case Op::Ne: case Op::CaseNe: k = CellKind::Ne; break;
                default: fail(elab_code::kUnsupported, "Unsupported operator.", e.span);
                }
                return resize(cell(k, 1, av, bv), w);
            }
            }
        }
        case ExprKind::Ternary: {
            Value c = lower(e.args[0], self_width(e.args[0], scope), scope);
            if (c.is_const)
                return lower(c.k != 0 ? e.args[1] : e.args[2], w, scope);
            return cell(CellKind::Mux, w, c, lower(e.args[1], w, scope), lower(e.args[2], w, scope));
        }
        case ExprKind::Concat: {
            uint32_t total = self_width(e, scope);
            if (total > 64)
                fail(elab_code::kWidth, "A concatenation is wider than 64 bits, which is not supported.", e.span);
            Value acc;
            uint32_t acc_w = 0;
            for (size_t i = e.args.size(); i-- > 0;) {
                uint32_t aw = self_width(e.args[i], scope);
                Value v = lower(e.args[i], aw, scope);
                if (acc_w == 0) {
                    acc = v;
                    acc_w = aw;
                } else {
                    acc = concat2(v, aw, acc, acc_w);
                    acc_w += aw;
                }
            }
            return resize(acc, w);
        }
        case ExprKind::Replicate: {
            uint64_t n = const_eval(e.args[0], scope);
            if (n == 0)
                fail(elab_code::kWidth, "A replication count must be at least 1.", e.span);
            uint32_t iw = self_width(e.args[1], scope);
            if (n * iw > 64)
                fail(elab_code::kWidth, "This replication is wider than 64 bits, which is not supported.", e.span);
            Value inner = lower(e.args[1], iw, scope);
            Value acc = inner;
            uint32_t acc_w = iw;
            for (uint64_t i = 1; i < n; ++i) {
                acc = concat2(inner, iw, acc, acc_w);
                acc_w += iw;
            }
            return resize(acc, w);
        }
        case ExprKind::Call: {
            if (e.name == "$unsigned")
                return lower(e.args[0], w, scope);
            if (e.name == "$clog2" && e.args.size() == 1) {
                uint64_t v = const_eval(e.args[0], scope);
                uint64_t r = 0;
                while ((r < 64) && ((1ull << r) < v))
                    ++r;
                return konst(r, w);
            }
            fail(elab_code::kUnsupported, "The function '" + e.name + "' is not supported.", e.span);
        }
        }
        return konst(0, w);
    }

    Value lower_assign(const Expr& rhs, uint32_t target_w, Scope& scope) {
        uint32_t sw = self_width(rhs, scope);
        Value v = lower(rhs, std::max(sw, target_w), scope);
        return trunc(v, target_w);
    }

    // ---- lvalues -----------------------------------------------------------

    size_t lvalue_signal(const Expr& base, Scope& scope) {
        if (base.kind != ExprKind::Ident)
            fail(elab_code::kBadAssign, "Only signal names (optionally with a bit select) can be assigned.", base.span);
        if (scope.loop_vars.count(base.name))
            fail(elab_code::kUnsupported,
                 "The loop counter '" + base.name + "' cannot be changed inside its own for loop.", base.span);
        auto it = scope.signals.find(base.name);
        if (it == scope.signals.end()) {
            if (scope.params.count(base.name))
                fail(elab_code::kBadAssign, "'" + base.name + "' is a parameter and cannot be assigned.", base.span);
            undeclared(base, scope);
        }
        return it->second;
    }

    uint32_t lvalue_width(const Expr& lhs, Scope& scope) {
        switch (lhs.kind) {
        case ExprKind::Ident: return sigs_[lvalue_signal(lhs, scope)].width;
        case ExprKind::Concat: {
            uint32_t sum = 0;
            for (const auto& a : lhs.args)
                sum += lvalue_width(a, scope);
            if (sum > 64)
                fail(elab_code::kWidth, "The assigned concatenation is wider than 64 bits.", lhs.span);
            return sum;
        }
        case ExprKind::Index:
        case ExprKind::Range:
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown:
            lvalue_signal(lhs.args[0], scope);
            return self_width(lhs, scope);
        default:
            fail(elab_code::kBadAssign, "The left side of an assignment must be a signal name.", lhs.span);
        }
    }

    struct SelectPos {
        Value pos;         // bit position relative to bit 0 of the signal
        uint32_t width;
    };

    SelectPos lvalue_select(const Expr& lhs, const Signal& sig, Scope& scope) {
        switch (lhs.kind) {
        case ExprKind::Index: {
            Value idx = lower(lhs.args[1], self_width(lhs.args[1], scope), scope);
            return {idx.is_const ? konst(idx.k - static_cast<uint64_t>(sig.lsb), 64) : bit_position(idx, sig.lsb), 1};
        }
        case ExprKind::Range: {
            uint64_t msb = const_eval(lhs.args[1], scope);
            uint64_t lsb = const_eval(lhs.args[2], scope);
            return {konst(lsb - static_cast<uint64_t>(sig.lsb), 64), static_cast<uint32_t>(msb - lsb + 1)};
        }
        default: {
            uint32_t sw = static_cast<uint32_t>(const_eval(lhs.args[2], scope));
            Value start = lower(lhs.args[1], self_width(lhs.args[1], scope), scope);
            if (lhs.kind == ExprKind::IndexedDown)
                start = start.is_const ? konst(start.k - sw + 1, 64)
                                       : cell(CellKind::Sub, 64, resize(start, 64), konst(sw - 1, 64));
            if (start.is_const)
                return {konst(start.k - static_cast<uint64_t>(sig.lsb), 64), sw};
            return {bit_position(start, sig.lsb), sw};
        }
        }
    }

    Value splice(const Value& cur, uint32_t w, const Value& piece, const SelectPos& sel) {
        if (sel.pos.is_const) {
            uint64_t pos = sel.pos.k;
            if (pos >= w)
                return cur;
            uint32_t pw = static_cast<uint32_t>(std::min<uint64_t>(sel.width, w - pos));
            Value acc = trunc(piece, pw);
            uint32_t acc_w = pw;
            if (pos > 0) {
                acc = concat2(acc, acc_w, cell(CellKind::Slice, static_cast<uint32_t>(pos), cur, std::nullopt,
                                               std::nullopt, 0),
                              static_cast<uint32_t>(pos));
                acc_w += static_cast<uint32_t>(pos);
            }
            if (pos + pw < w) {
                uint32_t hw = static_cast<uint32_t>(w - pos - pw);
                acc = concat2(cell(CellKind::Slice, hw, cur, std::nullopt, std::nullopt, static_cast<uint32_t>(pos + pw)),
                              hw, acc, acc_w);
            }
            return acc;
        }
        Value ones = konst(width_mask(sel.width), w);
        Value mask = cell(CellKind::Shl, w, ones, sel.pos);
        Value keep = cell(CellKind::And, w, resize(cur, w), cell(CellKind::Not, w, mask));
        Value shifted = cell(CellKind::Shl, w, resize(trunc(piece, sel.width), w), sel.pos);
        return cell(CellKind::Or, w, keep, shifted);
    }

    template <typename BaseFn>
    void assign_proc(const Expr& lhs, const Value& v, std::map<size_t, Value>& target, Scope& scope, BaseFn base) {
        if (lhs.kind == ExprKind::Concat) {
            uint32_t off = 0;
            for (size_t i = lhs.args.size(); i-- > 0;) {
                uint32_t aw = lvalue_width(lhs.args[i], scope);
                assign_proc(lhs.args[i], cell(CellKind::Slice, aw, v, std::nullopt, std::nullopt, off), target, scope,
                            base);
                off += aw;
            }
            return;
        }
        if (lhs.kind == ExprKind::Ident) {
            size_t idx = lvalue_signal(lhs, scope);
            target[idx] = resize(v, sigs_[idx].width);
            return;
        }
        size_t idx = lvalue_signal(lhs.args[0], scope);
        const Signal& sig = sigs_[idx];
        SelectPos sel = lvalue_select(lhs, sig, scope);
        auto it = target.find(idx);
        Value cur = it != target.end() ? it->second : base(idx);
        target[idx] = splice(cur, sig.width, v, sel);
    }

    void add_partial(size_t idx, uint32_t lsb, uint32_t width, const Value& v, Span span) {
        Signal& s = sigs_[idx];
        if (s.top_input)
            fail(elab_code::kBadAssign, "'" + s.name + "' is an input of the design and cannot be assigned.", span);
        if (s.kind != DriverKind::None && s.kind != DriverKind::Assign)
            fail(elab_code::kMultipleDrivers,
                 "'" + s.name + "' is given a value in more than one place (an assign and an always block). "
                 "Fix: set it in only one place.",
                 span, {s.name});
        for (const auto& p : s.partials) {
            if (lsb < p.lsb + p.width && p.lsb < lsb + width)
                fail(elab_code::kMultipleDrivers,
                     "'" + s.name + "' is given a value in more than one place. Fix: set each bit in only one "
                     "assign statement.",
                     span, {s.name});
        }
        s.kind = DriverKind::Assign;
        s.partials.push_back(Partial{lsb, width, trunc(v, width)});
    }

    void assign_driver(const Expr& lhs, const Value& v, Scope& scope, Span span) {
        if (lhs.kind == ExprKind::Concat) {
            uint32_t off = 0;
            for (size_t i = lhs.args.size(); i-- > 0;) {
                uint32_t aw = lvalue_width(lhs.args[i], scope);
                assign_driver(lhs.args[i], cell(CellKind::Slice, aw, v, std::nullopt, std::nullopt, off), scope, span);
                off += aw;
            }
            return;
        }
        if (lhs.kind == ExprKind::Ident) {
            size_t idx = lvalue_signal(lhs, scope);
            add_partial(idx, 0, sigs_[idx].width, v, span);
            return;
        }
        if (lhs.kind != ExprKind::Index && lhs.kind != ExprKind::Range && lhs.kind != ExprKind::IndexedUp &&
            lhs.kind != ExprKind::IndexedDown)
            fail(elab_code::kBadAssign, "The left side of an assign must be a signal name.", span);
        size_t idx = lvalue_signal(lhs.args[0], scope);
        SelectPos sel = lvalue_select(lhs, sigs_[idx], scope);
        if (!sel.pos.is_const)
            fail(elab_code::kBadAssign,
                 "An assign statement can only set bits at fixed positions. Fix: use an always @* block for a "
                 "variable position.",
                 span);
        uint64_t pos = sel.pos.k;
        if (pos >= sigs_[idx].width)
            return;
        uint32_t pw = static_cast<uint32_t>(std::min<uint64_t>(sel.width, sigs_[idx].width - pos));
        add_partial(idx, static_cast<uint32_t>(pos), pw, v, span);
    }

    // ---- items ---------------------------------------------------------------

    void elaborate_items(const Module& m, Scope& scope, int depth) {
        for (const auto& item : m.items) {
            if (auto* n = std::get_if<NetDecl>(&item)) {
                if (n->init) {
                    size_t idx = scope.signals.at(n->name);
                    add_partial(idx, 0, sigs_[idx].width, lower_assign(*n->init, sigs_[idx].width, scope), n->span);
                }
            } else if (auto* a = std::get_if<ContAssign>(&item)) {
                uint32_t w = lvalue_width(a->lhs, scope);
                assign_driver(a->lhs, lower_assign(a->rhs, w, scope), scope, a->span);
            } else if (auto* al = std::get_if<AlwaysBlock>(&item)) {
                always(*al, scope);
            } else if (auto* inst = std::get_if<Instance>(&item)) {
                instance(*inst, scope, depth);
            }
        }
    }

    void instance(const Instance& inst, Scope& parent, int depth) {
        if (depth > 16)
            fail(elab_code::kUnsupported, "Modules are nested too deeply (does a module instantiate itself?).", inst.span);
        bool builtin = false;
        const Module* m = resolve(inst.module_name, builtin);
        if (!m)
            fail(elab_code::kUnresolvedInstance,
                 "There is no module named '" + inst.module_name + "'. Fix: check the spelling, or include the "
                 "module's code in the design.",
                 inst.span);
        Scope child;
        child.prefix = parent.prefix + inst.instance_name + ".";
        child.module = m;
        d_.instance_tree.push_back(InstanceRecord{parent.prefix + inst.instance_name, m->name, builtin});
        eval_params(*m, child, &inst, &parent);
        declare_signals(*m, child, false);

        std::set<std::string> seen;
        for (size_t i = 0; i < inst.ports.size(); ++i) {
            const Connection& c = inst.ports[i];
            const PortDecl* port = nullptr;
            if (c.name.empty()) {
                if (i >= m->ports.size())
                    fail(elab_code::kBadPort,
                         "Instance '" + inst.instance_name + "' connects more ports than module '" + m->name + "' has.",
                         c.span);
                port = &m->ports[i];
            } else {
                port = m->find_port(c.name);
                if (!port)
                    fail(elab_code::kBadPort,
                         "Module '" + m->name + "' has no port named '" + c.name + "'.", c.span);
            }
            if (!seen.insert(port->name).second)
                fail(elab_code::kBadPort, "Port '" + port->name + "' is connected twice.", c.span);
            if (!c.expr)
                continue;
            size_t idx = child.signals.at(port->name);
            uint32_t w = sigs_[idx].width;
            if (port->dir == Direction::Input) {
                add_partial(idx, 0, w, lower_assign(*c.expr, w, parent), c.span);
            } else {
                uint32_t lw = lvalue_width(*c.expr, parent);
                Value out = of_net(sigs_[idx].net, w);
                assign_driver(*c.expr, resize(out, std::max(lw, w)), parent, c.span);
            }
        }
        elaborate_items(*m, child, depth + 1);
    }

    // ---- always blocks -----------------------------------------------------

    NetId hold_net(size_t idx) {
        Signal& s = sigs_[idx];
        if (s.hold == kNoNet)
            s.hold = new_net(s.width);
        return s.hold;
    }

    void always(const AlwaysBlock& a, Scope& scope) {
        bool seq = a.is_clocked();
        if (!a.has_event_control)
            fail(elab_code::kUnsupported, "An always block without @(...) cannot be simulated.", a.span);
        if (seq) {
            for (const auto& e : a.events) {
                if (e.edge != Edge::Pos)
                    fail(elab_code::kUnsupported,
                         "Only 'always @(posedge clk)' clocked blocks can be simulated; negedge and asynchronous "
                         "resets are not supported.",
                         a.span);
                if (e.signal.kind != ExprKind::Ident)
                    fail(elab_code::kUnsupported, "The clock must be a plain signal name.", a.span);
            }
            if (a.events.size() != 1)
                fail(elab_code::kUnsupported,
                     "A clocked block may only wait for one clock edge. Fix: use 'always @(posedge clk)' and test "
                     "the reset inside the block.",
                     a.span);
            check_clock(a.events[0].signal, scope, a.span);
        }
        ExecState st;
        seq_ = seq;
        state_ = &st;
        std::map<size_t, uint64_t> reset_values;
        if (seq)
            detect_reset_values(a.body, scope, reset_values);
        exec(a.body, st, scope);
        state_ = nullptr;

        if (seq) {
            std::set<size_t> touched;
            for (auto& [idx, v] : st.nb)
                touched.insert(idx);
            for (auto& [idx, v] : st.env)
                touched.insert(idx);
            for (size_t idx : touched) {
                Signal& s = sigs_[idx];
                if (st.nb.count(idx) && st.env.count(idx))
                    fail(elab_code::kUnsupported,
                         "'" + s.name + "' is assigned with both = and <= in the same block. Fix: use <= for "
                         "registers.",
                         a.span);
                if (s.kind != DriverKind::None || s.top_input)
                    fail(elab_code::kMultipleDrivers,
                         "'" + s.name + "' is given a value in more than one place. Fix: assign it from a single "
                         "always block.",
                         a.span, {s.name});
                s.kind = DriverKind::Seq;
                s.next = st.nb.count(idx) ? st.nb.at(idx) : st.env.at(idx);
                if (auto it = reset_values.find(idx); it != reset_values.end())
                    s.reset_value = it->second & width_mask(s.width);
            }
        } else {
            std::map<size_t, Value> merged = st.env;
            for (auto& [idx, v] : st.nb)
                merged[idx] = v;
            for (auto& [idx, v] : merged) {
                Signal& s = sigs_[idx];
                if (s.kind != DriverKind::None || s.top_input)
                    fail(elab_code::kMultipleDrivers,
                         "'" + s.name + "' is given a value in more than one place. Fix: assign it from a single "
                         "always block.",
                         a.span, {s.name});
                s.kind = DriverKind::Comb;
                s.partials.push_back(Partial{0, s.width, resize(v, s.width)});
            }
        }
    }

    void check_clock(const Expr& clk, Scope& scope, Span span) {
        // The clock must reach the top-level `clk` input through port connections.
        auto it = scope.signals.find(clk.name);
        if (it == scope.signals.end())
            undeclared(clk, scope);
        NetId net = sigs_[it->second].net;
        for (int hops = 0; hops < 64; ++hops) {
            const Signal* s = nullptr;
            for (const auto& sig : sigs_)
                if (sig.net == net)
                    s = &sig;
            if (!s)
                break;
            if (s->top_input) {
                if (s->name == "clk")
                    return;
                break;
            }
            if (s->partials.size() == 1 && !s->partials[0].value.is_const && s->partials[0].lsb == 0) {
                net = s->partials[0].value.net;
                continue;
            }
            // Child port connections are recorded after the child body is reached; accept
            // clock ports that are not yet connected and verify later.
            if (s->is_input_port && s->kind == DriverKind::None)
                return;
            break;
        }
        fail(elab_code::kUnsupported,
             "This block is clocked by '" + clk.name + "', but only the single chip clock 'clk' is supported.", span);
    }

    void detect_reset_values(const Stmt& body, Scope& scope, std::map<size_t, uint64_t>& out) {
        const Stmt* top = &body;
        while (top->kind == StmtKind::Block && top->body.size() == 1)
            top = &top->body[0];
        if (top->kind != StmtKind::If || !is_reset_condition(top->cond))
            return;
        ExecState dry;
        ExecState* saved = state_;
        state_ = &dry;
        exec(top->body[0], dry, scope);
        state_ = saved;
        for (auto& [idx, v] : dry.nb)
            if (v.is_const)
                out[idx] = v.k;
        for (auto& [idx, v] : dry.env)
            if (v.is_const)
                out[idx] = v.k;
    }

    Value base_env(size_t idx) {
        if (seq_)
            return of_net(sigs_[idx].net, sigs_[idx].width);
        return of_net(hold_net(idx), sigs_[idx].width);
    }

    Value base_nb(size_t idx) { return of_net(sigs_[idx].net, sigs_[idx].width); }

    void merge_map(const Value& cond, std::map<size_t, Value>& out, const std::map<size_t, Value>& a,
                   const std::map<size_t, Value>& b, const std::map<size_t, Value>& orig, bool is_nb) {
        std::set<size_t> keys;
        for (auto& [k, v] : a)
            keys.insert(k);
        for (auto& [k, v] : b)
            keys.insert(k);
        for (size_t k : keys) {
            auto pick = [&](const std::map<size_t, Value>& m) -> Value {
                if (auto it = m.find(k); it != m.end())
                    return it->second;
                if (auto it = orig.find(k); it != orig.end())
                    return it->second;
                return is_nb ? base_nb(k) : base_env(k);
            };
            Value va = pick(a);
            Value vb = pick(b);
            uint32_t w = sigs_[k].width;
            out[k] = va == vb ? va : cell(CellKind::Mux, w, cond, resize(va, w), resize(vb, w));
        }
    }

    /// Combines two branch states: cond ? a : b.
    ExecState merge(const Value& cond, const ExecState& a, const ExecState& b, const ExecState& orig) {
        ExecState out = orig;
        merge_map(cond, out.env, a.env, b.env, orig.env, false);
        merge_map(cond, out.nb, a.nb, b.nb, orig.nb, true);
        return out;
    }

    void run_branch(const Stmt& s, ExecState& st, Scope& scope) {
        ExecState* saved = state_;
        state_ = &st;
        exec(s, st, scope);
        state_ = saved;
    }

    void exec(const Stmt& s, ExecState& st, Scope& scope) {
        switch (s.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking: {
            uint32_t w = lvalue_width(s.lhs, scope);
            Value v = lower_assign(s.rhs, w, scope);
            if (s.kind == StmtKind::Nonblocking && seq_)
                assign_proc(s.lhs, v, st.nb, scope, [&](size_t idx) { return base_nb(idx); });
            else
                assign_proc(s.lhs, v, st.env, scope, [&](size_t idx) { return base_env(idx); });
            return;
        }
        case StmtKind::Block:
            for (const auto& b : s.body)
                exec(b, st, scope);
            return;
        case StmtKind::If: {
            Value c = lower(s.cond, self_width(s.cond, scope), scope);
            if (c.is_const) {
                if (c.k != 0)
                    exec(s.body[0], st, scope);
                else if (s.body.size() > 1)
                    exec(s.body[1], st, scope);
                return;
            }
            ExecState t = st;
            run_branch(s.body[0], t, scope);
            ExecState e = st;
            if (s.body.size() > 1)
                run_branch(s.body[1], e, scope);
            st = merge(c, t, e, st);
            return;
        }
        case StmtKind::Case:
            exec_case(s, st, scope);
            return;
        case StmtKind::For:
            exec_for(s, st, scope);
            return;
        case StmtKind::SysTask:
        case StmtKind::Null:
            return;
        case StmtKind::Delay:
            fail(elab_code::kUnsupported, "Delays (#) cannot be simulated cycle by cycle. Remove them.", s.span);
        case StmtKind::EventWait:
            fail(elab_code::kUnsupported, "Waiting with @(...) inside a block cannot be simulated.", s.span);
        case StmtKind::While:
        case StmtKind::Repeat:
        case StmtKind::Forever:
            fail(elab_code::kNonConstLoop, "Only for loops with constant limits can be simulated.", s.span);
        case StmtKind::Fork:
            fail(elab_code::kUnsupported, "fork/join cannot be simulated; use begin/end.", s.span);
        }
    }

    void exec_case(const Stmt& s, ExecState& st, Scope& scope) {
        uint32_t sel_w = self_width(s.cond, scope);
        struct Arm {
            Value match;
            ExecState state;
        };
        std::vector<Arm> arms;
        std::optional<ExecState> deflt;
        for (const auto& item : s.items) {
            if (item.is_default()) {
                ExecState d = st;
                run_branch(item.body[0], d, scope);
                deflt = std::move(d);
                continue;
            }
            std::optional<Value> match;
            for (const auto& label : item.labels) {
                uint32_t ow = std::max(sel_w, self_width(label, scope));
                Value sel = lower(s.cond, ow, scope);
                Value lv = lower(label, ow, scope);
                Value m;
                uint64_t care = width_mask(ow);
                if (s.case_kind != CaseKind::Case && label.kind == ExprKind::Number)
                    care = label.care | ~width_mask(label.width);
                care &= width_mask(ow);
                if (care != width_mask(ow))
                    m = cell(CellKind::Eq, 1, cell(CellKind::And, ow, sel, konst(care, ow)), konst(lv.k & care, ow));
                else
                    m = cell(CellKind::Eq, 1, sel, lv);
                match = match ? cell(CellKind::LogOr, 1, *match, m) : m;
            }
            ExecState body = st;
            run_branch(item.body[0], body, scope);
            arms.push_back(Arm{*match, std::move(body)});
        }
        ExecState result = deflt ? std::move(*deflt) : st;
        for (size_t i = arms.size(); i-- > 0;) {
            const Value& m = arms[i].match;
            if (m.is_const) {
                if (m.k != 0)
                    result = arms[i].state;
                continue;
            }
            result = merge(m, arms[i].state, result, st);
        }
        st = std::move(result);
    }

    void exec_for(const Stmt& s, ExecState& st, Scope& scope) {
        const Stmt& init = s.body[0];
        const Stmt& step = s.body[1];
        if (init.lhs.kind != ExprKind::Ident || step.lhs.kind != ExprKind::Ident || step.lhs.name != init.lhs.name)
            fail(elab_code::kNonConstLoop, "A for loop must count with a single variable, like i = i + 1.", s.span);
        const std::string& var = init.lhs.name;
        const Signal* decl = find_signal(var, scope);
        uint32_t vw = decl ? decl->width : 32;
        if (!decl && !scope.loop_vars.count(var))
            undeclared(init.lhs, scope);
        std::optional<uint64_t> outer;
        if (auto it = scope.loop_vars.find(var); it != scope.loop_vars.end())
            outer = it->second;

        auto constant = [&](const Expr& e, const char* what) {
            Value v = lower(e, std::max(self_width(e, scope), vw), scope);
            if (!v.is_const)
                fail(elab_code::kNonConstLoop,
                     std::string("The for loop's ") + what + " depends on a signal, so it cannot be unrolled. "
                     "Fix: use numbers or parameters in the loop header.",
                     s.span);
            return v.k;
        };
        scope.loop_vars[var] = constant(init.rhs, "start value") & width_mask(vw);
        uint32_t iterations = 0;
        while (true) {
            Value c = lower(s.cond, self_width(s.cond, scope), scope);
            if (!c.is_const)
                fail(elab_code::kNonConstLoop,
                     "The for loop's condition depends on a signal, so it cannot be unrolled. Fix: compare the loop "
                     "counter with a number or parameter.",
                     s.span);
            if (c.k == 0)
                break;
            if (++iterations > opts_.max_loop_iterations)
                fail(elab_code::kNonConstLoop,
                     "This for loop runs more than " + std::to_string(opts_.max_loop_iterations) +
                         " times (or never stops). Fix: check the loop condition and step.",
                     s.span);
            exec(s.body[2], st, scope);
            scope.loop_vars[var] = constant(step.rhs, "step") & width_mask(vw);
        }
        if (outer)
            scope.loop_vars[var] = *outer;
        else
            scope.loop_vars.erase(var);
    }

    // ---- finalization ----------------------------------------------------

    void drive(NetId out, const Value& v, uint32_t w) {
        Cell c;
        c.width = w;
        c.out = out;
        if (v.is_const) {
            c.kind = CellKind::Const;
            c.value = v.k & width_mask(w);
        } else {
            c.kind = CellKind::Buf;
            c.in[0] = v.net;
            if (net_width(v) > w)
                c.in[0] = trunc(v, w).net;
        }
        d_.cells.push_back(c);
    }

    void finalize_signals() {
        for (size_t idx = 0; idx < sigs_.size(); ++idx) {
            Signal& s = sigs_[idx];
            switch (s.kind) {
            case DriverKind::None:
                if (!s.top_input)
                    drive(s.net, konst(0, s.width), s.width);
                break;
            case DriverKind::Assign:
            case DriverKind::Comb: {
                auto parts = s.partials;
                std::sort(parts.begin(), parts.end(), [](const Partial& a, const Partial& b) { return a.lsb < b.lsb; });
                Value acc;
                uint32_t acc_w = 0;
                auto append = [&](const Value& v, uint32_t w) {
                    if (acc_w == 0) {
                        acc = trunc(v, w);
                        acc_w = w;
                    } else {
                        acc = concat2(v, w, acc, acc_w);
                        acc_w += w;
                    }
                };
                for (const auto& p : parts) {
                    if (p.lsb > acc_w)
                        append(konst(0, p.lsb - acc_w), p.lsb - acc_w);
                    append(p.value, p.width);
                }
                if (acc_w < s.width)
                    append(konst(0, s.width - acc_w), s.width - acc_w);
                drive(s.net, acc, s.width);
                break;
            }
            case DriverKind::Seq:
                d_.registers.push_back(Register{s.net, fit_net(*s.next, s.width), s.width, s.reset_value});
                break;
            }
            if (s.hold != kNoNet)
                d_.registers.push_back(Register{s.hold, s.net, s.width, 0});
        }
    }

    const Ast& ast_;
    const BuiltinLibrary& lib_;
    ElaborateOptions opts_;
    ElaboratedDesign d_;
    std::vector<Signal> sigs_;
    std::map<std::pair<uint64_t, uint32_t>, NetId> const_cache_;
    ExecState* state_ = nullptr;
    bool seq_ = false;
};

} // namespace

ElaboratedDesign elaborate(const Ast& ast, std::string_view top, const BuiltinLibrary& library,
                           const ElaborateOptions& options) {
    return Elaborator(ast, library, options).run(top);
}

} // namespace ttvga
