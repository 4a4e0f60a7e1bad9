#include "ttvga/reference/interpreter.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace ttvga::reference {

namespace {

uint64_t mask_of(uint32_t w) { return w >= 64 ? ~0ull : (1ull << w) - 1; }

struct Slot {
    std::string name;
    uint32_t width = 1;
    int64_t lsb = 0;
    uint64_t value = 0;
    bool top_input = false;
};

struct RExpr {
    ExprKind kind = ExprKind::Number;
    Op op = Op::None;
    int slot = -1;
    bool is_const = false;
    uint64_t k = 0;
    uint32_t self_w = 32;
    int64_t lsb = 0;     // declared lsb of the selected signal
    int64_t offset = 0;  // Range: low bit relative to the declared lsb
    bool down = false;   // IndexedDown
    std::vector<RExpr> args;
};

struct RStmt;

struct RItem {
    std::vector<RExpr> labels;
    std::vector<uint64_t> cares;
    std::vector<RStmt> body;
};

struct RStmt {
    StmtKind kind = StmtKind::Null;
    CaseKind case_kind = CaseKind::Case;
    RExpr lhs, rhs, cond;
    uint32_t lhs_w = 0;
    std::vector<RStmt> body;
    std::vector<RItem> items;
};

struct Drive {
    RExpr lhs;
    RExpr rhs;
    uint32_t lhs_w = 0;
};

struct Scope {
    std::string prefix;
    std::map<std::string, int> sigs;
    std::map<std::string, std::pair<uint64_t, uint32_t>> params;
};

bool mentions_reset(const Expr& e) {
    bool found = false;
    visit_exprs(e, [&](const Expr& x) {
        if (x.kind != ExprKind::Ident)
            return;
        std::string lower = x.name;
        for (char& c : lower)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (lower.find("rst") != std::string::npos || lower.find("reset") != std::string::npos)
            found = true;
    });
    return found;
}

} // namespace

struct Interpreter::Impl {
    const Ast& ast;
    const BuiltinLibrary& lib;
    std::vector<Slot> slots;
    std::map<std::string, int> by_name;
    std::vector<Drive> drives;
    std::vector<RStmt> comb_blocks;
    std::vector<RStmt> seq_blocks;

    // Execution state for clocked blocks.
    bool seq_mode = false;
    std::map<int, uint64_t> overlay;
    struct Pending {
        int slot;
        int64_t pos;
        uint32_t width;
        uint64_t value;
    };
    std::vector<Pending> pending;

    Impl(const Ast& a, const BuiltinLibrary& l) : ast(a), lib(l) {}

    [[noreturn]] static void error(const std::string& msg) { throw ReferenceError(msg); }

    const Module* find_module(const std::string& name) const {
        if (const Module* m = ast.find(name))
            return m;
        return lib.find(name);
    }

    // ---- resolution --------------------------------------------------------

    uint64_t const_value(const Expr& e, Scope& s) {
        RExpr r = resolve(e, s);
        if (!constant(r))
            error("expression is not constant");
        return eval(r, r.self_w);
    }

    static bool constant(const RExpr& r) {
        if (r.slot >= 0)
            return false;
        for (const auto& a : r.args)
            if (!constant(a))
                return false;
        return true;
    }

    RExpr resolve(const Expr& e, Scope& s) {
        RExpr r;
        r.kind = e.kind;
        r.op = e.op;
        switch (e.kind) {
        case ExprKind::Number:
            r.is_const = true;
            r.k = e.value;
            r.self_w = e.width;
            return r;
        case ExprKind::Ident: {
            if (auto p = s.params.find(e.name); p != s.params.end()) {
                r.kind = ExprKind::Number;
                r.is_const = true;
                r.k = p->second.first;
                r.self_w = p->second.second;
                return r;
            }
            auto it = s.sigs.find(e.name);
            if (it == s.sigs.end())
                error("unknown identifier " + e.name);
            r.slot = it->second;
            r.self_w = slots[it->second].width;
            return r;
        }
        case ExprKind::Index: {
            r.args.push_back(resolve(e.args[0], s));
            r.args.push_back(resolve(e.args[1], s));
            r.lsb = r.args[0].slot >= 0 ? slots[r.args[0].slot].lsb : 0;
            r.self_w = 1;
            return r;
        }
        case ExprKind::Range: {
            r.args.push_back(resolve(e.args[0], s));
            r.lsb = r.args[0].slot >= 0 ? slots[r.args[0].slot].lsb : 0;
            int64_t msb = static_cast<int64_t>(const_value(e.args[1], s));
            int64_t lsb = static_cast<int64_t>(const_value(e.args[2], s));
            r.offset = lsb - r.lsb;
            r.self_w = static_cast<uint32_t>(msb - lsb + 1);
            return r;
        }
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown: {
            r.args.push_back(resolve(e.args[0], s));
            r.args.push_back(resolve(e.args[1], s));
            r.lsb = r.args[0].slot >= 0 ? slots[r.args[0].slot].lsb : 0;
            r.self_w = static_cast<uint32_t>(const_value(e.args[2], s));
            r.down = e.kind == ExprKind::IndexedDown;
            return r;
        }
        case ExprKind::Unary:
            r.args.push_back(resolve(e.args[0], s));
            r.self_w = (e.op == Op::Plus || e.op == Op::Neg || e.op == Op::BitNot) ? r.args[0].self_w : 1;
            return r;
        case ExprKind::Binary:
            r.args.push_back(resolve(e.args[0], s));
            r.args.push_back(resolve(e.args[1], s));
            switch (e.op) {
            case Op::Shl: case Op::Shr: case Op::AShl: case Op::AShr: case Op::Pow:
                r.self_w = r.args[0].self_w;
                break;
            case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge: case Op::Eq: case Op::Ne: case Op::CaseEq:
            case Op::CaseNe: case Op::LogAnd: case Op::LogOr:
                r.self_w = 1;
                break;
            default:
                r.self_w = std::max(r.args[0].self_w, r.args[1].self_w);
            }
            return r;
        case ExprKind::Ternary:
            for (const auto& a : e.args)
                r.args.push_back(resolve(a, s));
            r.self_w = std::max(r.args[1].self_w, r.args[2].self_w);
            return r;
        case ExprKind::Concat:
            r.self_w = 0;
            for (const auto& a : e.args) {
                r.args.push_back(resolve(a, s));
                r.self_w += r.args.back().self_w;
            }
            return r;
        case ExprKind::Replicate:
            r.k = const_value(e.args[0], s);
            r.args.push_back(resolve(e.args[1], s));
            r.self_w = static_cast<uint32_t>(r.k) * r.args[0].self_w;
            return r;
        case ExprKind::Call:
            if (e.name == "$unsigned")
                return resolve(e.args[0], s);
            if (e.name == "$clog2") {
                uint64_t v = const_value(e.args[0], s);
                uint64_t n = 0;
                while (n < 64 && (uint64_t{1} << n) < v)
                    ++n;
                r.kind = ExprKind::Number;
                r.is_const = true;
                r.k = n;
                r.self_w = 32;
                return r;
            }
            error("unsupported function " + e.name);
        }
        return r;
    }

    uint32_t lvalue_width(const RExpr& r) const {
        switch (r.kind) {
        case ExprKind::Ident: return slots[r.slot].width;
        case ExprKind::Concat: {
            uint32_t w = 0;
            for (const auto& a : r.args)
                w += lvalue_width(a);
            return w;
        }
        default: return r.self_w;
        }
    }

    RStmt resolve_stmt(const Stmt& st, Scope& s) {
        RStmt r;
        r.kind = st.kind;
        switch (st.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking:
            r.lhs = resolve(st.lhs, s);
            r.rhs = resolve(st.rhs, s);
            r.lhs_w = lvalue_width(r.lhs);
            break;
        case StmtKind::Block:
            for (const auto& b : st.body)
                r.body.push_back(resolve_stmt(b, s));
            break;
        case StmtKind::If:
            r.cond = resolve(st.cond, s);
            for (const auto& b : st.body)
                r.body.push_back(resolve_stmt(b, s));
            break;
        case StmtKind::Case:
            r.case_kind = st.case_kind;
            r.cond = resolve(st.cond, s);
            for (const auto& item : st.items) {
                RItem ri;
                for (const auto& l : item.labels) {
                    ri.labels.push_back(resolve(l, s));
                    uint64_t care = ~0ull;
                    if (st.case_kind != CaseKind::Case && l.kind == ExprKind::Number)
                        care = l.care | ~mask_of(l.width);
                    ri.cares.push_back(care);
                }
                ri.body.push_back(resolve_stmt(item.body[0], s));
                r.items.push_back(std::move(ri));
            }
            break;
        case StmtKind::For:
            r.cond = resolve(st.cond, s);
            for (const auto& b : st.body)
                r.body.push_back(resolve_stmt(b, s));
            break;
        case StmtKind::SysTask:
        case StmtKind::Null:
            r.kind = StmtKind::Null;
            break;
        default:
            error("statement kind not supported by the reference interpreter");
        }
        return r;
    }

    // ---- elaboration of the instance tree -------------------------------

    int declare(Scope& s, const std::string& name, uint32_t width, int64_t lsb) {
        Slot slot;
        slot.name = s.prefix + name;
        slot.width = width;
        slot.lsb = lsb;
        slots.push_back(slot);
        int id = static_cast<int>(slots.size() - 1);
        s.sigs[name] = id;
        by_name[slot.name] = id;
        return id;
    }

    std::pair<uint32_t, int64_t> shape(const std::optional<RangeDecl>& range, NetType type, Scope& s) {
        if (type == NetType::Integer)
            return {32, 0};
        if (!range)
            return {1, 0};
        int64_t msb = static_cast<int64_t>(const_value(range->msb, s));
        int64_t lsb = static_cast<int64_t>(const_value(range->lsb, s));
        return {static_cast<uint32_t>(msb - lsb + 1), lsb};
    }

    void build(const Module& m, Scope& s, const Instance* inst, Scope* parent, bool top) {
        std::vector<const ParamDecl*> params;
        for (const auto& p : m.header_params)
            params.push_back(&p);
        for (const auto& item : m.items)
            if (auto* p = std::get_if<ParamDecl>(&item))
                params.push_back(p);
        std::map<std::string, const Expr*> named;
        std::vector<const Expr*> positional;
        if (inst)
            for (const auto& c : inst->params) {
                if (!c.expr)
                    continue;
                if (c.name.empty())
                    positional.push_back(&*c.expr);
                else
                    named[c.name] = &*c.expr;
            }
        size_t pos = 0;
        for (const ParamDecl* p : params) {
            const Expr* override_expr = nullptr;
            if (!p->local) {
                if (pos < positional.size())
                    override_expr = positional[pos];
                ++pos;
                if (auto it = named.find(p->name); it != named.end())
                    override_expr = it->second;
            }
            uint64_t v;
            uint32_t w;
            if (override_expr) {
                RExpr r = resolve(*override_expr, *parent);
                w = r.self_w;
                v = eval(r, w);
            } else {
                RExpr r = resolve(p->value, s);
                w = r.self_w;
                v = eval(r, w);
            }
            if (p->range) {
                auto [rw, rl] = shape(p->range, NetType::Wire, s);
                (void)rl;
                w = rw;
                v &= mask_of(w);
            }
            s.params[p->name] = {v, w};
        }

        for (const auto& p : m.ports) {
            auto [w, lsb] = shape(p.range, p.type, s);
            int id = declare(s, p.name, w, lsb);
            if (top && p.dir == Direction::Input)
                slots[id].top_input = true;
        }
        for (const auto& item : m.items)
            if (auto* n = std::get_if<NetDecl>(&item)) {
                if (s.sigs.count(n->name))
                    continue;
                auto [w, lsb] = shape(n->range, n->type, s);
                declare(s, n->name, w, lsb);
            }

        if (inst) {
            for (size_t i = 0; i < inst->ports.size(); ++i) {
                const Connection& c = inst->ports[i];
                if (!c.expr)
                    continue;
                const PortDecl* port = c.name.empty() ? &m.ports.at(i) : m.find_port(c.name);
                if (!port)
                    error("unknown port " + c.name);
                RExpr inner;
                inner.kind = ExprKind::Ident;
                inner.slot = s.sigs.at(port->name);
                inner.self_w = slots[inner.slot].width;
                Drive d;
                if (port->dir == Direction::Input) {
                    d.lhs = inner;
                    d.rhs = resolve(*c.expr, *parent);
                } else {
                    d.lhs = resolve(*c.expr, *parent);
                    d.rhs = inner;
                }
                d.lhs_w = lvalue_width(d.lhs);
                drives.push_back(std::move(d));
            }
        }

        for (const auto& item : m.items) {
            if (auto* n = std::get_if<NetDecl>(&item)) {
                if (!n->init)
                    continue;
                Drive d;
                d.lhs.kind = ExprKind::Ident;
                d.lhs.slot = s.sigs.at(n->name);
                d.lhs.self_w = slots[d.lhs.slot].width;
                d.rhs = resolve(*n->init, s);
                d.lhs_w = d.lhs.self_w;
                drives.push_back(std::move(d));
            } else if (auto* a = std::get_if<ContAssign>(&item)) {
                Drive d;
                d.lhs = resolve(a->lhs, s);
                d.rhs = resolve(a->rhs, s);
                d.lhs_w = lvalue_width(d.lhs);
                drives.push_back(std::move(d));
            } else if (auto* al = std::get_if<AlwaysBlock>(&item)) {
                RStmt body = resolve_stmt(al->body, s);
                if (al->is_clocked()) {
                    initial_values(al->body, body);
                    seq_blocks.push_back(std::move(body));
                } else {
                    comb_blocks.push_back(std::move(body));
                }
            } else if (auto* in = std::get_if<Instance>(&item)) {
                const Module* child = find_module(in->module_name);
                if (!child)
                    error("unknown module " + in->module_name);
                Scope cs;
                cs.prefix = s.prefix + in->instance_name + ".";
                build(*child, cs, in, &s, false);
            }
        }
    }

    /// Registers start at the constant values their reset branch assigns.
    void initial_values(const Stmt& ast_body, const RStmt& body) {
        const Stmt* a = &ast_body;
        const RStmt* r = &body;
        while (a->kind == StmtKind::Block && a->body.size() == 1) {
            a = &a->body[0];
            r = &r->body[0];
        }
        if (a->kind != StmtKind::If || !mentions_reset(a->cond))
            return;
        collect_constants(r->body[0]);
    }

    void collect_constants(const RStmt& st) {
        if (st.kind == StmtKind::Block) {
            for (const auto& b : st.body)
                collect_constants(b);
            return;
        }
        if ((st.kind == StmtKind::Blocking || st.kind == StmtKind::Nonblocking) && st.lhs.kind == ExprKind::Ident &&
            constant(st.rhs)) {
            uint32_t w = std::max(st.rhs.self_w, st.lhs_w);
            slots[st.lhs.slot].value = eval(st.rhs, w) & mask_of(slots[st.lhs.slot].width);
        }
    }

    // ---- evaluation --------------------------------------------------------

    uint64_t read(int slot) const {
        if (seq_mode) {
            auto it = overlay.find(slot);
            if (it != overlay.end())
                return it->second;
        }
        return slots[slot].value;
    }

    static uint64_t bits_at(uint64_t v, int64_t pos, uint32_t width, uint32_t src_w) {
        uint64_t out = 0;
        for (uint32_t i = 0; i < width; ++i) {
            int64_t b = pos + i;
            if (b >= 0 && b < static_cast<int64_t>(src_w) && b < 64 && ((v >> b) & 1))
                out |= uint64_t{1} << i;
        }
        return out;
    }

    uint64_t eval(const RExpr& e, uint32_t w) const {
        if (w < e.self_w)
            return eval(e, e.self_w) & mask_of(w);
        const uint64_t m = mask_of(w);
        switch (e.kind) {
        case ExprKind::Number:
            return e.k & m;
        case ExprKind::Ident:
            return read(e.slot) & m;
        case ExprKind::Index: {
            const RExpr& base = e.args[0];
            int64_t pos = static_cast<int64_t>(eval(e.args[1], e.args[1].self_w)) - e.lsb;
            return bits_at(eval(base, base.self_w), pos, 1, base.self_w);
        }
        case ExprKind::Range: {
            const RExpr& base = e.args[0];
            return bits_at(eval(base, base.self_w), e.offset, e.self_w, base.self_w);
        }
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown: {
            const RExpr& base = e.args[0];
            int64_t start = static_cast<int64_t>(eval(e.args[1], e.args[1].self_w));
            if (e.down)
                start = start - e.self_w + 1;
            return bits_at(eval(base, base.self_w), start - e.lsb, e.self_w, base.self_w);
        }
        case ExprKind::Unary: {
            const RExpr& a = e.args[0];
            switch (e.op) {
            case Op::Plus: return eval(a, w);
            case Op::Neg: return (~eval(a, w) + 1) & m;
            case Op::BitNot: return ~eval(a, w) & m;
            default: break;
            }
            uint64_t v = eval(a, a.self_w);
            uint64_t all = mask_of(a.self_w);
            uint64_t r = 0;
            switch (e.op) {
            case Op::LogNot: r = v == 0; break;
            case Op::RedAnd: r = v == all; break;
            case Op::RedNand: r = v != all; break;
            case Op::RedOr: r = v != 0; break;
            case Op::RedNor: r = v == 0; break;
            case Op::RedXor: r = std::popcount(v) % 2; break;
            case Op::RedXnor: r = 1 - std::popcount(v) % 2; break;
            default: error("bad unary operator");
            }
            return r & m;
        }
        case ExprKind::Binary: {
            const RExpr& a = e.args[0];
            const RExpr& b = e.args[1];
            switch (e.op) {
            case Op::Add: return (eval(a, w) + eval(b, w)) & m;
            case Op::Sub: return (eval(a, w) - eval(b, w)) & m;
            case Op::Mul: return (eval(a, w) * eval(b, w)) & m;
            case Op::Div: {
                uint64_t d = eval(b, w);
                return d == 0 ? m : (eval(a, w) / d) & m;
            }
            case Op::Mod: {
                uint64_t d = eval(b, w);
                return d == 0 ? m : (eval(a, w) % d) & m;
            }
            case Op::BitAnd: return eval(a, w) & eval(b, w);
            case Op::BitOr: return eval(a, w) | eval(b, w);
            case Op::BitXor: return eval(a, w) ^ eval(b, w);
            case Op::BitXnor: return ~(eval(a, w) ^ eval(b, w)) & m;
            case Op::Shl:
            case Op::AShl: {
                uint64_t n = eval(b, b.self_w);
                return n >= 64 ? 0 : (eval(a, w) << n) & m;
            }
            case Op::Shr:
            case Op::AShr: {
                uint64_t n = eval(b, b.self_w);
                return n >= 64 ? 0 : eval(a, w) >> n;
            }
            case Op::Pow: {
                uint64_t base = eval(a, w);
                uint64_t n = eval(b, b.self_w);
                uint64_t r = 1;
                for (uint64_t i = 0; i < n && i < 128; ++i)
                    r *= base;
                return r & m;
            }
            case Op::LogAnd: return (eval(a, a.self_w) != 0 && eval(b, b.self_w) != 0) ? 1 : 0;
            case Op::LogOr: return (eval(a, a.self_w) != 0 || eval(b, b.self_w) != 0) ? 1 : 0;
            default: break;
            }
            uint32_t cw = std::max(a.self_w, b.self_w);
            uint64_t x = eval(a, cw), y = eval(b, cw);
            switch (e.op) {
            case Op::Lt: return x < y;
            case Op::Le: return x <= y;
            case Op::Gt: return x > y;
            case Op::Ge: return x >= y;
            case Op::Eq: case Op::CaseEq: return x == y;
            case Op::Ne: case Op::CaseNe: return x != y;
            default: error("bad binary operator");
            }
        }
        case ExprKind::Ternary:
            return eval(e.args[0], e.args[0].self_w) != 0 ? eval(e.args[1], w) : eval(e.args[2], w);
        case ExprKind::Concat: {
            uint64_t acc = 0;
            for (const auto& a : e.args) {
                acc = a.self_w >= 64 ? 0 : acc << a.self_w;
                acc |= eval(a, a.self_w);
            }
            return acc & m;
        }
        case ExprKind::Replicate: {
            const RExpr& inner = e.args[0];
            uint64_t v = eval(inner, inner.self_w);
            uint64_t acc = 0;
            for (uint64_t i = 0; i < e.k; ++i)
                acc = (inner.self_w >= 64 ? 0 : acc << inner.self_w) | v;
            return acc & m;
        }
        case ExprKind::Call:
            break;
        }
        error("cannot evaluate expression");
    }

    // ---- assignment --------------------------------------------------------

    uint64_t splice(uint64_t cur, uint32_t width, int64_t pos, uint32_t n, uint64_t v) const {
        for (uint32_t i = 0; i < n; ++i) {
            int64_t b = pos + i;
            if (b < 0 || b >= static_cast<int64_t>(width))
                continue;
            uint64_t bit = uint64_t{1} << b;
            cur = ((v >> i) & 1) ? (cur | bit) : (cur & ~bit);
        }
        return cur;
    }

    void store(int slot, int64_t pos, uint32_t n, uint64_t v, bool nonblocking) {
        if (seq_mode && nonblocking) {
            pending.push_back({slot, pos, n, v});
            return;
        }
        uint64_t next = splice(read(slot), slots[slot].width, pos, n, v);
        if (seq_mode)
            overlay[slot] = next;
        else
            slots[slot].value = next;
    }

    void assign(const RExpr& lv, uint64_t v, bool nonblocking) {
        switch (lv.kind) {
        case ExprKind::Ident:
            store(lv.slot, 0, slots[lv.slot].width, v, nonblocking);
            return;
        case ExprKind::Index: {
            int64_t pos = static_cast<int64_t>(eval(lv.args[1], lv.args[1].self_w)) - lv.lsb;
            store(lv.args[0].slot, pos, 1, v, nonblocking);
            return;
        }
        case ExprKind::Range:
            store(lv.args[0].slot, lv.offset, lv.self_w, v, nonblocking);
            return;
        case ExprKind::IndexedUp:
        case ExprKind::IndexedDown: {
            int64_t start = static_cast<int64_t>(eval(lv.args[1], lv.args[1].self_w));
            if (lv.down)
                start = start - lv.self_w + 1;
            store(lv.args[0].slot, start - lv.lsb, lv.self_w, v, nonblocking);
            return;
        }
        case ExprKind::Concat: {
            uint32_t shift = 0;
            for (size_t i = lv.args.size(); i-- > 0;) {
                uint32_t w = lvalue_width(lv.args[i]);
                assign(lv.args[i], shift >= 64 ? 0 : (v >> shift) & mask_of(w), nonblocking);
                shift += w;
            }
            return;
        }
        default:
            error("bad assignment target");
        }
    }

    void exec(const RStmt& st) {
        switch (st.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking: {
            uint64_t v = eval(st.rhs, std::max(st.rhs.self_w, st.lhs_w)) & mask_of(st.lhs_w);
            assign(st.lhs, v, st.kind == StmtKind::Nonblocking);
            return;
        }
        case StmtKind::Block:
            for (const auto& b : st.body)
                exec(b);
            return;
        case StmtKind::If:
            if (eval(st.cond, st.cond.self_w) != 0)
                exec(st.body[0]);
            else if (st.body.size() > 1)
                exec(st.body[1]);
            return;
        case StmtKind::Case: {
            const RItem* chosen = nullptr;
            const RItem* fallback = nullptr;
            for (const auto& item : st.items) {
                if (item.labels.empty()) {
                    fallback = &item;
                    continue;
                }
                for (size_t i = 0; i < item.labels.size() && !chosen; ++i) {
                    uint32_t cw = std::max(st.cond.self_w, item.labels[i].self_w);
                    uint64_t sel = eval(st.cond, cw);
                    uint64_t lab = eval(item.labels[i], cw);
                    if (((sel ^ lab) & item.cares[i] & mask_of(cw)) == 0)
                        chosen = &item;
                }
                if (chosen)
                    break;
            }
            if (!chosen)
                chosen = fallback;
            if (chosen)
                exec(chosen->body[0]);
            return;
        }
        case StmtKind::For: {
            exec(st.body[0]);
            for (int guard = 0; eval(st.cond, st.cond.self_w) != 0; ++guard) {
                if (guard > 100000)
                    error("for loop does not terminate");
                exec(st.body[2]);
                exec(st.body[1]);
            }
            return;
        }
        default:
            return;
        }
    }

    void settle() {
        seq_mode = false;
        std::vector<uint64_t> before;
        for (int pass = 0; pass < 1000; ++pass) {
            before.resize(slots.size());
            for (size_t i = 0; i < slots.size(); ++i)
                before[i] = slots[i].value;
            for (const auto& d : drives) {
                uint64_t v = eval(d.rhs, std::max(d.rhs.self_w, d.lhs_w)) & mask_of(d.lhs_w);
                assign(d.lhs, v, false);
            }
            for (const auto& b : comb_blocks)
                exec(b);
            bool same = true;
            for (size_t i = 0; i < slots.size() && same; ++i)
                same = before[i] == slots[i].value;
            if (same)
                return;
        }
        error("combinational logic does not settle");
    }

    void clock() {
        seq_mode = true;
        pending.clear();
        std::vector<std::pair<int, uint64_t>> blocking;
        for (const auto& b : seq_blocks) {
            overlay.clear();
            exec(b);
            for (const auto& [slot, v] : overlay)
                blocking.emplace_back(slot, v);
        }
        overlay.clear();
        seq_mode = false;
        for (const auto& [slot, v] : blocking)
            slots[slot].value = v;
        for (const auto& p : pending)
            slots[p.slot].value = splice(slots[p.slot].value, slots[p.slot].width, p.pos, p.width, p.value);
        settle();
    }
};

Interpreter::Interpreter(const Ast& ast, std::string_view top, const BuiltinLibrary& library)
    : impl_(std::make_unique<Impl>(ast, library)) {
    const Module* m = impl_->find_module(std::string(top));
    if (!m)
        throw ReferenceError("unknown top module " + std::string(top));
    Scope s;
    impl_->build(*m, s, nullptr, nullptr, true);
    impl_->settle();
}

Interpreter::~Interpreter() = default;
Interpreter::Interpreter(Interpreter&&) noexcept = default;
Interpreter& Interpreter::operator=(Interpreter&&) noexcept = default;

void Interpreter::poke(std::string_view input, uint64_t value) {
    auto it = impl_->by_name.find(std::string(input));
    if (it == impl_->by_name.end() || !impl_->slots[it->second].top_input)
        throw ReferenceError("unknown input " + std::string(input));
    impl_->slots[it->second].value = value & mask_of(impl_->slots[it->second].width);
    impl_->settle();
}

uint64_t Interpreter::peek(std::string_view name) const {
    auto it = impl_->by_name.find(std::string(name));
    if (it == impl_->by_name.end())
        throw ReferenceError("unknown signal " + std::string(name));
    return impl_->slots[it->second].value;
}

void Interpreter::step(uint64_t cycles) {
    for (uint64_t i = 0; i < cycles; ++i) {
        impl_->clock();
        ++cycles_;
    }
}

void Interpreter::reset(uint64_t cycles) {
    poke("rst_n", 0);
    step(cycles);
    poke("rst_n", 1);
}

} // namespace ttvga::reference
