#include "ttvga/frontend/ast.hpp"

#include <stdexcept>

namespace ttvga {

std::string_view op_symbol(Op op) {
    switch (op) {
    case Op::None: return "";
    case Op::Plus: return "+";
    case Op::Neg: return "-";
    case Op::BitNot: return "~";
    case Op::LogNot: return "!";
    case Op::RedAnd: return "&";
    case Op::RedNand: return "~&";
    case Op::RedOr: return "|";
    case Op::RedNor: return "~|";
    case Op::RedXor: return "^";
    case Op::RedXnor: return "~^";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Pow: return "**";
    case Op::Shl: return "<<";
    case Op::Shr: return ">>";
    case Op::AShl: return "<<<";
    case Op::AShr: return ">>>";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::CaseEq: return "===";
    case Op::CaseNe: return "!==";
    case Op::BitAnd: return "&";
    case Op::BitOr: return "|";
    case Op::BitXor: return "^";
    case Op::BitXnor: return "~^";
    case Op::LogAnd: return "&&";
    case Op::LogOr: return "||";
    }
    return "";
}

std::string_view to_string(Direction dir) {
    switch (dir) {
    case Direction::Input: return "input";
    case Direction::Output: return "output";
    case Direction::Inout: return "inout";
    }
    return "";
}

const PortDecl* Module::find_port(std::string_view port) const {
    for (const auto& p : ports)
        if (p.name == port)
            return &p;
    return nullptr;
}

const Module* Ast::find(std::string_view name) const {
    for (const auto& m : modules)
        if (m.name == name)
            return &m;
    return nullptr;
}

namespace {

template <typename T, typename Eq>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, Eq eq) {
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (!eq(a[i], b[i]))
            return false;
    return true;
}

bool eq_expr(const Expr& a, const Expr& b) { return structurally_equal(a, b); }
bool eq_stmt(const Stmt& a, const Stmt& b) { return structurally_equal(a, b); }

bool eq_opt_expr(const std::optional<Expr>& a, const std::optional<Expr>& b) {
    if (a.has_value() != b.has_value())
        return false;
    return !a || structurally_equal(*a, *b);
}

bool eq_range(const std::optional<RangeDecl>& a, const std::optional<RangeDecl>& b) {
    if (a.has_value() != b.has_value())
        return false;
    return !a || (structurally_equal(a->msb, b->msb) && structurally_equal(a->lsb, b->lsb));
}

bool eq_events(const std::vector<Event>& a, const std::vector<Event>& b) {
    return all_equal(a, b, [](const Event& x, const Event& y) {
        return x.edge == y.edge && structurally_equal(x.signal, y.signal);
    });
}

bool eq_conn(const Connection& a, const Connection& b) { return a.name == b.name && eq_opt_expr(a.expr, b.expr); }

bool eq_param(const ParamDecl& a, const ParamDecl& b) {
    return a.name == b.name && a.local == b.local && eq_range(a.range, b.range) && structurally_equal(a.value, b.value);
}

bool eq_port(const PortDecl& a, const PortDecl& b) {
    return a.name == b.name && a.dir == b.dir && a.type == b.type && a.type_explicit == b.type_explicit &&
           eq_range(a.range, b.range);
}

struct ItemEq {
    bool operator()(const PortDecl& a, const PortDecl& b) const { return eq_port(a, b); }
    bool operator()(const NetDecl& a, const NetDecl& b) const {
        return a.name == b.name && a.type == b.type && eq_range(a.range, b.range) && eq_opt_expr(a.init, b.init);
    }
    bool operator()(const ParamDecl& a, const ParamDecl& b) const { return eq_param(a, b); }
    bool operator()(const ContAssign& a, const ContAssign& b) const {
        return structurally_equal(a.lhs, b.lhs) && structurally_equal(a.rhs, b.rhs);
    }
    bool operator()(const AlwaysBlock& a, const AlwaysBlock& b) const {
        return a.star == b.star && a.has_event_control == b.has_event_control && eq_events(a.events, b.events) &&
               structurally_equal(a.body, b.body);
    }
    bool operator()(const InitialBlock& a, const InitialBlock& b) const { return structurally_equal(a.body, b.body); }
    bool operator()(const Instance& a, const Instance& b) const {
        return a.module_name == b.module_name && a.instance_name == b.instance_name &&
               all_equal(a.params, b.params, eq_conn) && all_equal(a.ports, b.ports, eq_conn);
    }
    template <typename A, typename B>
    bool operator()(const A&, const B&) const {
        return false;
    }
};

} // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.op != b.op || a.name != b.name || a.args.size() != b.args.size())
        return false;
    if (a.kind == ExprKind::Number &&
        (a.value != b.value || a.care != b.care || a.width != b.width || a.sized != b.sized || a.literal != b.literal))
        return false;
    return all_equal(a.args, b.args, eq_expr);
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind || a.case_kind != b.case_kind || a.name != b.name)
        return false;
    if (!structurally_equal(a.lhs, b.lhs) || !structurally_equal(a.rhs, b.rhs) || !structurally_equal(a.cond, b.cond))
        return false;
    if (!all_equal(a.body, b.body, eq_stmt) || !all_equal(a.args, b.args, eq_expr) || !eq_events(a.events, b.events))
        return false;
    return all_equal(a.items, b.items, [](const CaseItem& x, const CaseItem& y) {
        return all_equal(x.labels, y.labels, eq_expr) && all_equal(x.body, y.body, eq_stmt);
    });
}

bool structurally_equal(const Module& a, const Module& b) {
    if (a.name != b.name || a.ansi != b.ansi)
        return false;
    if (!all_equal(a.header_params, b.header_params, eq_param) || !all_equal(a.ports, b.ports, eq_port))
        return false;
    if (!all_equal(a.port_order, b.port_order, [](const PortRef& x, const PortRef& y) { return x.name == y.name; }))
        return false;
    return all_equal(a.items, b.items,
                     [](const ModuleItem& x, const ModuleItem& y) { return std::visit(ItemEq{}, x, y); });
}

bool structurally_equal(const Ast& a, const Ast& b) {
    return all_equal(a.modules, b.modules, [](const Module& x, const Module& y) { return structurally_equal(x, y); });
}

} // namespace ttvga
