#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ttvga/frontend/source.hpp"

namespace ttvga {

enum class ExprKind {
    Number,
    Ident,
    Index,      // base[index]
    Range,      // base[msb:lsb]
    IndexedUp,  // base[start +: width]
    IndexedDown,// base[start -: width]
    Unary,
    Binary,
    Ternary,
    Concat,
    Replicate,  // {count{inner}}; args = {count, inner concat}
    Call,       // system function such as $clog2
};

enum class Op {
    None,
    // unary
    Plus, Neg, BitNot, LogNot, RedAnd, RedNand, RedOr, RedNor, RedXor, RedXnor,
    // binary
    Add, Sub, Mul, Div, Mod, Pow,
    Shl, Shr, AShl, AShr,
    Lt, Le, Gt, Ge, Eq, Ne, CaseEq, CaseNe,
    BitAnd, BitOr, BitXor, BitXnor,
    LogAnd, LogOr,
};

std::string_view op_symbol(Op op);

struct Expr {
    ExprKind kind = ExprKind::Number;
    Op op = Op::None;
    std::string name;       // identifier, hierarchical path, or system function
    std::string literal;    // number as written
    uint64_t value = 0;     // number value (x/z/? bits read as 0)
    uint64_t care = ~0ull;  // number bits that are not '?'/'z' wildcards
    uint32_t width = 32;    // number width; unsized literals are 32 bits
    bool sized = false;
    std::vector<Expr> args;
    Span span;

    bool is_hierarchical() const { return kind == ExprKind::Ident && name.find('.') != std::string::npos; }
};

enum class StmtKind {
    Block,
    If,
    Case,
    For,
    While,
    Repeat,
    Forever,
    Fork,
    Blocking,
    Nonblocking,
    Delay,      // #expr stmt  (body may be empty for "#10;")
    EventWait,  // @(...) stmt
    SysTask,    // $display(...)
    Null,
};

enum class CaseKind { Case, Casez, Casex };

enum class Edge { None, Pos, Neg };

struct Event {
    Edge edge = Edge::None;
    Expr signal;
};

struct CaseItem;

struct Stmt {
    StmtKind kind = StmtKind::Null;
    Span span;
    Expr lhs;
    Expr rhs;
    Expr cond;                  // if/while/for/repeat condition, case selector, delay amount
    std::vector<Stmt> body;     // Block/Fork: statements. If: {then, else?}. For: {init, step, body}.
                                // While/Repeat/Forever/Delay/EventWait: {body?}
    std::vector<CaseItem> items;
    CaseKind case_kind = CaseKind::Case;
    std::string name;           // block label or system task name
    std::vector<Expr> args;     // system task arguments
    std::vector<Event> events;  // EventWait
    bool has_else() const { return kind == StmtKind::If && body.size() > 1; }
};

struct CaseItem {
    std::vector<Expr> labels;   // empty => default
    std::vector<Stmt> body;     // exactly one statement
    Span span;
    bool is_default() const { return labels.empty(); }
};

enum class Direction { Input, Output, Inout };

std::string_view to_string(Direction dir);

struct RangeDecl {
    Expr msb;
    Expr lsb;
};

enum class NetType { Wire, Reg, Integer, Real };

struct PortDecl {
    std::string name;
    Direction dir = Direction::Input;
    NetType type = NetType::Wire;
    bool type_explicit = false;
    std::optional<RangeDecl> range;
    Span span;
};

struct NetDecl {
    std::string name;
    NetType type = NetType::Wire;
    std::optional<RangeDecl> range;
    std::optional<Expr> init;   // wire x = expr;
    Span span;
};

struct ParamDecl {
    std::string name;
    bool local = false;
    std::optional<RangeDecl> range;
    Expr value;
    Span span;
};

struct ContAssign {
    Expr lhs;
    Expr rhs;
    Span span;
};

struct AlwaysBlock {
    bool star = false;           // @* or @(*)
    std::vector<Event> events;   // empty when there is no event control at all
    bool has_event_control = true;
    Stmt body;
    Span span;

    bool is_clocked() const {
        for (const auto& e : events)
            if (e.edge != Edge::None)
                return true;
        return false;
    }
};

struct InitialBlock {
    Stmt body;
    Span span;
};

struct Connection {
    std::string name;            // empty for positional
    std::optional<Expr> expr;    // empty for .port()
    Span span;
};

struct Instance {
    std::string module_name;
    std::string instance_name;
    std::vector<Connection> params;
    std::vector<Connection> ports;
    Span span;
};

/// A port name listed in a non-ANSI header, e.g. `module m(a, b);`.
struct PortRef {
    std::string name;
    Span span;
};

using ModuleItem = std::variant<PortDecl, NetDecl, ParamDecl, ContAssign, AlwaysBlock, InitialBlock, Instance>;

struct Module {
    std::string name;
    std::vector<ParamDecl> header_params;   // module m #(parameter ...)
    bool ansi = true;
    std::vector<PortDecl> ports;             // ANSI ports, or non-ANSI ports resolved from body declarations
    std::vector<PortRef> port_order;         // non-ANSI header order
    std::vector<ModuleItem> items;
    Span span;

    const PortDecl* find_port(std::string_view port) const;
};

struct Ast {
    std::vector<Module> modules;

    const Module* find(std::string_view name) const;
};

/// Structural equality ignoring source spans.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const Module& a, const Module& b);
bool structurally_equal(const Ast& a, const Ast& b);

/// Calls `fn` on `stmt` and every nested statement, depth first.
template <typename Fn>
void visit_stmts(const Stmt& stmt, Fn&& fn) {
    fn(stmt);
    for (const auto& s : stmt.body)
        visit_stmts(s, fn);
    for (const auto& item : stmt.items)
        for (const auto& s : item.body)
            visit_stmts(s, fn);
}

/// Calls `fn` on `expr` and every sub-expression, depth first.
template <typename Fn>
void visit_exprs(const Expr& expr, Fn&& fn) {
    fn(expr);
    for (const auto& a : expr.args)
        visit_exprs(a, fn);
}

} // namespace ttvga
