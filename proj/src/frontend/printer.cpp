#include "ttvga/frontend/printer.hpp"

#include <sstream>

namespace ttvga {

namespace {

std::string range_text(const std::optional<RangeDecl>& r) {
    if (!r)
        return "";
    return "[" + print(r->msb) + ":" + print(r->lsb) + "] ";
}

std::string type_text(NetType t) {
    switch (t) {
    case NetType::Wire: return "wire";
    case NetType::Reg: return "reg";
    case NetType::Integer: return "integer";
    case NetType::Real: return "real";
    }
    return "wire";
}

std::string events_text(bool star, const std::vector<Event>& events) {
    if (star)
        return "@(*)";
    std::string out = "@(";
    for (size_t i = 0; i < events.size(); ++i) {
        if (i)
            out += " or ";
        if (events[i].edge == Edge::Pos)
            out += "posedge ";
        else if (events[i].edge == Edge::Neg)
            out += "negedge ";
        out += print(events[i].signal);
    }
    return out + ")";
}

class StmtPrinter {
public:
    explicit StmtPrinter(std::ostringstream& os) : os_(os) {}

    void stmt(const Stmt& s, int depth) {
        std::string pad(static_cast<size_t>(depth) * 2, ' ');
        switch (s.kind) {
        case StmtKind::Block:
        case StmtKind::Fork:
            os_ << pad << (s.kind == StmtKind::Fork ? "fork" : "begin");
            if (!s.name.empty())
                os_ << " : " << s.name;
            os_ << "\n";
            for (const auto& b : s.body)
                stmt(b, depth + 1);
            os_ << pad << (s.kind == StmtKind::Fork ? "join" : "end") << "\n";
            break;
        case StmtKind::If:
            os_ << pad << "if (" << print(s.cond) << ")\n";
            stmt(s.body[0], depth + 1);
            if (s.body.size() > 1) {
                os_ << pad << "else\n";
                stmt(s.body[1], depth + 1);
            }
            break;
        case StmtKind::Case:
            os_ << pad << (s.case_kind == CaseKind::Case ? "case" : s.case_kind == CaseKind::Casez ? "casez" : "casex")
                << " (" << print(s.cond) << ")\n";
            for (const auto& item : s.items) {
                os_ << pad << "  ";
                if (item.is_default()) {
                    os_ << "default:";
                } else {
                    for (size_t i = 0; i < item.labels.size(); ++i)
                        os_ << (i ? ", " : "") << print(item.labels[i]);
                    os_ << ":";
                }
                os_ << "\n";
                stmt(item.body[0], depth + 2);
            }
            os_ << pad << "endcase\n";
            break;
        case StmtKind::For:
            os_ << pad << "for (" << print(s.body[0].lhs) << " = " << print(s.body[0].rhs) << "; " << print(s.cond)
                << "; " << print(s.body[1].lhs) << " = " << print(s.body[1].rhs) << ")\n";
            stmt(s.body[2], depth + 1);
            break;
        case StmtKind::While:
        case StmtKind::Repeat:
            os_ << pad << (s.kind == StmtKind::While ? "while" : "repeat") << " (" << print(s.cond) << ")\n";
            stmt(s.body[0], depth + 1);
            break;
        case StmtKind::Forever:
            os_ << pad << "forever\n";
            stmt(s.body[0], depth + 1);
            break;
        case StmtKind::Blocking:
        case StmtKind::Nonblocking:
            os_ << pad << print(s.lhs) << (s.kind == StmtKind::Blocking ? " = " : " <= ") << print(s.rhs) << ";\n";
            break;
        case StmtKind::Delay:
            if (s.body.empty()) {
                os_ << pad << "#" << print(s.cond) << ";\n";
            } else if (s.body[0].kind == StmtKind::Blocking || s.body[0].kind == StmtKind::Nonblocking) {
                // Intra-assignment form: lhs <= #d rhs;
                const Stmt& a = s.body[0];
                os_ << pad << print(a.lhs) << (a.kind == StmtKind::Blocking ? " = #" : " <= #") << print(s.cond)
                    << " " << print(a.rhs) << ";\n";
            } else {
                os_ << pad << "#" << print(s.cond) << "\n";
                stmt(s.body[0], depth + 1);
            }
            break;
        case StmtKind::EventWait:
            os_ << pad << events_text(false, s.events);
            if (s.body.empty()) {
                os_ << ";\n";
            } else {
                os_ << "\n";
                stmt(s.body[0], depth + 1);
            }
            break;
        case StmtKind::SysTask:
            os_ << pad << s.name;
            if (!s.args.empty()) {
                os_ << "(";
                for (size_t i = 0; i < s.args.size(); ++i)
                    os_ << (i ? ", " : "") << (s.args[i].name == "string" ? s.args[i].literal : print(s.args[i]));
                os_ << ")";
            }
            os_ << ";\n";
            break;
        case StmtKind::Null:
            os_ << pad << ";\n";
            break;
        }
    }

private:
    std::ostringstream& os_;
};

void print_connections(std::ostringstream& os, const std::vector<Connection>& conns) {
    for (size_t i = 0; i < conns.size(); ++i) {
        if (i)
            os << ", ";
        if (!conns[i].name.empty())
            os << "." << conns[i].name << "(" << (conns[i].expr ? print(*conns[i].expr) : "") << ")";
        else
            os << print(*conns[i].expr);
    }
}

std::string port_text(const PortDecl& p) {
    std::string out(to_string(p.dir));
    out += " ";
    if (p.type_explicit)
        out += type_text(p.type) + " ";
    out += range_text(p.range);
    out += p.name;
    return out;
}

} // namespace

std::string print(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Number:
        return e.literal;
    case ExprKind::Ident:
        return e.name;
    case ExprKind::Index:
        return print(e.args[0]) + "[" + print(e.args[1]) + "]";
    case ExprKind::Range:
        return print(e.args[0]) + "[" + print(e.args[1]) + ":" + print(e.args[2]) + "]";
    case ExprKind::IndexedUp:
        return print(e.args[0]) + "[" + print(e.args[1]) + " +: " + print(e.args[2]) + "]";
    case ExprKind::IndexedDown:
        return print(e.args[0]) + "[" + print(e.args[1]) + " -: " + print(e.args[2]) + "]";
    case ExprKind::Unary:
        return "(" + std::string(op_symbol(e.op)) + print(e.args[0]) + ")";
    case ExprKind::Binary:
        return "(" + print(e.args[0]) + " " + std::string(op_symbol(e.op)) + " " + print(e.args[1]) + ")";
    case ExprKind::Ternary:
        return "(" + print(e.args[0]) + " ? " + print(e.args[1]) + " : " + print(e.args[2]) + ")";
    case ExprKind::Concat: {
        std::string out = "{";
        for (size_t i = 0; i < e.args.size(); ++i)
            out += (i ? ", " : "") + print(e.args[i]);
        return out + "}";
    }
    case ExprKind::Replicate:
        return "{" + print(e.args[0]) + print(e.args[1]) + "}";
    case ExprKind::Call: {
        std::string out = e.name + "(";
        for (size_t i = 0; i < e.args.size(); ++i)
            out += (i ? ", " : "") + print(e.args[i]);
        return out + ")";
    }
    }
    return "";
}

std::string print(const Module& m) {
    std::ostringstream os;
    os << "module " << m.name;
    if (!m.header_params.empty()) {
        os << " #(";
        for (size_t i = 0; i < m.header_params.size(); ++i) {
            const auto& p = m.header_params[i];
            os << (i ? ", " : "") << "parameter " << range_text(p.range) << p.name << " = " << print(p.value);
        }
        os << ")";
    }
    if (m.ansi) {
        if (!m.ports.empty()) {
            os << " (\n";
            for (size_t i = 0; i < m.ports.size(); ++i)
                os << "  " << port_text(m.ports[i]) << (i + 1 < m.ports.size() ? ",\n" : "\n");
            os << ")";
        }
    } else {
        os << "(";
        for (size_t i = 0; i < m.port_order.size(); ++i)
            os << (i ? ", " : "") << m.port_order[i].name;
        os << ")";
    }
    os << ";\n";
    StmtPrinter sp(os);
    for (const auto& item : m.items) {
        if (auto* p = std::get_if<PortDecl>(&item)) {
            if (!m.ansi)
                os << "  " << port_text(*p) << ";\n";
        } else if (auto* n = std::get_if<NetDecl>(&item)) {
            os << "  " << type_text(n->type) << " " << range_text(n->range) << n->name;
            if (n->init)
                os << " = " << print(*n->init);
            os << ";\n";
        } else if (auto* pd = std::get_if<ParamDecl>(&item)) {
            os << "  " << (pd->local ? "localparam " : "parameter ") << range_text(pd->range) << pd->name << " = "
               << print(pd->value) << ";\n";
        } else if (auto* a = std::get_if<ContAssign>(&item)) {
            os << "  assign " << print(a->lhs) << " = " << print(a->rhs) << ";\n";
        } else if (auto* al = std::get_if<AlwaysBlock>(&item)) {
            os << "  always";
            if (al->has_event_control)
                os << " " << events_text(al->star, al->events);
            os << "\n";
            sp.stmt(al->body, 2);
        } else if (auto* in = std::get_if<InitialBlock>(&item)) {
            os << "  initial\n";
            sp.stmt(in->body, 2);
        } else if (auto* inst = std::get_if<Instance>(&item)) {
            os << "  " << inst->module_name;
            if (!inst->params.empty()) {
                os << " #(";
                print_connections(os, inst->params);
                os << ")";
            }
            os << " " << inst->instance_name << " (";
            print_connections(os, inst->ports);
            os << ");\n";
        }
    }
    os << "endmodule\n";
    return os.str();
}

std::string print(const Ast& ast) {
    std::string out;
    for (const auto& m : ast.modules) {
        if (!out.empty())
            out += "\n";
        out += print(m);
    }
    return out;
}

} // namespace ttvga
