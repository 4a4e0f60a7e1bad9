#include "ttvga/frontend/parser.hpp"

#include <cctype>
#include <set>

#include "ttvga/frontend/lexer.hpp"

namespace ttvga {

namespace {

struct Abort {
    bool to_endmodule = false;
};

uint64_t width_mask(uint32_t w) { return w >= 64 ? ~0ull : ((1ull << w) - 1); }

bool is_item_keyword(const Token& t) {
    static const std::set<std::string> kw = {"module", "endmodule", "always", "assign", "initial", "wire", "reg",
                                             "input", "output", "inout", "localparam", "parameter", "integer"};
    return t.kind == TokenKind::Ident && kw.count(t.text) > 0;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Ast run() {
        Ast ast;
        while (!at_end()) {
            if (peek().is("module")) {
                if (auto m = parse_module())
                    ast.modules.push_back(std::move(*m));
            } else {
                error("SYNTAX_ERROR", peek().span,
                      "Expected the word 'module' to start a design, but found '" + peek().text +
                          "'. Fix: every design must be written inside module ... endmodule.");
                // Skip to the next module.
                while (!at_end() && !peek().is("module"))
                    ++pos_;
            }
        }
        return ast;
    }

    std::vector<Diagnostic> errors;

private:
    // ---- token helpers -------------------------------------------------

    const Token& peek(size_t ahead = 0) const {
        size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    bool at_end() const { return peek().kind == TokenKind::End; }
    const Token& take() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size())
            ++pos_;
        return t;
    }
    bool accept(std::string_view text) {
        if (peek().is(text)) {
            take();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& code, Span at, std::string message, bool to_endmodule = false) {
        error(code, at, std::move(message));
        throw Abort{to_endmodule};
    }

    void error(const std::string& code, Span at, std::string message) {
        if (at.end <= at.begin)
            at.end = at.begin + 1;
        errors.push_back(Diagnostic{code, Severity::Error, std::move(message), at});
    }

    std::string describe(const Token& t) const {
        if (t.kind == TokenKind::End)
            return "the end of the file";
        return "'" + t.text + "'";
    }

    const Token& expect(std::string_view text, std::string_view what) {
        if (!peek().is(text)) {
            const Token& prev = toks_[pos_ > 0 ? pos_ - 1 : 0];
            Span at = peek().span;
            std::string msg = "Expected '" + std::string(text) + "' " + std::string(what) + ", but found " +
                              describe(peek()) + ".";
            if (text == ";") {
                at = prev.span;
                msg = "A ';' is missing after '" + prev.text + "'. Fix: end this statement with a semicolon.";
            }
            fail("SYNTAX_ERROR", at, msg + (text == ";" ? "" : " Fix: check this line for a typo."));
        }
        return take();
    }

    std::string expect_ident(std::string_view what) {
        const Token& t = peek();
        if (t.kind != TokenKind::Ident || is_keyword(t.text)) {
            if (t.kind == TokenKind::Ident && is_unsupported_keyword(t.text))
                unsupported(t);
            fail("SYNTAX_ERROR", t.span,
                 "Expected a name " + std::string(what) + ", but found " + describe(t) +
                     ". Fix: names use letters, digits and underscores and cannot be Verilog keywords.");
        }
        return take().text;
    }

    static bool is_unsupported_keyword(std::string_view w) {
        return w == "generate" || w == "genvar" || w == "function" || w == "task" || w == "logic" ||
               w == "always_ff" || w == "always_comb" || w == "always_latch" || w == "signed" ||
               w == "endgenerate" || w == "endfunction" || w == "endtask";
    }

    [[noreturn]] void unsupported(const Token& t) {
        std::string hint;
        if (t.text == "generate" || t.text == "genvar")
            hint = "Fix: write the repeated logic out by hand, or use a for loop with fixed bounds inside an always block.";
        else if (t.text == "function" || t.text == "task")
            hint = "Fix: write the logic directly with assign statements or always blocks.";
        else if (t.text == "signed")
            hint = "Fix: keep values unsigned and compare or subtract carefully.";
        else
            hint = "Fix: use plain Verilog (wire, reg, always @(posedge clk), always @*).";
        fail("UNSUPPORTED_CONSTRUCT", t.span,
             "'" + t.text + "' is not part of the Verilog this tool understands. " + hint);
    }

    // ---- modules ---------------------------------------------------------

    std::optional<Module> parse_module() {
        Module m;
        Span start = take().span;  // module
        try {
            m.name = expect_ident("after 'module'");
            if (accept("#")) {
                expect("(", "to start the parameter list");
                if (!peek().is(")")) {
                    do {
                        accept("parameter");
                        parse_param_list_entry(m.header_params, false, true);
                    } while (accept(","));
                }
                expect(")", "to close the parameter list");
            }
            if (accept("(")) {
                if (!peek().is(")")) {
                    const Token& first = peek();
                    if (first.is("input") || first.is("output") || first.is("inout")) {
                        parse_ansi_ports(m);
                    } else {
                        m.ansi = false;
                        do {
                            const Token& t = peek();
                            m.port_order.push_back(PortRef{expect_ident("in the port list"), t.span});
                        } while (accept(","));
                    }
                }
                expect(")", "to close the port list");
            }
            expect(";", "after the module header");
        } catch (const Abort&) {
            recover_to_endmodule();
            return std::nullopt;
        }

        while (true) {
            const Token& t = peek();
            if (t.kind == TokenKind::End) {
                error("SYNTAX_ERROR", start,
                      "Module '" + m.name + "' starting on line " + std::to_string(start.line) +
                          " has no 'endmodule'. Fix: add 'endmodule' at the end of the design.");
                return std::nullopt;
            }
            if (t.is("endmodule")) {
                m.span = start;
                m.span.end = take().span.end;
                break;
            }
            if (t.is("module")) {
                error("SYNTAX_ERROR", start,
                      "Module '" + m.name + "' starting on line " + std::to_string(start.line) +
                          " has no 'endmodule' before the next module begins. Fix: add 'endmodule'.");
                return std::nullopt;
            }
            try {
                parse_item(m);
            } catch (const Abort& a) {
                if (a.to_endmodule)
                    recover_to_endmodule(false);
                else
                    recover_to_semicolon();
            }
        }
        if (!m.ansi)
            resolve_non_ansi_ports(m);
        return m;
    }

    void recover_to_endmodule(bool consume = true) {
        while (!at_end() && !peek().is("endmodule") && !peek().is("module"))
            take();
        if (consume && peek().is("endmodule"))
            take();
    }

    void recover_to_semicolon() {
        while (!at_end() && !peek().is(";") && !peek().is("endmodule"))
            take();
        accept(";");
    }

    void recover_stmt() {
        while (!at_end() && !peek().is(";") && !peek().is("end") && !peek().is("endcase") && !peek().is("join") &&
               !is_item_keyword(peek()))
            take();
        accept(";");
    }

    void resolve_non_ansi_ports(Module& m) {
        for (const auto& ref : m.port_order) {
            const PortDecl* found = nullptr;
            for (const auto& item : m.items)
                if (auto* p = std::get_if<PortDecl>(&item); p && p->name == ref.name)
                    found = p;
            if (!found) {
                error("SYNTAX_ERROR", ref.span,
                      "Port '" + ref.name + "' is listed in the module header but never declared as input or "
                      "output. Fix: add a line like 'input " + ref.name + ";' inside the module.");
                continue;
            }
            PortDecl p = *found;
            for (const auto& item : m.items)
                if (auto* n = std::get_if<NetDecl>(&item); n && n->name == ref.name && n->type == NetType::Reg)
                    p.type = NetType::Reg;
            m.ports.push_back(std::move(p));
        }
        for (const auto& item : m.items) {
            if (auto* p = std::get_if<PortDecl>(&item)) {
                bool listed = false;
                for (const auto& ref : m.port_order)
                    listed |= ref.name == p->name;
                if (!listed)
                    error("SYNTAX_ERROR", p->span,
                          "'" + p->name + "' is declared as a port but is not listed in the module header. "
                          "Fix: add it to the list in module " + m.name + "(...).");
            }
        }
    }

    std::optional<RangeDecl> parse_optional_range() {
        if (!peek().is("["))
            return std::nullopt;
        take();
        RangeDecl r;
        r.msb = parse_expr();
        expect(":", "inside the bit range, as in [7:0]");
        r.lsb = parse_expr();
        expect("]", "to close the bit range");
        return r;
    }

    void reject_signed() {
        if (peek().is("signed"))
            unsupported(peek());
    }

    void parse_ansi_ports(Module& m) {
        Direction dir = Direction::Input;
        NetType type = NetType::Wire;
        bool explicit_type = false;
        std::optional<RangeDecl> range;
        do {
            const Token& t = peek();
            if (t.is("input") || t.is("output") || t.is("inout")) {
                take();
                dir = t.text == "input" ? Direction::Input : t.text == "output" ? Direction::Output : Direction::Inout;
                type = NetType::Wire;
                explicit_type = false;
                if (accept("wire")) {
                    explicit_type = true;
                } else if (accept("reg")) {
                    type = NetType::Reg;
                    explicit_type = true;
                } else if (peek().is("integer") || peek().is("real")) {
                    type = peek().text == "integer" ? NetType::Integer : NetType::Real;
                    explicit_type = true;
                    take();
                } else if (peek().is("logic")) {
                    unsupported(peek());
                }
                reject_signed();
                range = parse_optional_range();
            }
            PortDecl p;
            p.span = peek().span;
            p.name = expect_ident("for the port");
            p.dir = dir;
            p.type = type;
            p.type_explicit = explicit_type;
            p.range = range;
            m.ports.push_back(p);
            m.items.emplace_back(std::move(p));
        } while (accept(","));
    }

    void parse_param_list_entry(std::vector<ParamDecl>& out, bool local, bool header) {
        ParamDecl p;
        p.local = local;
        if (accept("integer")) {
        }
        reject_signed();
        p.range = parse_optional_range();
        p.span = peek().span;
        p.name = expect_ident("for the parameter");
        expect("=", "to give the parameter a value");
        p.value = parse_expr();
        p.span.end = prev_end();
        out.push_back(std::move(p));
        (void)header;
    }

    uint32_t prev_end() const { return toks_[pos_ > 0 ? pos_ - 1 : 0].span.end; }

    void parse_item(Module& m) {
        const Token& t = peek();
        Span start = t.span;
        if (t.kind != TokenKind::Ident) {
            fail("SYNTAX_ERROR", t.span,
                 "Did not expect " + describe(t) + " here. Fix: module contents must be declarations, "
                 "assign statements, always blocks or module instances.");
        }
        if (t.is("input") || t.is("output") || t.is("inout")) {
            if (m.ansi && !m.ports.empty())
                fail("SYNTAX_ERROR", t.span,
                     "Port '" + peek(1).text + "' is declared again inside the module, but the ports were "
                     "already declared in the module header. Fix: declare each port only once.");
            take();
            Direction dir = t.text == "input" ? Direction::Input : t.text == "output" ? Direction::Output : Direction::Inout;
            NetType type = NetType::Wire;
            bool explicit_type = false;
            if (accept("wire")) {
                explicit_type = true;
            } else if (accept("reg")) {
                type = NetType::Reg;
                explicit_type = true;
            }
            reject_signed();
            auto range = parse_optional_range();
            do {
                PortDecl p;
                p.span = peek().span;
                p.name = expect_ident("for the port");
                p.dir = dir;
                p.type = type;
                p.type_explicit = explicit_type;
                p.range = range;
                m.items.emplace_back(std::move(p));
            } while (accept(","));
            expect(";", "");
            return;
        }
        if (t.is("wire") || t.is("reg") || t.is("integer") || t.is("real")) {
            take();
            NetType type = t.text == "wire" ? NetType::Wire
                         : t.text == "reg"  ? NetType::Reg
                         : t.text == "integer" ? NetType::Integer
                                               : NetType::Real;
            reject_signed();
            auto range = type == NetType::Wire || type == NetType::Reg ? parse_optional_range() : std::nullopt;
            do {
                NetDecl n;
                n.span = peek().span;
                n.name = expect_ident("for the signal");
                n.type = type;
                n.range = range;
                if (peek().is("[")) {
                    fail("UNSUPPORTED_CONSTRUCT", peek().span,
                         "Memories (arrays like reg [7:0] mem [0:15]) are not supported. Fix: use a case "
                         "statement that returns the value for each address instead.");
                }
                if (accept("="))
                    n.init = parse_expr();
                n.span.end = prev_end();
                m.items.emplace_back(std::move(n));
            } while (accept(","));
            expect(";", "");
            return;
        }
        if (t.is("parameter") || t.is("localparam")) {
            take();
            bool local = t.text == "localparam";
            std::vector<ParamDecl> params;
            do {
                parse_param_list_entry(params, local, false);
            } while (accept(","));
            expect(";", "");
            for (auto& p : params)
                m.items.emplace_back(std::move(p));
            return;
        }
        if (t.is("assign")) {
            take();
            do {
                ContAssign a;
                a.span = start;
                a.lhs = parse_lvalue();
                expect("=", "in the assign statement");
                a.rhs = parse_expr();
                a.span.end = prev_end();
                m.items.emplace_back(std::move(a));
            } while (accept(","));
            expect(";", "");
            return;
        }
        if (t.is("always")) {
            take();
            AlwaysBlock a;
            a.span = start;
            if (peek().is("@")) {
                parse_event_control(a.star, a.events);
            } else {
                a.has_event_control = false;
            }
            a.body = parse_stmt();
            a.span.end = a.body.span.end;
            m.items.emplace_back(std::move(a));
            return;
        }
        if (t.is("initial")) {
            take();
            InitialBlock b;
            b.span = start;
            b.body = parse_stmt();
            b.span.end = b.body.span.end;
            m.items.emplace_back(std::move(b));
            return;
        }
        if (is_unsupported_keyword(t.text))
            unsupported(t);
        if (is_keyword(t.text)) {
            fail("SYNTAX_ERROR", t.span,
                 "'" + t.text + "' cannot start a line here. Fix: statements like if, case and for must be "
                 "inside an always block (always @(posedge clk) begin ... end).");
        }
        // Module instance.
        Instance inst;
        inst.span = start;
        inst.module_name = take().text;
        if (accept("#")) {
            expect("(", "to start the parameter values");
            if (!peek().is(")"))
                parse_connections(inst.params);
            expect(")", "to close the parameter values");
        }
        if (peek().kind != TokenKind::Ident || is_keyword(peek().text)) {
            fail("SYNTAX_ERROR", peek().span,
                 "Expected an instance name after '" + inst.module_name + "', but found " + describe(peek()) +
                     ". Fix: write it like '" + inst.module_name + " my_" + inst.module_name + " (...);' or check "
                     "that '" + inst.module_name + "' is spelled correctly.");
        }
        inst.instance_name = take().text;
        expect("(", "to start the port connections");
        if (!peek().is(")"))
            parse_connections(inst.ports);
        expect(")", "to close the port connections");
        inst.span.end = prev_end();
        expect(";", "");
        m.items.emplace_back(std::move(inst));
    }

    void parse_connections(std::vector<Connection>& out) {
        do {
            Connection c;
            c.span = peek().span;
            if (accept(".")) {
                c.name = expect_ident("after '.'");
                expect("(", "after the port name");
                if (!peek().is(")"))
                    c.expr = parse_expr();
                expect(")", "to close the connection");
            } else {
                c.expr = parse_expr();
            }
            c.span.end = prev_end();
            out.push_back(std::move(c));
        } while (accept(","));
    }

    void parse_event_control(bool& star, std::vector<Event>& events) {
        expect("@", "");
        if (accept("*")) {
            star = true;
            return;
        }
        expect("(", "after '@'");
        if (accept("*")) {
            star = true;
            expect(")", "after '@(*'");
            return;
        }
        do {
            Event e;
            if (accept("posedge"))
                e.edge = Edge::Pos;
            else if (accept("negedge"))
                e.edge = Edge::Neg;
            e.signal = parse_expr();
            events.push_back(std::move(e));
        } while (accept("or") || accept(","));
        expect(")", "to close the sensitivity list");
    }

    // ---- statements ------------------------------------------------------

    Stmt parse_stmt() {
        const Token& t = peek();
        Stmt s;
        s.span = t.span;
        if (t.is("begin") || t.is("fork")) {
            bool fork = t.is("fork");
            take();
            s.kind = fork ? StmtKind::Fork : StmtKind::Block;
            if (accept(":"))
                s.name = expect_ident("for the block label");
            std::string closer = fork ? "join" : "end";
            while (!peek().is(closer)) {
                const Token& n = peek();
                if (n.kind == TokenKind::End || is_item_keyword(n) || n.is("endcase")) {
                    fail("SYNTAX_ERROR", s.span,
                         "The '" + t.text + "' on line " + std::to_string(s.span.line) + " has no matching '" +
                             closer + "'. Fix: add '" + closer + "' where this block should finish.",
                         true);
                }
                try {
                    s.body.push_back(parse_stmt());
                } catch (const Abort& a) {
                    if (a.to_endmodule)
                        throw;
                    recover_stmt();
                }
            }
            s.span.end = take().span.end;
            return s;
        }
        if (t.is("if")) {
            take();
            s.kind = StmtKind::If;
            expect("(", "after 'if'");
            s.cond = parse_expr();
            expect(")", "to close the if condition");
            s.body.push_back(parse_stmt());
            if (accept("else"))
                s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.is("case") || t.is("casez") || t.is("casex")) {
            take();
            s.kind = StmtKind::Case;
            s.case_kind = t.text == "case" ? CaseKind::Case : t.text == "casez" ? CaseKind::Casez : CaseKind::Casex;
            expect("(", "after '" + t.text + "'");
            s.cond = parse_expr();
            expect(")", "to close the case selector");
            while (!peek().is("endcase")) {
                const Token& n = peek();
                if (n.kind == TokenKind::End || is_item_keyword(n) || n.is("end")) {
                    fail("SYNTAX_ERROR", s.span,
                         "The '" + t.text + "' on line " + std::to_string(s.span.line) +
                             " has no matching 'endcase'. Fix: add 'endcase' after the last choice.",
                         true);
                }
                CaseItem item;
                item.span = n.span;
                if (accept("default")) {
                    accept(":");
                } else {
                    do {
                        item.labels.push_back(parse_expr());
                    } while (accept(","));
                    expect(":", "after the case value");
                }
                item.body.push_back(parse_stmt());
                item.span.end = item.body.back().span.end;
                s.items.push_back(std::move(item));
            }
            s.span.end = take().span.end;
            return s;
        }
        if (t.is("for")) {
            take();
            s.kind = StmtKind::For;
            expect("(", "after 'for'");
            s.body.push_back(parse_simple_assign());
            expect(";", "");
            s.cond = parse_expr();
            expect(";", "");
            Stmt step = parse_simple_assign();
            expect(")", "to close the for loop header");
            s.body.push_back(std::move(step));
            s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.is("while") || t.is("repeat")) {
            take();
            s.kind = t.text == "while" ? StmtKind::While : StmtKind::Repeat;
            expect("(", "after '" + t.text + "'");
            s.cond = parse_expr();
            expect(")", "to close the loop condition");
            s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.is("forever")) {
            take();
            s.kind = StmtKind::Forever;
            s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.is("#")) {
            take();
            s.kind = StmtKind::Delay;
            s.cond = parse_primary();
            if (accept(";")) {
                s.span.end = prev_end();
                return s;
            }
            s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.is("@")) {
            s.kind = StmtKind::EventWait;
            bool star = false;
            parse_event_control(star, s.events);
            if (accept(";")) {
                s.span.end = prev_end();
                return s;
            }
            s.body.push_back(parse_stmt());
            s.span.end = s.body.back().span.end;
            return s;
        }
        if (t.kind == TokenKind::SysIdent) {
            take();
            s.kind = StmtKind::SysTask;
            s.name = t.text;
            if (accept("(")) {
                if (!peek().is(")")) {
                    do {
                        if (peek().kind == TokenKind::String) {
                            Expr str;
                            str.kind = ExprKind::Number;
                            str.literal = take().text;
                            str.span = toks_[pos_ - 1].span;
                            str.name = "string";
                            s.args.push_back(std::move(str));
                        } else {
                            s.args.push_back(parse_expr());
                        }
                    } while (accept(","));
                }
                expect(")", "to close the system task arguments");
            }
            expect(";", "");
            s.span.end = prev_end();
            return s;
        }
        if (t.is(";")) {
            take();
            s.kind = StmtKind::Null;
            s.span.end = prev_end();
            return s;
        }
        if (t.kind == TokenKind::Ident && is_keyword(t.text)) {
            if (is_unsupported_keyword(t.text))
                unsupported(t);
            if (t.is("end") || t.is("endcase") || t.is("else") || t.is("join"))
                fail("SYNTAX_ERROR", t.span,
                     "Found '" + t.text + "' without a matching start. Fix: check that every 'begin' has one "
                     "'end', every 'case' one 'endcase', and that 'else' directly follows an if.");
            fail("SYNTAX_ERROR", t.span,
                 "'" + t.text + "' cannot be used inside an always block. Fix: move declarations and assign "
                 "statements outside the always block.",
                 is_item_keyword(t));
        }
        s.kind = StmtKind::Nonblocking;
        s.lhs = parse_lvalue();
        if (accept("<=")) {
            s.kind = StmtKind::Nonblocking;
        } else if (accept("=")) {
            s.kind = StmtKind::Blocking;
        } else {
            fail("SYNTAX_ERROR", peek().span,
                 "Expected '=' or '<=' after '" + toks_[pos_ - 1].text + "', but found " + describe(peek()) +
                     ". Fix: assignments look like 'x <= y;' in clocked blocks or 'x = y;' elsewhere.");
        }
        if (peek().is("#")) {
            // Intra-assignment delay: keep it as a delay wrapper so lint can report it.
            Stmt d;
            d.kind = StmtKind::Delay;
            d.span = peek().span;
            take();
            d.cond = parse_primary();
            s.rhs = parse_expr();
            expect(";", "");
            s.span.end = prev_end();
            d.span.end = s.span.end;
            d.body.push_back(std::move(s));
            return d;
        }
        s.rhs = parse_expr();
        expect(";", "");
        s.span.end = prev_end();
        return s;
    }

    Stmt parse_simple_assign() {
        Stmt s;
        s.span = peek().span;
        s.kind = StmtKind::Blocking;
        s.lhs = parse_lvalue();
        expect("=", "in the for loop");
        s.rhs = parse_expr();
        s.span.end = prev_end();
        return s;
    }

    // ---- expressions -----------------------------------------------------

    Expr parse_lvalue() {
        const Token& t = peek();
        if (t.is("{")) {
            Expr e = parse_concat();
            if (e.kind == ExprKind::Replicate)
                fail("SYNTAX_ERROR", e.span, "A replication {N{...}} cannot be assigned to. Fix: list the signals.");
            return e;
        }
        if (t.kind != TokenKind::Ident || is_keyword(t.text)) {
            fail("SYNTAX_ERROR", t.span,
                 "Expected the name of the signal to assign, but found " + describe(t) + ".");
        }
        return parse_postfix(parse_ident());
    }

    Expr parse_ident() {
        Expr e;
        e.kind = ExprKind::Ident;
        e.span = peek().span;
        e.name = expect_ident("");
        while (peek().is(".") && peek(1).kind == TokenKind::Ident) {
            take();
            e.name += "." + take().text;
        }
        e.span.end = prev_end();
        return e;
    }

    Expr parse_postfix(Expr base) {
        while (peek().is("[")) {
            Span start = base.span;
            take();
            Expr first = parse_expr();
            Expr sel;
            if (accept(":")) {
                sel.kind = ExprKind::Range;
                sel.args.push_back(std::move(base));
                sel.args.push_back(std::move(first));
                sel.args.push_back(parse_expr());
            } else if (accept("+:")) {
                sel.kind = ExprKind::IndexedUp;
                sel.args.push_back(std::move(base));
                sel.args.push_back(std::move(first));
                sel.args.push_back(parse_expr());
            } else if (accept("-:")) {
                sel.kind = ExprKind::IndexedDown;
                sel.args.push_back(std::move(base));
                sel.args.push_back(std::move(first));
                sel.args.push_back(parse_expr());
            } else {
                sel.kind = ExprKind::Index;
                sel.args.push_back(std::move(base));
                sel.args.push_back(std::move(first));
            }
            expect("]", "to close the bit select");
            sel.span = start;
            sel.span.end = prev_end();
            base = std::move(sel);
        }
        return base;
    }

    Expr parse_concat() {
        Expr e;
        e.span = expect("{", "").span;
        Expr first = parse_expr();
        if (peek().is("{")) {
            e.kind = ExprKind::Replicate;
            e.args.push_back(std::move(first));
            e.args.push_back(parse_concat());
            expect("}", "to close the replication");
        } else {
            e.kind = ExprKind::Concat;
            e.args.push_back(std::move(first));
            while (accept(","))
                e.args.push_back(parse_expr());
            expect("}", "to close the concatenation");
        }
        e.span.end = prev_end();
        return e;
    }

    Expr parse_primary() {
        const Token& t = peek();
        if (t.kind == TokenKind::Number) {
            take();
            Expr e;
            e.kind = ExprKind::Number;
            e.literal = t.text;
            e.span = t.span;
            std::string why;
            auto lit = parse_number_literal(t.text, &why);
            if (!lit)
                fail("UNSUPPORTED_CONSTRUCT", t.span, why);
            e.value = lit->value;
            e.care = lit->care;
            e.width = lit->width;
            e.sized = lit->sized;
            return e;
        }
        if (t.is("(")) {
            take();
            Expr e = parse_expr();
            expect(")", "to close the parenthesis");
            return parse_postfix(std::move(e));
        }
        if (t.is("{"))
            return parse_postfix(parse_concat());
        if (t.kind == TokenKind::SysIdent) {
            take();
            Expr e;
            e.kind = ExprKind::Call;
            e.name = t.text;
            e.span = t.span;
            if (accept("(")) {
                if (!peek().is(")")) {
                    do {
                        e.args.push_back(parse_expr());
                    } while (accept(","));
                }
                expect(")", "to close the function call");
            }
            e.span.end = prev_end();
            return e;
        }
        if (t.kind == TokenKind::Ident && !is_keyword(t.text))
            return parse_postfix(parse_ident());
        if (t.kind == TokenKind::String)
            fail("UNSUPPORTED_CONSTRUCT", t.span, "Text strings can only be used inside $display. Fix: use numbers.");
        if (t.kind == TokenKind::Ident && is_unsupported_keyword(t.text))
            unsupported(t);
        fail("SYNTAX_ERROR", t.span,
             "Expected a value (a number, a signal name or a parenthesis), but found " + describe(t) + ".",
             t.kind == TokenKind::Ident && is_item_keyword(t));
    }

    Expr parse_unary() {
        static const std::pair<const char*, Op> ops[] = {
            {"+", Op::Plus},     {"-", Op::Neg},     {"!", Op::LogNot},  {"~", Op::BitNot},
            {"&", Op::RedAnd},   {"~&", Op::RedNand}, {"|", Op::RedOr},  {"~|", Op::RedNor},
            {"^", Op::RedXor},   {"~^", Op::RedXnor}, {"^~", Op::RedXnor},
        };
        const Token& t = peek();
        if (t.kind == TokenKind::Punct) {
            for (const auto& [sym, op] : ops) {
                if (t.text == sym) {
                    take();
                    Expr e;
                    e.kind = ExprKind::Unary;
                    e.op = op;
                    e.span = t.span;
                    e.args.push_back(parse_unary());
                    e.span.end = e.args[0].span.end;
                    return e;
                }
            }
        }
        return parse_primary();
    }

    static int precedence(const Token& t, Op& op) {
        if (t.kind != TokenKind::Punct)
            return -1;
        static const struct { const char* sym; Op op; int prec; } table[] = {
            {"||", Op::LogOr, 1},  {"&&", Op::LogAnd, 2}, {"|", Op::BitOr, 3},   {"^", Op::BitXor, 4},
            {"^~", Op::BitXnor, 4}, {"~^", Op::BitXnor, 4}, {"&", Op::BitAnd, 5}, {"==", Op::Eq, 6},
            {"!=", Op::Ne, 6},     {"===", Op::CaseEq, 6}, {"!==", Op::CaseNe, 6}, {"<", Op::Lt, 7},
            {"<=", Op::Le, 7},     {">", Op::Gt, 7},      {">=", Op::Ge, 7},     {"<<", Op::Shl, 8},
            {">>", Op::Shr, 8},    {"<<<", Op::AShl, 8},  {">>>", Op::AShr, 8},  {"+", Op::Add, 9},
            {"-", Op::Sub, 9},     {"*", Op::Mul, 10},    {"/", Op::Div, 10},    {"%", Op::Mod, 10},
            {"**", Op::Pow, 11},
        };
        for (const auto& row : table) {
            if (t.text == row.sym) {
                op = row.op;
                return row.prec;
            }
        }
        return -1;
    }

    Expr parse_binary(int min_prec) {
        Expr lhs = parse_unary();
        while (true) {
            Op op = Op::None;
            int prec = precedence(peek(), op);
            if (prec < min_prec)
                break;
            take();
            Expr rhs = parse_binary(prec + 1);
            Expr e;
            e.kind = ExprKind::Binary;
            e.op = op;
            e.span = lhs.span;
            e.span.end = rhs.span.end;
            e.args.push_back(std::move(lhs));
            e.args.push_back(std::move(rhs));
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_expr() {
        Expr c = parse_binary(1);
        if (!accept("?"))
            return c;
        Expr a = parse_expr();
        expect(":", "in the ?: expression");
        Expr b = parse_expr();
        Expr e;
        e.kind = ExprKind::Ternary;
        e.span = c.span;
        e.span.end = b.span.end;
        e.args.push_back(std::move(c));
        e.args.push_back(std::move(a));
        e.args.push_back(std::move(b));
        return e;
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

} // namespace

std::optional<NumberLiteral> parse_number_literal(std::string_view text, std::string* error) {
    auto fail = [&](std::string why) -> std::optional<NumberLiteral> {
        if (error)
            *error = std::move(why);
        return std::nullopt;
    };
    NumberLiteral lit;
    std::string clean;
    for (char c : text)
        if (c != '_' && c != ' ' && c != '\t')
            clean.push_back(c);
    size_t quote = clean.find('\'');
    if (quote == std::string::npos) {
        unsigned __int128 v = 0;
        for (char c : clean) {
            v = v * 10 + static_cast<unsigned>(c - '0');
            if (v > ~0ull)
                return fail("The number " + std::string(text) + " is too large; values are limited to 64 bits.");
        }
        lit.value = static_cast<uint64_t>(v);
        lit.width = lit.value > 0xFFFFFFFFull ? 64 : 32;
        return lit;
    }
    if (quote > 0) {
        uint64_t w = 0;
        for (size_t i = 0; i < quote; ++i) {
            w = w * 10 + static_cast<unsigned>(clean[i] - '0');
            if (w > 1000)
                break;
        }
        if (w == 0)
            return fail("A number cannot have a size of 0 bits. Fix: use a size of at least 1, as in 1'b0.");
        if (w > 64)
            return fail("The number " + std::string(text) +
                        " is wider than 64 bits, which this tool does not support. Fix: split it into smaller parts.");
        lit.width = static_cast<uint32_t>(w);
        lit.sized = true;
    }
    size_t k = quote + 1;
    if (k < clean.size() && (clean[k] == 's' || clean[k] == 'S'))
        return fail("Signed numbers ('s) are not supported. Fix: write the number without the s.");
    char base = static_cast<char>(std::tolower(static_cast<unsigned char>(clean[k])));
    std::string digits = clean.substr(k + 1);
    unsigned bits_per_digit = base == 'b' ? 1 : base == 'o' ? 3 : base == 'h' ? 4 : 0;
    unsigned __int128 value = 0;
    unsigned __int128 wild = 0;
    unsigned total_bits = 0;
    if (bits_per_digit == 0) {
        for (char c : digits) {
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                if (digits.size() == 1 && std::string_view("xXzZ?").find(c) != std::string_view::npos) {
                    wild = ~static_cast<unsigned __int128>(0);
                    break;
                }
                return fail("The decimal number " + std::string(text) + " contains a non-decimal digit.");
            }
            value = value * 10 + static_cast<unsigned>(c - '0');
            if (value > ~0ull)
                return fail("The number " + std::string(text) + " is too large; values are limited to 64 bits.");
        }
    } else {
        for (char c : digits) {
            unsigned d = 0;
            bool is_wild = false;
            char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (lc == 'x' || lc == 'z' || lc == '?') {
                is_wild = true;
            } else if (std::isdigit(static_cast<unsigned char>(lc))) {
                d = static_cast<unsigned>(lc - '0');
            } else if (lc >= 'a' && lc <= 'f') {
                d = static_cast<unsigned>(lc - 'a' + 10);
            } else {
                return fail("The digit '" + std::string(1, c) + "' is not allowed in " + std::string(text) + ".");
            }
            if (d >= (1u << bits_per_digit))
                return fail("The digit '" + std::string(1, c) + "' is not allowed in " + std::string(text) + ".");
            value = (value << bits_per_digit) | d;
            wild = (wild << bits_per_digit) | (is_wild ? ((1u << bits_per_digit) - 1) : 0u);
            total_bits += bits_per_digit;
            if (total_bits > 64 && (value >> 64) != 0)
                return fail("The number " + std::string(text) + " is wider than 64 bits.");
        }
        // A leading wildcard digit extends to the full width.
        if (!digits.empty()) {
            char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(digits[0])));
            if ((lc == 'x' || lc == 'z' || lc == '?') && lit.width > total_bits)
                wild |= ~static_cast<unsigned __int128>(0) << total_bits;
        }
    }
    uint64_t mask = width_mask(lit.width);
    lit.value = static_cast<uint64_t>(value) & mask;
    lit.care = ~static_cast<uint64_t>(wild) & mask;
    if (!lit.sized)
        lit.care = ~static_cast<uint64_t>(wild) & mask;
    return lit;
}

ParseResult parse(std::string_view text) {
    ParseResult result;
    LexResult lexed = lex(text);
    result.errors = std::move(lexed.errors);
    Parser parser(std::move(lexed.tokens));
    Ast ast = parser.run();
    for (auto& e : parser.errors)
        result.errors.push_back(std::move(e));
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.span.begin < b.span.begin; });
    if (result.errors.empty())
        result.ast = std::move(ast);
    return result;
}

ParseResult parse(const DesignSource& src) { return parse(src.text); }

} // namespace ttvga
