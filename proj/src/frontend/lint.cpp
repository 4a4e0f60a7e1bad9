#include "ttvga/frontend/lint.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace ttvga {

size_t LintReport::count(Severity severity) const {
    return static_cast<size_t>(std::count_if(findings.begin(), findings.end(),
                                             [&](const Diagnostic& d) { return d.severity == severity; }));
}

size_t LintReport::count(std::string_view code) const {
    return static_cast<size_t>(
        std::count_if(findings.begin(), findings.end(), [&](const Diagnostic& d) { return d.code == code; }));
}

namespace {

bool reset_like_name(std::string_view name) {
    std::string lower;
    for (char c : name)
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return lower.find("rst") != std::string::npos || lower.find("reset") != std::string::npos;
}

/// Base signal names written by an lvalue.
void lvalue_names(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
    case ExprKind::Ident:
        out.push_back(e.name);
        break;
    case ExprKind::Index:
    case ExprKind::Range:
    case ExprKind::IndexedUp:
    case ExprKind::IndexedDown:
        lvalue_names(e.args[0], out);
        break;
    case ExprKind::Concat:
        for (const auto& a : e.args)
            lvalue_names(a, out);
        break;
    default:
        break;
    }
}

/// Identifiers read by an lvalue (its select indices).
void lvalue_reads(const Expr& e, std::set<std::string>& reads);

void expr_reads(const Expr& e, std::set<std::string>& reads) {
    visit_exprs(e, [&](const Expr& x) {
        if (x.kind == ExprKind::Ident)
            reads.insert(x.name);
    });
}

void lvalue_reads(const Expr& e, std::set<std::string>& reads) {
    switch (e.kind) {
    case ExprKind::Index:
    case ExprKind::Range:
    case ExprKind::IndexedUp:
    case ExprKind::IndexedDown:
        lvalue_reads(e.args[0], reads);
        for (size_t i = 1; i < e.args.size(); ++i)
            expr_reads(e.args[i], reads);
        break;
    case ExprKind::Concat:
        for (const auto& a : e.args)
            lvalue_reads(a, reads);
        break;
    default:
        break;
    }
}

class ModuleLinter {
public:
    ModuleLinter(const Module& m, std::vector<Diagnostic>& out) : m_(m), out_(out) {
        for (const auto& p : m.header_params)
            params_.insert(p.name);
        for (const auto& item : m.items)
            if (auto* p = std::get_if<ParamDecl>(&item))
                params_.insert(p->name);
    }

    void run() {
        for (const auto& item : m_.items) {
            if (auto* p = std::get_if<PortDecl>(&item)) {
                if (p->type == NetType::Real)
                    real_type(p->name, p->span);
            } else if (auto* n = std::get_if<NetDecl>(&item)) {
                if (n->type == NetType::Real)
                    real_type(n->name, n->span);
                if (n->init) {
                    expr(*n->init);
                    expr_reads(*n->init, reads_);
                }
            } else if (auto* pd = std::get_if<ParamDecl>(&item)) {
                expr(pd->value);
            } else if (auto* a = std::get_if<ContAssign>(&item)) {
                expr(a->lhs);
                expr(a->rhs);
                expr_reads(a->rhs, reads_);
                lvalue_reads(a->lhs, reads_);
            } else if (auto* al = std::get_if<AlwaysBlock>(&item)) {
                always(*al);
            } else if (auto* in = std::get_if<InitialBlock>(&item)) {
                add(lint_code::kInitialBlock, Severity::Error, in->span,
                    "'initial' blocks only run in simulation and are ignored when the chip is built. Fix: give "
                    "registers their starting value inside the reset branch (if (!rst_n) ...).");
                stmt(in->body, false);
            } else if (auto* inst = std::get_if<Instance>(&item)) {
                for (const auto& c : inst->params)
                    if (c.expr) {
                        expr(*c.expr);
                        expr_reads(*c.expr, reads_);
                    }
                for (const auto& c : inst->ports)
                    if (c.expr) {
                        expr(*c.expr);
                        expr_reads(*c.expr, reads_);
                    }
            }
        }
        unused();
    }

private:
    void add(const char* code, Severity sev, Span span, std::string message) {
        out_.push_back(Diagnostic{code, sev, std::move(message), span});
    }

    void real_type(const std::string& name, Span span) {
        add(lint_code::kRealType, Severity::Error, span,
            "'" + name + "' uses the 'real' (decimal fraction) type, which cannot be turned into hardware. "
            "Fix: use a reg or wire with a bit width, such as reg [15:0].");
    }

    void expr(const Expr& e) {
        visit_exprs(e, [&](const Expr& x) {
            if (x.is_hierarchical())
                add(lint_code::kHierarchicalRef, Severity::Error, x.span,
                    "'" + x.name + "' reaches inside another module with a dotted name, which chips cannot do. "
                    "Fix: bring the signal out through an output port of that module.");
        });
    }

    void always(const AlwaysBlock& a) {
        bool clocked = false;
        if (!a.has_event_control) {
            if (a.body.kind != StmtKind::Delay)
                add(lint_code::kEventControl, Severity::Error, a.span,
                    "This always block has no @(...) trigger, so it would run forever without waiting. Fix: use "
                    "'always @(posedge clk)' for registers or 'always @*' for combinational logic.");
        } else if (!a.star) {
            size_t edges = 0, levels = 0, clk_pos = 0;
            bool other_posedge = false, negedge = false;
            std::string other_name;
            for (const auto& e : a.events) {
                expr(e.signal);
                expr_reads(e.signal, reads_);
                if (e.edge == Edge::None) {
                    ++levels;
                    continue;
                }
                ++edges;
                bool is_clk = e.signal.kind == ExprKind::Ident && e.signal.name == "clk";
                if (e.edge == Edge::Neg)
                    negedge = true;
                else if (is_clk)
                    ++clk_pos;
                else {
                    other_posedge = true;
                    other_name = e.signal.kind == ExprKind::Ident ? e.signal.name : "another signal";
                }
            }
            if (edges > 0) {
                clocked = true;
                if (edges == 1 && other_posedge && levels == 0) {
                    add(lint_code::kMultipleClocks, Severity::Error, a.span,
                        "This block is clocked by '" + other_name + "', but the chip has a single clock named "
                        "'clk'. Fix: use 'always @(posedge clk)' and turn '" + other_name +
                        "' into an enable condition inside the block.");
                } else if (!(edges == 1 && clk_pos == 1 && levels == 0)) {
                    std::string what = negedge ? "a negedge trigger" : "more than one trigger";
                    add(lint_code::kEventControl, Severity::Error, a.span,
                        "This always block uses " + what + ". Only 'always @(posedge clk)' and 'always @*' "
                        "are allowed. Fix: use 'always @(posedge clk)' and test the reset inside the block "
                        "with if (!rst_n).");
                }
            }
        }
        stmt(a.body, clocked);
        if (clocked)
            reset_check(a);
        else if (a.has_event_control)
            latch_check(a);
    }

    void stmt(const Stmt& s, bool clocked) {
        visit_stmts(s, [&](const Stmt& x) {
            expr(x.lhs);
            expr(x.rhs);
            expr(x.cond);
            for (const auto& a : x.args)
                expr(a);
            expr_reads(x.rhs, reads_);
            expr_reads(x.cond, reads_);
            lvalue_reads(x.lhs, reads_);
            for (const auto& a : x.args)
                expr_reads(a, reads_);
            for (const auto& item : x.items)
                for (const auto& l : item.labels)
                    expr_reads(l, reads_);
            switch (x.kind) {
            case StmtKind::Delay:
                add(lint_code::kDelayControl, Severity::Error, x.span,
                    "Delays like '#" + (x.cond.literal.empty() ? x.cond.name : x.cond.literal) +
                        "' only work in simulation; real chips ignore them. Fix: remove the delay and count "
                        "clock cycles with a counter register instead.");
                break;
            case StmtKind::While:
            case StmtKind::Repeat:
            case StmtKind::Forever: {
                std::string kw = x.kind == StmtKind::While ? "while" : x.kind == StmtKind::Repeat ? "repeat" : "forever";
                add(lint_code::kUnboundedLoop, Severity::Error, x.span,
                    "A '" + kw + "' loop cannot be built as hardware because its number of steps is not fixed. "
                    "Fix: use a for loop with constant limits, or a counter that advances once per clock.");
                break;
            }
            case StmtKind::Fork:
                add(lint_code::kForkJoin, Severity::Error, x.span,
                    "fork/join is a simulation-only feature. Fix: use begin/end; hardware already runs in parallel.");
                break;
            case StmtKind::EventWait:
                add(lint_code::kEventControl, Severity::Error, x.span,
                    "Waiting with @(...) inside a block only works in simulation. Fix: put the trigger on the "
                    "always block itself, as in 'always @(posedge clk)'.");
                break;
            case StmtKind::SysTask:
                add(lint_code::kSystemTask, Severity::Warning, x.span,
                    "'" + x.name + "' prints messages during simulation only and is ignored here and in the "
                    "chip. Fix: remove it once the design works.");
                break;
            case StmtKind::For:
                loop_check(x);
                break;
            default:
                break;
            }
        });
        (void)clocked;
    }

    bool constant_expr(const Expr& e, const std::string& loop_var) const {
        bool ok = true;
        visit_exprs(e, [&](const Expr& x) {
            if (x.kind == ExprKind::Ident && x.name != loop_var && !params_.count(x.name))
                ok = false;
        });
        return ok;
    }

    void loop_check(const Stmt& f) {
        const Stmt& init = f.body[0];
        const Stmt& step = f.body[1];
        std::string var = init.lhs.kind == ExprKind::Ident ? init.lhs.name : "";
        bool ok = !var.empty() && step.lhs.kind == ExprKind::Ident && step.lhs.name == var &&
                  constant_expr(init.rhs, "") && constant_expr(f.cond, var) && constant_expr(step.rhs, var);
        if (!ok)
            add(lint_code::kNonConstLoopBound, Severity::Error, f.span,
                "This for loop's limits depend on a signal, so the number of repeats is not known when the chip "
                "is built. Fix: use numbers or parameters in the loop header, e.g. for (i = 0; i < 8; i = i + 1).");
    }

    // ---- latch inference -------------------------------------------------

    using NameSet = std::set<std::string>;

    struct LatchSite {
        Span span;
        NameSet dropped;
        bool is_case = false;
    };

    NameSet walk(const Stmt& s, const NameSet& in, std::vector<LatchSite>& sites) {
        switch (s.kind) {
        case StmtKind::Blocking:
        case StmtKind::Nonblocking: {
            NameSet out = in;
            std::vector<std::string> names;
            lvalue_names(s.lhs, names);
            for (auto& n : names) {
                assigned_.insert(n);
                out.insert(n);
            }
            return out;
        }
        case StmtKind::Block: {
            NameSet cur = in;
            for (const auto& b : s.body)
                cur = walk(b, cur, sites);
            return cur;
        }
        case StmtKind::If: {
            NameSet t = walk(s.body[0], in, sites);
            NameSet e = s.body.size() > 1 ? walk(s.body[1], in, sites) : in;
            NameSet out;
            std::set_intersection(t.begin(), t.end(), e.begin(), e.end(), std::inserter(out, out.end()));
            NameSet dropped;
            for (const auto& n : t)
                if (!out.count(n))
                    dropped.insert(n);
            for (const auto& n : e)
                if (!out.count(n))
                    dropped.insert(n);
            if (!dropped.empty())
                sites.push_back(LatchSite{s.span, dropped, false});
            return out;
        }
        case StmtKind::Case: {
            std::vector<NameSet> branches;
            bool has_default = false;
            for (const auto& item : s.items) {
                has_default |= item.is_default();
                branches.push_back(walk(item.body[0], in, sites));
            }
            if (!has_default && !full_case(s))
                branches.push_back(in);
            if (branches.empty())
                return in;
            NameSet out = branches[0];
            NameSet all;
            for (const auto& b : branches) {
                NameSet next;
                std::set_intersection(out.begin(), out.end(), b.begin(), b.end(), std::inserter(next, next.end()));
                out = std::move(next);
                all.insert(b.begin(), b.end());
            }
            NameSet dropped;
            for (const auto& n : all)
                if (!out.count(n))
                    dropped.insert(n);
            if (!dropped.empty())
                sites.push_back(LatchSite{s.span, dropped, true});
            return out;
        }
        case StmtKind::For:
            return walk(s.body[2], in, sites);
        default:
            return in;
        }
    }

    static bool full_case(const Stmt& s) {
        // A case on a selector of known small width whose sized labels cover every value.
        std::set<uint64_t> values;
        uint32_t width = 0;
        for (const auto& item : s.items) {
            for (const auto& l : item.labels) {
                if (l.kind != ExprKind::Number || !l.sized || l.care != ((l.width >= 64) ? ~0ull : ((1ull << l.width) - 1)))
                    return false;
                width = std::max(width, l.width);
                values.insert(l.value);
            }
        }
        return width > 0 && width < 16 && values.size() == (1ull << width);
    }

    void latch_check(const AlwaysBlock& a) {
        assigned_.clear();
        std::vector<LatchSite> sites;
        NameSet final_set = walk(a.body, {}, sites);
        std::set<std::string> reported;
        for (const auto& site : sites) {
            std::vector<std::string> names;
            for (const auto& n : site.dropped)
                if (!final_set.count(n) && !reported.count(n))
                    names.push_back(n);
            if (names.empty())
                continue;
            std::string list;
            for (size_t i = 0; i < names.size(); ++i) {
                list += (i ? ", " : "") + names[i];
                reported.insert(names[i]);
            }
            add(lint_code::kLatchInferred, Severity::Warning, site.span,
                "'" + list + "' is not given a value in every case of this " + (site.is_case ? "case" : "if") +
                    ", so the chip would need a latch to remember it. Fix: add " +
                    (site.is_case ? "a 'default:' branch" : "an 'else' branch") +
                    " or set a default value at the top of the always block.");
        }
    }

    // ---- registers without reset ------------------------------------------

    void reset_check(const AlwaysBlock& a) {
        const Stmt* top = &a.body;
        while (top->kind == StmtKind::Block && top->body.size() == 1)
            top = &top->body[0];
        NameSet with_reset;
        if (top->kind == StmtKind::If && is_reset_condition(top->cond)) {
            std::vector<LatchSite> ignore;
            with_reset = walk(top->body[0], {}, ignore);
        }
        std::map<std::string, Span> first_assign;
        visit_stmts(a.body, [&](const Stmt& x) {
            if (x.kind != StmtKind::Blocking && x.kind != StmtKind::Nonblocking)
                return;
            std::vector<std::string> names;
            lvalue_names(x.lhs, names);
            for (auto& n : names)
                first_assign.emplace(n, x.span);
        });
        // For-loop counters are elaboration-time only.
        visit_stmts(a.body, [&](const Stmt& x) {
            if (x.kind == StmtKind::For && x.body[0].lhs.kind == ExprKind::Ident)
                first_assign.erase(x.body[0].lhs.name);
        });
        for (const auto& [name, span] : first_assign) {
            if (with_reset.count(name))
                continue;
            add(lint_code::kNoReset, Severity::Warning, span,
                "Register '" + name + "' is never reset, so it may start with any value on the real chip. "
                "Fix: give it a value in the reset branch, e.g. if (!rst_n) " + name + " <= 0;");
        }
    }

    void unused() {
        for (const auto& item : m_.items) {
            const std::string* name = nullptr;
            Span span;
            if (auto* n = std::get_if<NetDecl>(&item)) {
                name = &n->name;
                span = n->span;
            } else if (auto* p = std::get_if<PortDecl>(&item); p && p->dir == Direction::Input) {
                name = &p->name;
                span = p->span;
            }
            // A leading "_unused" is the template's idiom for deliberately unused signals.
            if (!name || reads_.count(*name) || name->rfind("_unused", 0) == 0)
                continue;
            add(lint_code::kUnusedNet, Severity::Info, span,
                "'" + *name + "' is declared but never used. Fix: remove it, or use it if something is missing.");
        }
    }

    const Module& m_;
    std::vector<Diagnostic>& out_;
    std::set<std::string> params_;
    std::set<std::string> reads_;
    std::set<std::string> assigned_;
};

} // namespace

bool is_reset_condition(const Expr& cond) {
    switch (cond.kind) {
    case ExprKind::Ident:
        return reset_like_name(cond.name);
    case ExprKind::Unary:
        return (cond.op == Op::LogNot || cond.op == Op::BitNot) && is_reset_condition(cond.args[0]);
    case ExprKind::Binary:
        if (cond.op == Op::Eq || cond.op == Op::Ne || cond.op == Op::CaseEq || cond.op == Op::CaseNe)
            return (is_reset_condition(cond.args[0]) && cond.args[1].kind == ExprKind::Number) ||
                   (is_reset_condition(cond.args[1]) && cond.args[0].kind == ExprKind::Number);
        return false;
    default:
        return false;
    }
}

LintReport lint_synthesizable(const Ast& ast) {
    LintReport report;
    for (const auto& m : ast.modules)
        ModuleLinter(m, report.findings).run();
    std::stable_sort(report.findings.begin(), report.findings.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.span.begin < b.span.begin; });
    report.synthesizable = report.count(Severity::Error) == 0;
    return report;
}

} // namespace ttvga
