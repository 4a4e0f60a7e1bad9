#include <doctest.h>

#include <algorithm>
#include <random>

#include "sloc_mutation.hpp"
#include "test_support.hpp"
#include "ttvga/frontend/lexer.hpp"
#include "ttvga/frontend/lint.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/frontend/printer.hpp"
#include "ttvga/frontend/sloc.hpp"

using namespace ttvga;
using namespace ttvga::testing;

namespace {

std::vector<std::string> corpus_names() {
    std::vector<std::string> names;
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir()))
        if (std::filesystem::exists(e.path() / "project.v"))
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

/// Expected code from a fixture's first line, "// expect: CODE".
std::string expected_code(const std::string& text) {
    const std::string tag = "// expect: ";
    auto eol = text.find('\n');
    REQUIRE(text.rfind(tag, 0) == 0);
    return text.substr(tag.size(), eol - tag.size());
}

const Diagnostic* first_with(const LintReport& r, const std::string& code) {
    for (const auto& f : r.findings)
        if (f.code == code)
            return &f;
    return nullptr;
}

} // namespace

TEST_SUITE("frontend") {

TEST_CASE("minimal module parses with no ports") {
    ParseResult r = parse("module m; endmodule");
    REQUIRE(r.ok());
    REQUIRE(r.ast->modules.size() == 1);
    CHECK(r.ast->modules[0].name == "m");
    CHECK(r.ast->modules[0].ports.empty());
}

TEST_CASE("smallest I/O module has two ports and one continuous assign") {
    ParseResult r = parse("module m(input a, output y); assign y = a; endmodule");
    REQUIRE(r.ok());
    const Module& m = r.ast->modules[0];
    REQUIRE(m.ports.size() == 2);
    CHECK(m.ports[0].dir == Direction::Input);
    CHECK(m.ports[1].dir == Direction::Output);
    size_t assigns = std::count_if(m.items.begin(), m.items.end(),
                                   [](const ModuleItem& i) { return std::holds_alternative<ContAssign>(i); });
    CHECK(assigns == 1);
}

TEST_CASE("a missing end is reported at the line of the unmatched begin") {
    auto lines = split_lines(corpus_source("red_car"));
    // Line 39 opens the position block whose closing 'end' is on line 45.
    REQUIRE(lines[38].find("begin") != std::string::npos);
    REQUIRE(lines[44] == "  end");
    lines.erase(lines.begin() + 44);
    ParseResult r = parse(join_lines(lines));
    REQUIRE_FALSE(r.ok());
    CHECK(r.errors[0].code == "SYNTAX_ERROR");
    CHECK(r.errors[0].span.line == 39);
    CHECK(r.errors[0].message.find("begin") != std::string::npos);
}

TEST_CASE("lexical, syntax and unsupported errors carry distinct codes") {
    ParseResult lexical = parse("module m;\n  wire a = \"abc;\nendmodule\n");
    REQUIRE_FALSE(lexical.ok());
    CHECK(lexical.errors[0].code == "LEXICAL_ERROR");
    CHECK(lexical.errors[0].span.line == 2);

    ParseResult syntax = parse("module m;\n  wire a = ;\nendmodule\n");
    REQUIRE_FALSE(syntax.ok());
    CHECK(syntax.errors[0].code == "SYNTAX_ERROR");

    ParseResult unsupported = parse("module m;\n  generate\n  endgenerate\nendmodule\n");
    REQUIRE_FALSE(unsupported.ok());
    CHECK(unsupported.errors[0].code == "UNSUPPORTED_CONSTRUCT");
    CHECK(unsupported.errors[0].span.line == 2);

    ParseResult directive = parse("`define X 1\nmodule m;\nendmodule\n");
    REQUIRE_FALSE(directive.ok());
    CHECK(directive.errors[0].code == "UNSUPPORTED_CONSTRUCT");
}

TEST_CASE("parse errors recover to report several per run") {
    ParseResult r = parse("module m;\n  wire a = ;\n  wire b = ;\n  wire c;\nendmodule\n");
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.errors.size() >= 2);
    CHECK(r.errors[0].span.line == 2);
    CHECK(r.errors[1].span.line == 3);
}

TEST_CASE("harmless directives and CRLF line endings are accepted") {
    ParseResult r = parse("`default_nettype none\r\n`timescale 1ns/1ps\r\nmodule m(input a, output y);\r\n"
                          "  assign y = a;\r\nendmodule\r\n");
    CHECK(r.ok());
}

TEST_CASE("number literals decode sized, unsized and wildcard forms") {
    auto hex = parse_number_literal("8'hF0");
    REQUIRE(hex);
    CHECK(hex->value == 0xF0);
    CHECK(hex->width == 8);
    CHECK(hex->sized);

    auto plain = parse_number_literal("1_000");
    REQUIRE(plain);
    CHECK(plain->value == 1000);
    CHECK(plain->width == 32);
    CHECK_FALSE(plain->sized);

    auto bin = parse_number_literal("'b101");
    REQUIRE(bin);
    CHECK(bin->value == 5);

    auto wild = parse_number_literal("4'b1?0?");
    REQUIRE(wild);
    CHECK(wild->value == 0b1000);
    CHECK(wild->care == 0b1010);

    CHECK_FALSE(parse_number_literal("8'hZG"));
}

TEST_CASE("child spans nest inside their module and lie inside the text") {
    for (const auto& name : corpus_names()) {
        std::string text = corpus_source(name);
        Ast ast = parse_ok(text);
        for (const auto& m : ast.modules) {
            CHECK(m.span.end <= text.size());
            for (const auto& p : m.ports)
                CHECK(m.span.contains(p.span));
            for (const auto& item : m.items)
                std::visit([&](const auto& x) { CHECK(m.span.contains(x.span)); }, item);
        }
    }
}

TEST_CASE("printing and re-parsing gives a structurally identical tree") {
    std::vector<std::string> texts;
    for (const auto& name : corpus_names())
        texts.push_back(corpus_source(name));
    for (const auto& e : std::filesystem::directory_iterator(data_dir() / "examples"))
        texts.push_back(read_file(e.path() / "project.v"));
    for (const char* f : {"counter.v", "swap.v", "template.v"})
        texts.push_back(fixture(f));
    texts.push_back(std::string(hvsync_generator_source()));
    for (const auto& text : texts) {
        Ast original = parse_ok(text);
        std::string printed = print(original);
        ParseResult again = parse(printed);
        REQUIRE_MESSAGE(again.ok(), printed);
        CHECK(structurally_equal(original, *again.ast));
        CHECK(print(*again.ast) == printed);
    }
}

TEST_CASE("each banned-construct fixture yields exactly its one Error") {
    size_t fixtures = 0;
    for (const auto& e : std::filesystem::directory_iterator(fixtures_dir() / "lint")) {
        std::string text = read_file(e.path());
        std::string code = expected_code(text);
        LintReport r = lint_synthesizable(parse_ok(text));
        INFO(e.path().filename().string());
        CHECK(r.count(Severity::Error) == 1);
        CHECK(r.count(code) == 1);
        CHECK_FALSE(r.synthesizable);
        for (const auto& f : r.findings) {
            CHECK(f.span.valid());
            CHECK(f.span.end <= text.size());
        }
        ++fixtures;
    }
    CHECK(fixtures >= 10);
}

TEST_CASE("a #10 delay is one DELAY_CONTROL error") {
    LintReport r = lint_synthesizable(parse_ok(fixture("lint/delay_control.v")));
    CHECK(r.count(lint_code::kDelayControl) == 1);
    CHECK(r.count(Severity::Error) == 1);
    CHECK_FALSE(r.synthesizable);
}

TEST_CASE("every corpus design and example lints with zero errors") {
    for (const auto& name : corpus_names()) {
        LintReport r = lint_synthesizable(parse_ok(corpus_source(name)));
        INFO(name);
        CHECK(r.count(Severity::Error) == 0);
        CHECK(r.synthesizable);
    }
    for (const auto& e : std::filesystem::directory_iterator(data_dir() / "examples")) {
        LintReport r = lint_synthesizable(parse_ok(read_file(e.path() / "project.v")));
        CHECK(r.synthesizable);
    }
}

TEST_CASE("an if without else in combinational logic warns of a latch at the if") {
    const std::string text = "module m(input en, input d, output q);\n"
                             "  reg r;\n"
                             "  always @* begin\n"
                             "    if (en) r = d;\n"
                             "  end\n"
                             "  assign q = r;\n"
                             "endmodule\n";
    LintReport r = lint_synthesizable(parse_ok(text));
    const Diagnostic* latch = first_with(r, lint_code::kLatchInferred);
    REQUIRE(latch);
    CHECK(latch->severity == Severity::Warning);
    CHECK(latch->span.line == 4);
    CHECK(r.synthesizable);
}

TEST_CASE("advisory findings do not block synthesis") {
    const std::string text = "module m(input clk, input rst_n, input [3:0] a, output [3:0] y);\n"
                             "  reg [3:0] r;\n"
                             "  wire spare;\n"
                             "  always @(posedge clk) begin\n"
                             "    r <= a;\n"
                             "    $display(\"r=%d\", r);\n"
                             "  end\n"
                             "  assign y = r;\n"
                             "endmodule\n";
    LintReport r = lint_synthesizable(parse_ok(text));
    CHECK(r.count(lint_code::kSystemTask) == 1);
    CHECK(r.count(lint_code::kNoReset) == 1);
    auto spare = std::find_if(r.findings.begin(), r.findings.end(), [](const Diagnostic& d) {
        return d.code == lint_code::kUnusedNet && d.message.find("'spare'") != std::string::npos;
    });
    REQUIRE(spare != r.findings.end());
    CHECK(spare->severity == Severity::Info);
    CHECK(r.synthesizable);
    CHECK(r.count(Severity::Error) == 0);
}

TEST_CASE("lint messages are formatted with code and line") {
    LintReport r = lint_synthesizable(parse_ok(fixture("lint/initial_block.v")));
    const Diagnostic* d = first_with(r, lint_code::kInitialBlock);
    REQUIRE(d);
    std::string line = format_diagnostic(*d);
    CHECK(line.rfind("INITIAL_BLOCK (line " + std::to_string(d->span.line) + "): ", 0) == 0);
    CHECK(line.find("Fix:") != std::string::npos);
}

TEST_CASE("sloc counts only lines with code") {
    CHECK(count_sloc("") == 0);
    CHECK(count_sloc("// header\n\nmodule m;\nendmodule\n") == 2);
    CHECK(count_sloc("wire a; // trailing comment\n") == 1);
    CHECK(count_sloc("/* one\n two\n three */\nwire a;\n") == 1);
    CHECK(count_sloc("wire a; /* starts\n ends */ wire b;\n") == 2);
    CHECK(count_sloc("   \t\n\n") == 0);
    CHECK(count_sloc("wire a;\r\n\r\nwire b;\r\n") == 2);
    CHECK_THROWS_AS(count_sloc("wire a;\n/* never closed\n"), SlocError);
}

TEST_CASE("the blue square has 41 effective lines") {
    CHECK(count_sloc(corpus_source("blue_square")) == 41);
}

TEST_CASE("sloc properties hold over randomized corpus mutations") {
    std::mt19937_64 rng(41);
    auto names = corpus_names();
    for (int i = 0; i < 100; ++i) {
        std::string text = corpus_source(names[i % names.size()]);
        auto lines = split_lines(text);
        size_t base = count_sloc(text);
        CHECK(base <= lines.size());
        CHECK(count_sloc(with_blank_lines(text, rng)) == base);
        CHECK(count_sloc(commented_out(text, rng)) == 0);
    }
}

}
