#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"
#include "ttvga/elab/elaborate.hpp"
#include "ttvga/sim/simulator.hpp"

using namespace ttvga;
using namespace ttvga::testing;

namespace {

ElaborationError elab_error(const std::string& text, const std::string& top = "m") {
    try {
        elaborate_text(text, top);
    } catch (const ElaborationError& e) {
        return e;
    }
    FAIL("elaboration unexpectedly succeeded");
    return ElaborationError("", "");
}

} // namespace

TEST_SUITE("elab") {

TEST_CASE("the timing controller is expanded exactly once") {
    ElaboratedDesign d = elaborate_text(corpus_source("blue_square"), "tt_um_blue_square");
    CHECK(d.count_instances("hvsync_generator") == 1);
    auto it = std::find_if(d.instance_tree.begin(), d.instance_tree.end(),
                           [](const InstanceRecord& r) { return r.module == "hvsync_generator"; });
    REQUIRE(it != d.instance_tree.end());
    CHECK(it->builtin);
    CHECK(it->path == "hvsync_gen");
}

TEST_CASE("a two-net loop is a combinational cycle naming both nets") {
    auto e = elab_error("module m(output y);\n  wire a;\n  wire b;\n  assign a = b;\n  assign b = a;\n"
                        "  assign y = a;\nendmodule\n");
    CHECK(e.code() == elab_code::kCombCycle);
    CHECK(e.nets() == std::vector<std::string>{"a", "b"});
    CHECK(std::string(e.what()).find("a -> b") != std::string::npos);
}

TEST_CASE("the counter elaborates to one 8-bit register reset to zero") {
    ElaboratedDesign d = elaborate_text(fixture("counter.v"), "counter");
    REQUIRE(d.registers.size() == 1);
    CHECK(d.registers[0].width == 8);
    CHECK(d.registers[0].reset_value == 0);
    CHECK(d.nets[d.registers[0].q].name == "value");
}

TEST_CASE("elaboration errors use their own codes") {
    CHECK(elab_error("module m;\n  missing_block u1 ();\nendmodule\n").code() == elab_code::kUnresolvedInstance);
    CHECK(elab_error("module m; endmodule\n", "other").code() == elab_code::kUnknownTop);
    CHECK(elab_error("module m(input [3:0] n, output reg [7:0] y);\n  integer i;\n  always @* begin\n"
                     "    y = 0;\n    for (i = 0; i < n; i = i + 1) y = y + 1;\n  end\nendmodule\n")
              .code() == elab_code::kNonConstLoop);
    CHECK(elab_error("module m(input a, output y);\n  assign y = a;\n  assign y = ~a;\nendmodule\n").code() ==
          elab_code::kMultipleDrivers);
    CHECK(elab_error("module sub #(parameter W = 2) (output [W-1:0] q);\n  assign q = 0;\nendmodule\n"
                     "module m(output [1:0] y);\n  sub #(.DEPTH(3)) u (.q(y));\nendmodule\n")
              .code() == elab_code::kParamOverride);
    CHECK(elab_error("module m(input a, output y);\n  assign y = b;\nendmodule\n").code() == elab_code::kUndeclared);
}

TEST_CASE("parameters fold and constant loops unroll") {
    const std::string text = "module sub #(parameter W = 4) (input [W-1:0] a, output [W-1:0] q);\n"
                             "  localparam SHIFT = W / 2;\n"
                             "  assign q = a >> SHIFT;\n"
                             "endmodule\n"
                             "module m(input [7:0] a, output [7:0] y, output [3:0] ones);\n"
                             "  sub #(.W(8)) u (.a(a), .q(y));\n"
                             "  integer i;\n"
                             "  reg [3:0] n;\n"
                             "  always @* begin\n"
                             "    n = 0;\n"
                             "    for (i = 0; i < 8; i = i + 1)\n"
                             "      n = n + a[i];\n"
                             "  end\n"
                             "  assign ones = n;\n"
                             "endmodule\n";
    ElaboratedDesign d = elaborate_text(text, "m");
    CHECK(d.registers.empty());
    CHECK(d.find_net("u.q"));
    Simulator sim(d);
    sim.poke("a", 0xB6);
    CHECK(sim.peek("y").bits == 0x0B);
    CHECK(sim.peek("ones").bits == 5);
}

TEST_CASE("structural invariants hold for every corpus design") {
    for (const auto& e : std::filesystem::directory_iterator(corpus_dir())) {
        std::string text = read_file(e.path() / "project.v");
        Ast ast = parse_ok(text);
        std::string top;
        for (const auto& m : ast.modules)
            if (m.name.rfind("tt_um_", 0) == 0)
                top = m.name;
        ElaboratedDesign d = elaborate(ast, top, standard_library());
        INFO(e.path().filename().string());
        CHECK(d.check_invariants().empty());
        CHECK(d.count_instances("hvsync_generator") == 1);
    }
}

TEST_CASE("elaboration is deterministic") {
    std::string text = corpus_source("unicorn_carrot");
    ElaboratedDesign a = elaborate_text(text, "tt_um_unicorn_carrot");
    ElaboratedDesign b = elaborate_text(text, "tt_um_unicorn_carrot");
    CHECK(a.cells == b.cells);
    CHECK(a.nets == b.nets);
    CHECK(a.registers == b.registers);
    CHECK(a.comb_order == b.comb_order);
    CHECK(a.signals == b.signals);
}

TEST_CASE("an incomplete combinational assignment holds its last value") {
    const std::string text = "module m(input clk, input en, input d, output q);\n"
                             "  reg r;\n"
                             "  always @* begin\n"
                             "    if (en) r = d;\n"
                             "  end\n"
                             "  assign q = r;\n"
                             "endmodule\n";
    ElaboratedDesign d = elaborate_text(text, "m");
    CHECK(d.registers.size() == 1);
    Simulator sim(d);
    sim.poke("en", 1);
    sim.poke("d", 1);
    CHECK(sim.peek("q").bits == 1);
    sim.step(1);
    sim.poke("en", 0);
    sim.poke("d", 0);
    CHECK(sim.peek("q").bits == 1);
    sim.step(3);
    CHECK(sim.peek("q").bits == 1);
}

}
