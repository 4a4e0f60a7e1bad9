#include <doctest.h>

#include <functional>
#include <sstream>
#include <thread>

#include "random_design.hpp"
#include "test_support.hpp"
#include "ttvga/sim/simulator.hpp"

using namespace ttvga;
using namespace ttvga::testing;

namespace {

Simulator counter_sim() { return Simulator(elaborate_text(fixture("counter.v"), "counter")); }

std::string comb_module(const std::string& body) {
    return "module m(input [7:0] a, input [7:0] b, output [7:0] y);\n" + body + "endmodule\n";
}

void require_sim_error(const std::function<void()>& fn, const std::string& code) {
    try {
        fn();
        FAIL("expected SimError " << code);
    } catch (const SimError& e) {
        CHECK(e.code() == code);
    }
}

} // namespace

TEST_SUITE("sim") {

TEST_CASE("counter starts at its reset value with no cycles elapsed") {
    Simulator sim = counter_sim();
    CHECK(sim.peek("count").bits == 0);
    CHECK(sim.cycle_count() == 0);
    CHECK(sim.at_fixed_point());
}

TEST_CASE("counter advances once per cycle and wraps modulo 256") {
    Simulator sim = counter_sim();
    sim.reset(1);
    sim.step(5);
    CHECK(sim.peek("count") == SignalValue{5, 8});
    sim.step(251);
    CHECK(sim.peek("count").bits == 0);

    Simulator fresh = counter_sim();
    fresh.poke("rst_n", 1);
    fresh.step(256);
    CHECK(fresh.peek("count").bits == 0);
}

TEST_CASE("reset returns the counter to zero and costs exactly its cycles") {
    Simulator sim = counter_sim();
    sim.poke("rst_n", 1);
    sim.step(10);
    CHECK(sim.peek("count").bits == 10);
    uint64_t before = sim.cycle_count();
    sim.reset(2);
    CHECK(sim.peek("count").bits == 0);
    CHECK(sim.cycle_count() == before + 2);
    CHECK(sim.peek("rst_n").bits == 1);
}

TEST_CASE("register swap commits both nonblocking assignments together") {
    Simulator sim(elaborate_text(fixture("swap.v"), "swap"));
    sim.reset(1);
    CHECK(sim.peek("out_a").bits == 1);
    CHECK(sim.peek("out_b").bits == 2);
    sim.step(1);
    CHECK(sim.peek("out_a").bits == 2);
    CHECK(sim.peek("out_b").bits == 1);

    Simulator reversed(elaborate_text(fixture("swap.v"), "swap"));
    reversed.set_commit_order({1, 0});
    reversed.reset(1);
    reversed.step(1);
    CHECK(reversed.peek("out_a").bits == 2);
    CHECK(reversed.peek("out_b").bits == 1);
}

TEST_CASE("combinational outputs follow pokes") {
    Simulator and_sim(elaborate_text(comb_module("  assign y = a & b;\n"), "m"));
    CHECK(and_sim.peek("y").bits == 0);

    Simulator xor_sim(elaborate_text(comb_module("  assign y = a ^ b;\n"), "m"));
    xor_sim.poke("a", 1);
    xor_sim.poke("b", 1);
    CHECK(xor_sim.peek("y").bits == 0);
    xor_sim.poke("b", 0);
    CHECK(xor_sim.peek("y").bits == 1);
    CHECK(xor_sim.at_fixed_point());
}

TEST_CASE("poke checks names and widths") {
    Simulator sim(elaborate_text(tt_module("tt_um_t", "  assign uo_out = ui_in;\n  assign uio_out = 0;\n"
                                                      "  assign uio_oe = 0;\n"),
                                 "tt_um_t"));
    sim.poke("ui_in", 0x01);
    CHECK(sim.peek("ui_in").bits == 0x01);
    CHECK(sim.peek("uo_out").bits == 0x01);
    require_sim_error([&] { sim.poke("ui_in", 256); }, sim_code::kWidthOverflow);
    require_sim_error([&] { sim.poke("nope", 1); }, sim_code::kUnknownSignal);
    require_sim_error([&] { sim.poke("uo_out", 1); }, sim_code::kNotAnInput);
    require_sim_error([&] { (void)sim.peek("nope"); }, sim_code::kUnknownSignal);
    require_sim_error([&] { sim.step(0); }, sim_code::kBadArgument);
    CHECK(sim.peek("ui_in").bits == 0x01);
}

TEST_CASE("reset on a stateless design leaves outputs as a function of inputs") {
    Simulator sim(elaborate_text(tt_module("tt_um_t", "  assign uo_out = ~ui_in;\n  assign uio_out = 0;\n"
                                                      "  assign uio_oe = 0;\n"),
                                 "tt_um_t"));
    sim.poke("ui_in", 0x0f);
    sim.reset(1);
    CHECK(sim.peek("uo_out").bits == 0xf0);
    CHECK(sim.cycle_count() == 1);
}

TEST_CASE("reset needs an rst_n input") {
    Simulator sim(elaborate_text(comb_module("  assign y = a;\n"), "m"));
    require_sim_error([&] { sim.reset(1); }, sim_code::kNoReset);
}

TEST_CASE("resource limits reject oversized designs") {
    ElaboratedDesign d = elaborate_text(corpus_source("blue_square"), "tt_um_blue_square");
    CHECK(d.cells.size() < SimLimits{}.max_cells);
    CHECK_NOTHROW(Simulator{d});
    SimLimits tiny;
    tiny.max_cells = 4;
    require_sim_error([&] { Simulator s(d, tiny); }, sim_code::kTooLarge);
}

TEST_CASE("division by zero yields all ones and warns once") {
    Simulator sim(elaborate_text(comb_module("  assign y = a / b;\n"), "m"));
    sim.poke("a", 7);
    CHECK(sim.peek("y").bits == 0xff);
    sim.poke("a", 9);
    CHECK(sim.peek("y").bits == 0xff);
    CHECK(sim.warnings().size() == 1);
    sim.poke("b", 2);
    CHECK(sim.peek("y").bits == 4);
}

TEST_CASE("stored values always fit their widths") {
    Simulator sim(elaborate_text(corpus_source("aquarium"), "tt_um_aquarium"));
    sim.reset(2);
    sim.step(5000);
    const auto& d = sim.design();
    for (NetId n = 0; n < d.nets.size(); ++n)
        CHECK(sim.value(n) <= width_mask(d.nets[n].width));
    CHECK(sim.at_fixed_point());
}

TEST_CASE("identical schedules give identical traces on any thread") {
    ElaboratedDesign d = elaborate_text(corpus_source("red_car"), "tt_um_red_car");
    auto trace = [&d] {
        Simulator sim(d);
        NetId out = sim.net("uo_out");
        sim.reset(2);
        std::vector<uint64_t> t;
        for (int i = 0; i < 3000; ++i) {
            if (i % 700 == 0)
                sim.poke("ui_in", static_cast<uint64_t>(i / 700) & 3);
            sim.step(1);
            t.push_back(sim.value(out));
        }
        return t;
    };
    auto here = trace();
    std::vector<uint64_t> there;
    std::thread worker([&] { there = trace(); });
    worker.join();
    CHECK(here == there);
}

TEST_CASE("value-change dump lists named nets and one timestep per cycle") {
    Simulator sim = counter_sim();
    std::ostringstream vcd;
    sim.dump_vcd(&vcd);
    sim.reset(1);
    sim.step(3);
    std::string text = vcd.str();
    CHECK(text.find("$enddefinitions") != std::string::npos);
    CHECK(text.find("count") != std::string::npos);
    CHECK(text.find("#4") != std::string::npos);
}

TEST_CASE("random combinational designs match the reference interpreter") {
    std::mt19937_64 rng(0xC0FFEE);
    for (uint32_t i = 0; i < 40; ++i) {
        RandomDesign d = random_combinational(rng, i);
        auto diff = compare_combinational(d);
        CHECK_MESSAGE(!diff, (diff ? *diff : ""));
    }
}

TEST_CASE("random sequential designs match the reference interpreter") {
    std::mt19937_64 rng(0xBEEF);
    for (uint32_t i = 0; i < 10; ++i) {
        RandomDesign d = random_sequential(rng, i);
        auto diff = compare_sequential(d, 1000 + i, 300);
        CHECK_MESSAGE(!diff, (diff ? *diff : ""));
    }
}

TEST_CASE("permuting register commits never changes a trace") {
    std::mt19937_64 rng(0xFACE);
    for (uint32_t i = 0; i < 10; ++i) {
        RandomDesign d = random_sequential(rng, i);
        auto diff = compare_commit_orders(d, 2000 + i, 300);
        CHECK_MESSAGE(!diff, (diff ? *diff : ""));
    }
}

}
