// Prints one PASS/FAIL line per acceptance criterion and exits nonzero when
// any selected criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <sys/wait.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "random_design.hpp"
#include "sloc_mutation.hpp"
#include "test_support.hpp"
#include "ttvga/agent/agent.hpp"
#include "ttvga/corpus/corpus.hpp"
#include "ttvga/frontend/lint.hpp"
#include "ttvga/frontend/sloc.hpp"
#include "ttvga/sim/simulator.hpp"
#include "ttvga/vga/capture.hpp"

using namespace ttvga;
using namespace ttvga::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clk = std::chrono::steady_clock;

double seconds_since(Clk::time_point t0) { return std::chrono::duration<double>(Clk::now() - t0).count(); }

std::string fmt(double v, int digits = 2) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

std::vector<std::string> corpus_names() {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(corpus_dir()))
        if (fs::exists(e.path() / "project.v"))
            names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

std::string top_of(const Ast& ast) {
    for (const auto& m : ast.modules)
        if (m.name.rfind("tt_um_", 0) == 0)
            return m.name;
    throw std::runtime_error("no tt_um_ module");
}

Outcome vga_timing() {
    auto t0 = Clk::now();
    Simulator sim(elaborate_text(timing_probe_source(), "tt_um_timing_probe"));
    sim.reset(2);
    NetId out = sim.net("uo_out");
    std::vector<uint8_t> samples;
    samples.reserve(2 * 420000 + 1);
    for (int i = 0; i < 2 * 420000 + 1; ++i) {
        samples.push_back(static_cast<uint8_t>(sim.value(out)));
        sim.step(1);
    }
    PinCounts one = count_pins({samples.begin(), samples.begin() + 420000});
    PinCounts two = count_pins(samples);
    double t = seconds_since(t0);
    uint64_t period = two.vsync_falls.size() == 2 ? two.vsync_falls[1] - two.vsync_falls[0] : 0;
    bool exact = one.hsync_pulses == 525 && one.hsync_min_width == 96 && one.hsync_max_width == 96 &&
                 one.vsync_pulses == 1 && one.vsync_widths == std::vector<uint64_t>{1600} &&
                 one.display_on == 307200 && period == 420000;
    std::string d = "hsync " + std::to_string(one.hsync_pulses) + " pulses of " +
                    std::to_string(one.hsync_min_width) + "-" + std::to_string(one.hsync_max_width) +
                    " cycles, vsync " + std::to_string(one.vsync_pulses) + " pulse of " +
                    (one.vsync_widths.empty() ? "?" : std::to_string(one.vsync_widths[0] / 800)) +
                    " lines, display_on " + std::to_string(one.display_on) + ", period " + std::to_string(period) +
                    ", " + fmt(t) + " s";
    return {exact && t < 2.0, d};
}

Outcome oracle_equivalence() {
    auto t0 = Clk::now();
    std::mt19937_64 rng(20240601);
    size_t comb = 0, seq = 0;
    std::string first;
    for (uint32_t i = 0; i < 200; ++i) {
        auto diff = compare_combinational(random_combinational(rng, i));
        if (diff && first.empty())
            first = *diff;
        comb += diff ? 0 : 1;
    }
    for (uint32_t i = 0; i < 50; ++i) {
        auto diff = compare_sequential(random_sequential(rng, i), 7000 + i, 1000);
        if (diff && first.empty())
            first = *diff;
        seq += diff ? 0 : 1;
    }
    double t = seconds_since(t0);
    std::string d = std::to_string(comb) + "/200 combinational (exhaustive), " + std::to_string(seq) +
                    "/50 sequential (1000 cycles), " + fmt(t) + " s";
    if (!first.empty())
        d += "; first difference: " + first;
    return {comb == 200 && seq == 50 && t < 60.0, d};
}

Outcome two_phase() {
    Simulator sim(elaborate_text(fixture("swap.v"), "swap"));
    sim.reset(1);
    bool swap = sim.peek("out_a").bits == 1 && sim.peek("out_b").bits == 2;
    sim.step(1);
    swap = swap && sim.peek("out_a").bits == 2 && sim.peek("out_b").bits == 1;
    sim.step(1);
    swap = swap && sim.peek("out_a").bits == 1 && sim.peek("out_b").bits == 2;

    std::mt19937_64 rng(0x5EED);
    size_t tested = 0, ok = 0;
    std::string first;
    for (uint32_t i = 0; tested < 20 && i < 200; ++i) {
        RandomDesign d = random_sequential(rng, i);
        if (elaborate_text(d.source, d.top).registers.size() < 2)
            continue;
        ++tested;
        auto diff = compare_commit_orders(d, 9000 + i, 500);
        if (diff && first.empty())
            first = *diff;
        ok += diff ? 0 : 1;
    }
    std::string d = std::string("swap fixture ") + (swap ? "ok" : "FAILED") + ", commit-order permutation " +
                    std::to_string(ok) + "/" + std::to_string(tested) + " multi-register designs";
    if (!first.empty())
        d += "; " + first;
    return {swap && tested >= 20 && ok == tested, d};
}

Outcome lint_corpus() {
    size_t fixtures = 0, exact = 0;
    std::string wrong;
    for (const auto& e : fs::directory_iterator(fixtures_dir() / "lint")) {
        std::string text = read_file(e.path());
        std::string code = text.substr(11, text.find('\n') - 11);
        LintReport r = lint_synthesizable(parse_ok(text));
        ++fixtures;
        if (r.count(Severity::Error) == 1 && r.count(code) == 1)
            ++exact;
        else if (wrong.empty())
            wrong = e.path().filename().string();
    }
    size_t clean = 0;
    for (const auto& name : corpus_names())
        clean += lint_synthesizable(parse_ok(corpus_source(name))).count(Severity::Error) == 0 ? 1 : 0;
    std::string d = std::to_string(exact) + "/" + std::to_string(fixtures) + " fixtures give exactly their code, " +
                    std::to_string(clean) + "/8 corpus designs clean";
    if (!wrong.empty())
        d += "; wrong: " + wrong;
    return {fixtures >= 10 && exact == fixtures && clean == 8, d};
}

Outcome corpus_run() {
    auto t0 = Clk::now();
    std::string cmd = std::string("'") + TTVGA_CLI + "' --json corpus run '" + corpus_dir().string() + "'";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return {false, "could not start the CLI"};
    std::string out;
    char buf[4096];
    for (size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;)
        out.append(buf, n);
    int status = pclose(p);
    double t = seconds_since(t0);
    json j = json::parse(out, nullptr, false);
    if (j.is_discarded() || !j.contains("rows"))
        return {false, "unreadable CLI output"};
    size_t functional = 0, tapeout = 0, min_sloc = SIZE_MAX, max_sloc = 0;
    std::set<std::string> categories, tiles;
    for (const auto& r : j["rows"]) {
        functional += r["functional_ok"].get<bool>();
        tapeout += r["tapeout_ok"].get<bool>();
        categories.insert(r["category"].get<std::string>());
        tiles.insert(r["tiles"].get<std::string>());
        min_sloc = std::min<size_t>(min_sloc, r["sloc"]);
        max_sloc = std::max<size_t>(max_sloc, r["sloc"]);
    }
    bool shape = j["rows"].size() == 8 && categories.size() == 3 && tiles.count("1x1") && tiles.count("1x2") &&
                 tiles.count("2x2");
    bool exit_ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    std::string d = std::to_string(functional) + "/8 functional_ok, " + std::to_string(tapeout) +
                    "/8 tapeout_ok, " + std::to_string(categories.size()) + " categories, sloc " +
                    std::to_string(min_sloc) + "-" + std::to_string(max_sloc) + ", " +
                    std::to_string(tiles.size()) + " tile shapes, exit " +
                    (exit_ok ? "0" : "nonzero") + ", " + fmt(t) + " s";
    return {functional == 8 && tapeout == 8 && shape && exit_ok && t < 120.0, d};
}

Outcome golden_frames() {
    size_t match = 0;
    std::string wrong;
    for (const auto& name : corpus_names()) {
        Ast ast = parse_ok(corpus_source(name));
        Simulator sim(elaborate(ast, top_of(ast), standard_library()));
        sim.reset(2);
        std::string digest = capture_frames(sim, {}).frames.at(0).digest();
        auto meta = json::parse(read_file(corpus_dir() / name / "meta.json"));
        if (digest == meta["expected_frame_digests"][0].get<std::string>())
            ++match;
        else if (wrong.empty())
            wrong = name;
    }
    std::string d = std::to_string(match) + "/8 frame-0 digests match the committed goldens";
    if (!wrong.empty())
        d += "; first mismatch: " + wrong;
    return {match == 8, d};
}

std::string fenced(const std::string& code) { return "```verilog\n" + code + "```\n"; }

std::string flawed_design() {
    std::string text = corpus_source("blue_square");
    text.insert(text.rfind("endmodule"), "  initial begin end\n");
    return text;
}

AgentConfig acceptance_agent() {
    AgentConfig c = load_agent_config(data_dir());
    c.max_repair_rounds = 3;
    return c;
}

Outcome repair_loop() {
    AgentConfig config = acceptance_agent();
    DesignSession fixed_session("fixed");
    ScriptedMockClient fixed_mock(json{{"replies", {fenced(flawed_design()), fenced(corpus_source("blue_square"))}}});
    ChatResult fixed = chat_turn(fixed_session, "a blue square", config, fixed_mock);
    bool fixed_ok = fixed.llm_calls == 2 && fixed_mock.calls() == 2 && fixed.report && fixed.report->errors().empty() &&
                    fixed.report->functional_ok() && fixed.report->tapeout_ok();

    DesignSession stuck_session("stuck");
    ScriptedMockClient stuck_mock(json{{"replies", {fenced(flawed_design())}}, {"repeat_last", true}});
    ChatResult stuck = chat_turn(stuck_session, "a blue square", config, stuck_mock);
    size_t expected = 1 + config.max_repair_rounds;
    bool stuck_ok = stuck.llm_calls == expected && stuck_mock.calls() == expected && stuck.report &&
                    !stuck.report->errors().empty() && !stuck.error;

    std::string d = "flawed-then-fixed: " + std::to_string(fixed_mock.calls()) + " calls" +
                    (fixed_ok ? ", clean report" : "") + "; always-flawed: " + std::to_string(stuck_mock.calls()) +
                    " calls (expected " + std::to_string(expected) + ")" + (stuck_ok ? ", failing report" : "");
    return {fixed_ok && stuck_ok, d};
}

Outcome replay() {
    AgentConfig config = acceptance_agent();
    std::string good = fenced(corpus_source("blue_square"));
    std::vector<std::pair<json, std::vector<std::string>>> scenarios = {
        {json{{"replies", {good}}}, {"a blue square"}},
        {json{{"replies", {fenced(flawed_design()), good, "Glad it works."}}}, {"a blue square", "thanks"}},
        {json{{"replies", {fenced(flawed_design())}}, {"repeat_last", true}}, {"a blue square", "try again"}},
        {json{{"replies", {"Which colour?", good}}}, {"a square", "blue"}},
        {json{{"replies", json::array({json{{"error", "timeout"}}, good})}}, {"a blue square", "a blue square"}},
    };
    TempDir dir("ttvga-acceptance-replay");
    size_t identical = 0, transcripts = 0;
    for (size_t i = 0; i < scenarios.size(); ++i) {
        fs::path log = dir.path() / ("s" + std::to_string(i)) / "log.ndjson";
        {
            DesignSession s("s" + std::to_string(i));
            s.attach_log(log);
            ScriptedMockClient mock(scenarios[i].first);
            for (const auto& msg : scenarios[i].second)
                chat_turn(s, msg, config, mock);
        }
        DesignSession recorded = DesignSession::load(log, "s" + std::to_string(i));
        ReplayResult r = replay_session(recorded, scenarios[i].first, config);
        identical += r.identical ? 1 : 0;
        transcripts += r.original_transcript == r.replayed_transcript ? 1 : 0;
    }
    std::string d = std::to_string(identical) + "/" + std::to_string(scenarios.size()) +
                    " recorded sessions replay with identical transcripts and report digests";
    return {identical == scenarios.size() && transcripts == scenarios.size(), d};
}

Outcome sloc() {
    size_t blue = count_sloc(corpus_source("blue_square"));
    std::mt19937_64 rng(9);
    auto names = corpus_names();
    size_t blank_ok = 0, comment_ok = 0;
    for (int i = 0; i < 100; ++i) {
        std::string text = corpus_source(names[i % names.size()]);
        size_t base = count_sloc(text);
        blank_ok += count_sloc(with_blank_lines(text, rng)) == base ? 1 : 0;
        comment_ok += count_sloc(commented_out(text, rng)) == 0 ? 1 : 0;
    }
    std::string d = "blue square " + std::to_string(blue) + ", blank-line invariance " + std::to_string(blank_ok) +
                    "/100, comments-only zero " + std::to_string(comment_ok) + "/100";
    return {blue == 41 && blank_ok == 100 && comment_ok == 100, d};
}

Outcome frame_render_time() {
    double worst = 0;
    std::string worst_name;
    for (const auto& name : corpus_names()) {
        Ast ast = parse_ok(corpus_source(name));
        Simulator sim(elaborate(ast, top_of(ast), standard_library()));
        sim.reset(2);
        CaptureOptions opt;
        opt.frames = 1;
        capture_frames(sim, opt);  // aligned to a frame boundary from here on
        auto t0 = Clk::now();
        Frame f = capture_frames(sim, opt).frames.at(0);
        double t = seconds_since(t0);
        if (t > worst) {
            worst = t;
            worst_name = name;
        }
    }
    return {worst <= 2.0, "slowest full frame " + fmt(worst, 3) + " s (" + worst_name + ")"};
}

Outcome parallel_speedup() {
    auto entries = load_corpus(corpus_dir());
    auto t0 = Clk::now();
    auto serial = run_corpus(entries, 1);
    double t1 = seconds_since(t0);
    t0 = Clk::now();
    auto parallel = run_corpus(entries, 4);
    double t4 = seconds_since(t0);
    double speedup = t1 / t4;
    bool same = true;
    for (size_t i = 0; i < serial.size(); ++i)
        same = same && serial[i].to_json() == parallel[i].to_json();
    std::string d = "serial " + fmt(t1) + " s, 4 threads " + fmt(t4) + " s, speedup " + fmt(speedup) + "x on " +
                    std::to_string(std::thread::hardware_concurrency()) + " hardware threads" +
                    (same ? "" : ", rows DIFFER");
    return {speedup >= 2.0 && same, d};
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<std::string> only, exclude;
    app.add_option("--only", only, "Run only these criteria (e.g. 3 10b)");
    app.add_option("--exclude", exclude, "Skip these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {"1", "VGA timing", vga_timing},
        {"2", "simulator oracle equivalence", oracle_equivalence},
        {"3", "two-phase semantics", two_phase},
        {"4", "lint corpus", lint_corpus},
        {"5", "corpus run", corpus_run},
        {"6", "golden frames", golden_frames},
        {"7", "agent repair loop", repair_loop},
        {"8", "replay determinism", replay},
        {"9", "SLOC", sloc},
        {"10a", "frame render time", frame_render_time},
        {"10b", "corpus run parallel speedup", parallel_speedup},
    };

    auto selected = [&](const std::string& id) {
        auto has = [&](const std::vector<std::string>& list) {
            return std::find(list.begin(), list.end(), id) != list.end();
        };
        return (only.empty() || has(only)) && !has(exclude);
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected(c.id))
            continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.title << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
