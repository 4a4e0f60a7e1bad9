#include <algorithm>
#include <filesystem>

#include <benchmark/benchmark.h>

#include "ttvga/corpus/corpus.hpp"
#include "ttvga/elab/elaborate.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/reference/interpreter.hpp"
#include "ttvga/sim/simulator.hpp"
#include "ttvga/tt/compliance.hpp"
#include "ttvga/util/files.hpp"

using namespace ttvga;

namespace {

const char* const kDesigns[] = {"blue_square", "red_car", "unicorn_carrot"};
constexpr uint64_t kCycles = 20000;

Ast load(const std::string& name, std::string& top) {
    ParseResult r = parse(read_file(std::filesystem::path(TTVGA_CORPUS_DIR) / name / "project.v"));
    top = *check_interface(*r.ast).detected_top;
    return std::move(*r.ast);
}

void BM_CompiledSimulator(benchmark::State& state) {
    std::string top;
    Ast ast = load(kDesigns[state.range(0)], top);
    Simulator sim(elaborate(ast, top, standard_library()));
    sim.reset(2);
    for (auto _ : state)
        sim.step(kCycles);
    state.SetLabel(kDesigns[state.range(0)]);
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kCycles));
}
BENCHMARK(BM_CompiledSimulator)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ReferenceInterpreter(benchmark::State& state) {
    std::string top;
    Ast ast = load(kDesigns[state.range(0)], top);
    reference::Interpreter interp(ast, top, standard_library());
    interp.reset(2);
    for (auto _ : state)
        interp.step(kCycles);
    state.SetLabel(kDesigns[state.range(0)]);
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * kCycles));
}
BENCHMARK(BM_ReferenceInterpreter)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_CorpusRun(benchmark::State& state) {
    auto entries = load_corpus(TTVGA_CORPUS_DIR);
    for (auto _ : state)
        benchmark::DoNotOptimize(run_corpus(entries, static_cast<int>(state.range(0))));
    state.SetLabel(state.range(0) == 1 ? "serial" : "parallel");
}
BENCHMARK(BM_CorpusRun)->Arg(1)->Arg(4)->Iterations(1)->UseRealTime()->Unit(benchmark::kSecond);

} // namespace

BENCHMARK_MAIN();
