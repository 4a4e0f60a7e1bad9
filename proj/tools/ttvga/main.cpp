#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttvga/agent/agent.hpp"
#include "ttvga/agent/validate.hpp"
#include "ttvga/corpus/corpus.hpp"
#include "ttvga/elab/elaborate.hpp"
#include "ttvga/frontend/lint.hpp"
#include "ttvga/frontend/parser.hpp"
#include "ttvga/frontend/sloc.hpp"
#include "ttvga/service/service.hpp"
#include "ttvga/tt/compliance.hpp"
#include "ttvga/util/files.hpp"
#include "ttvga/vga/image.hpp"
#include "ttvga/vga/timing.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ttvga;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

/// Thrown for problems with the invocation itself (missing files, bad flags).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string load(const std::string& path) {
    if (!fs::is_regular_file(path))
        throw UsageError("cannot read " + path + ": no such file");
    return read_file(path);
}

json diagnostics_json(const std::vector<Diagnostic>& list) {
    json a = json::array();
    for (const auto& d : list)
        a.push_back(diagnostic_to_json(d));
    return a;
}

void print_diagnostics(const std::vector<Diagnostic>& list) {
    for (const auto& d : list)
        std::cout << "  " << to_string(d.severity) << " " << format_diagnostic(d) << "\n";
}

ScheduledPoke parse_poke(const std::string& text) {
    // name=value@cycle
    size_t eq = text.find('='), at = text.find('@');
    if (eq == std::string::npos || eq == 0)
        throw UsageError("bad --poke '" + text + "', expected name=value@cycle");
    ScheduledPoke p;
    p.input = text.substr(0, eq);
    try {
        std::string value = text.substr(eq + 1, at == std::string::npos ? std::string::npos : at - eq - 1);
        p.value = std::stoull(value, nullptr, 0);
        p.cycle = at == std::string::npos ? 0 : std::stoull(text.substr(at + 1));
    } catch (const std::exception&) {
        throw UsageError("bad --poke '" + text + "', expected name=value@cycle");
    }
    return p;
}

void print_report(const ValidationReport& r) {
    json j = r.to_json();
    std::cout << "parse:       " << j["parse"]["status"].get<std::string>() << "\n";
    std::cout << "interface:   " << j["interface"]["status"].get<std::string>() << "\n";
    std::cout << "lint:        " << j["lint"]["status"].get<std::string>() << "\n";
    std::cout << "simulation:  " << j["simulation"]["status"].get<std::string>();
    if (r.sim_ok())
        std::cout << " (" << r.frame_digests.size() << " frame" << (r.frame_digests.size() == 1 ? "" : "s") << ")";
    std::cout << "\n";
    std::cout << "area:        " << j["area"]["status"].get<std::string>();
    if (r.area)
        std::cout << " (tiles " << r.area->tiles.str() << ", " << static_cast<long long>(r.area->cell_units)
                  << " units)";
    std::cout << "\n";
    std::cout << "sloc:        " << r.sloc << "\n";
    std::cout << "functional:  " << (r.functional_ok() ? "ok" : "FAILED") << "\n";
    std::cout << "tapeout:     " << (r.tapeout_ok() ? "ok" : "FAILED") << "\n";
    if (!r.errors().empty()) {
        std::cout << "errors:\n";
        print_diagnostics(r.errors());
    }
}

int cmd_lint(const std::string& file, bool as_json) {
    ParseResult parsed = parse(DesignSource{load(file), Origin::User, 0});
    if (!parsed.ok()) {
        if (as_json)
            std::cout << json{{"parse_ok", false}, {"errors", diagnostics_json(parsed.errors)}}.dump(2) << "\n";
        else {
            std::cout << file << ": the code could not be read\n";
            print_diagnostics(parsed.errors);
        }
        return kFailed;
    }
    LintReport report = lint_synthesizable(*parsed.ast);
    if (as_json) {
        std::cout << json{{"parse_ok", true},
                          {"synthesizable", report.synthesizable},
                          {"findings", diagnostics_json(report.findings)}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << file << ": " << (report.synthesizable ? "synthesizable" : "NOT synthesizable") << " ("
                  << report.count(Severity::Error) << " errors, " << report.count(Severity::Warning) << " warnings)\n";
        print_diagnostics(report.findings);
    }
    return report.synthesizable ? kOk : kFailed;
}

int cmd_check(const std::string& file, double capacity, bool as_json) {
    ParseResult parsed = parse(DesignSource{load(file), Origin::User, 0});
    json out = {{"parse_ok", parsed.ok()}};
    bool ok = parsed.ok();
    std::vector<Diagnostic> problems = parsed.errors;
    if (ok) {
        ComplianceReport c = check_interface(*parsed.ast);
        out["interface_ok"] = c.interface_ok;
        out["top"] = c.detected_top ? json(*c.detected_top) : json(nullptr);
        problems.insert(problems.end(), c.findings.begin(), c.findings.end());
        ok = c.interface_ok;
        if (ok) {
            LintReport lint = lint_synthesizable(*parsed.ast);
            out["synthesizable"] = lint.synthesizable;
            for (const auto& d : lint.findings)
                if (d.severity == Severity::Error)
                    problems.push_back(d);
            try {
                ElaboratedDesign design = elaborate(*parsed.ast, *c.detected_top, standard_library());
                AreaEstimate a = estimate_area(design, capacity);
                out["tiles"] = a.tiles.str();
                out["cell_units"] = a.cell_units;
                out["utilization"] = a.utilization;
                out["fits"] = a.fits;
                ok = lint.synthesizable && a.fits;
            } catch (const ElaborationError& e) {
                problems.push_back({e.code(), Severity::Error, e.what(), e.span()});
                ok = false;
            }
        }
    }
    out["tapeout_preflight_ok"] = ok;
    out["problems"] = diagnostics_json(problems);
    if (as_json) {
        std::cout << out.dump(2) << "\n";
    } else {
        if (out.contains("top") && !out["top"].is_null())
            std::cout << "top: " << out["top"].get<std::string>() << "\n";
        if (out.contains("tiles"))
            std::cout << "tiles: " << out["tiles"].get<std::string>() << "\n"
                      << "cell units: " << static_cast<long long>(out["cell_units"].get<double>()) << "\n";
        std::cout << "pre-flight: " << (ok ? "ok" : "FAILED") << "\n";
        print_diagnostics(problems);
    }
    return ok ? kOk : kFailed;
}

int cmd_render(const std::string& file, uint32_t frames, const std::string& out_dir,
               const std::vector<std::string>& pokes, bool as_json) {
    ValidateOptions options;
    options.frames = frames;
    for (const auto& p : pokes)
        options.pokes.push_back(parse_poke(p));
    std::vector<Frame> captured;
    ValidationReport r = validate(DesignSource{load(file), Origin::User, 0}, Depth::Quick, options, &captured);
    json files = json::array();
    if (r.sim_ok()) {
        for (size_t i = 0; i < captured.size(); ++i) {
            fs::path path = fs::path(out_dir) / ("frame" + std::to_string(i) + ".ppm");
            write_file_atomic(path, encode_ppm(captured[i]));
            files.push_back({{"path", path.string()}, {"digest", captured[i].digest()}});
        }
    }
    if (as_json) {
        std::cout << json{{"ok", r.sim_ok()}, {"frames", files}, {"errors", diagnostics_json(r.errors())}}.dump(2)
                  << "\n";
    } else if (r.sim_ok()) {
        for (const auto& f : files)
            std::cout << f["path"].get<std::string>() << "  " << f["digest"].get<std::string>() << "\n";
    } else {
        std::cout << "rendering failed:\n";
        print_diagnostics(r.errors());
    }
    return r.sim_ok() ? kOk : kFailed;
}

int cmd_sloc(const std::string& file, bool as_json) {
    size_t n = 0;
    try {
        n = count_sloc(load(file));
    } catch (const SlocError& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return kFailed;
    }
    if (as_json)
        std::cout << json{{"file", file}, {"sloc", n}}.dump(2) << "\n";
    else
        std::cout << n << "\n";
    return kOk;
}

int cmd_validate(const std::string& file, const std::string& depth, bool as_json) {
    Depth d;
    try {
        d = depth_from_string(depth);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ValidationReport r = validate(DesignSource{load(file), Origin::User, 0}, d);
    if (as_json)
        std::cout << r.to_json().dump(2) << "\n";
    else
        print_report(r);
    return r.functional_ok() && r.tapeout_ok() ? kOk : kFailed;
}

struct ChatOptions {
    std::string mock;
    std::string endpoint;
    std::string model;
    std::string key;
    std::string session_dir;
    std::string data_dir = TTVGA_DATA_DIR;
    std::vector<std::string> messages;
    bool replay = false;
    std::string export_dir;
    uint32_t repair_rounds = 3;
};

void print_turn(const ConversationTurn& t) {
    std::cout << "[" << to_string(t.role) << (t.failed ? ", not delivered" : "") << "]\n" << t.text << "\n\n";
}

int cmd_chat(const ChatOptions& o, bool as_json) {
    AgentConfig config = load_agent_config(o.data_dir);
    config.max_repair_rounds = std::min(o.repair_rounds, kMaxRepairRounds);
    if (auto problems = check_examples(config); !problems.empty()) {
        for (const auto& p : problems)
            std::cerr << p << "\n";
        return kUsage;
    }
    if (o.mock.empty() && o.endpoint.empty())
        throw UsageError("chat needs --mock <script> or --endpoint <url>");
    json script;
    if (!o.mock.empty())
        script = json::parse(load(o.mock));

    fs::path log;
    if (!o.session_dir.empty())
        log = fs::path(o.session_dir) / "log.ndjson";

    if (o.replay) {
        if (log.empty() || !fs::exists(log))
            throw UsageError("--replay needs --session pointing at a recorded session");
        if (o.mock.empty())
            throw UsageError("--replay needs the --mock script the session was recorded with");
        DesignSession recorded = DesignSession::load(log, "replay");
        ReplayResult r = replay_session(recorded, script, config);
        if (as_json)
            std::cout << json{{"identical", r.identical},
                              {"original_digests", r.original_digests},
                              {"replayed_digests", r.replayed_digests}}
                             .dump(2)
                      << "\n";
        else
            std::cout << (r.identical ? "replay identical" : "replay DIFFERS") << " ("
                      << std::count(r.original_transcript.begin(), r.original_transcript.end(), '\n') << " turns, "
                      << r.original_digests.size() << " revisions)\n";
        return r.identical ? kOk : kFailed;
    }

    std::unique_ptr<LlmClient> client;
    if (!o.mock.empty())
        client = std::make_unique<ScriptedMockClient>(script);
    else
        client = std::make_unique<HttpLlmClient>(HttpLlmSettings{o.endpoint, o.model, o.key});

    DesignSession session = !log.empty() && fs::exists(log) ? DesignSession::load(log, "cli") : DesignSession("cli");
    if (!log.empty() && !session.log_path())
        session.attach_log(log);

    size_t printed = session.turns().size();
    std::optional<ValidationReport> last_report;
    json results = json::array();
    auto run = [&](const std::string& msg) {
        ChatResult r = chat_turn(session, msg, config, *client);
        if (r.report)
            last_report = r.report;
        if (as_json) {
            results.push_back({{"reply", r.reply},
                               {"revision", r.revision ? json(*r.revision) : json(nullptr)},
                               {"report", r.report ? r.report->to_json() : json(nullptr)},
                               {"llm_calls", r.llm_calls},
                               {"error", r.error ? json(*r.error) : json(nullptr)}});
            return;
        }
        for (; printed < session.turns().size(); ++printed)
            print_turn(session.turns()[printed]);
        if (r.error)
            std::cout << "error: " << *r.error << "\n\n";
        if (r.report) {
            std::cout << "revision " << *r.revision << " (" << r.llm_calls << " model calls)\n";
            print_report(*r.report);
            std::cout << "\n";
        }
    };

    if (!o.messages.empty()) {
        for (const auto& m : o.messages)
            run(m);
    } else {
        std::string line;
        if (!as_json)
            std::cout << "Describe the VGA design you want. Send an empty line to finish.\n> " << std::flush;
        while (std::getline(std::cin, line) && !line.empty()) {
            run(line);
            if (!as_json)
                std::cout << "> " << std::flush;
        }
    }

    int rc = kOk;
    json exported = nullptr;
    if (!o.export_dir.empty()) {
        ExportOutcome out = export_session(session, o.export_dir, "Tiny Tapeout student");
        exported = out.ok ? json::parse(out.manifest->to_json()) : json(out.message);
        if (!as_json)
            std::cout << (out.ok ? "exported to " + o.export_dir : out.message) << "\n";
        rc = out.ok ? kOk : kFailed;
    }
    if (as_json)
        std::cout << json{{"turns", results}, {"status", std::string(to_string(session.status()))}, {"export", exported}}
                         .dump(2)
                  << "\n";
    return rc;
}

int cmd_corpus_run(const std::string& dir, int threads, bool serial, bool as_json) {
    std::vector<CorpusEntry> entries;
    try {
        entries = load_corpus(dir);
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    std::vector<CorpusRow> rows = run_corpus(entries, serial ? 1 : threads);
    bool all = std::all_of(rows.begin(), rows.end(), [](const CorpusRow& r) { return r.passed(); });
    if (as_json) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& r : rows)
            a.push_back(r.to_json());
        std::cout << nlohmann::ordered_json{{"rows", a}, {"all_passed", all}}.dump(2) << "\n";
    } else {
        std::cout << format_corpus_table(rows);
    }
    return all ? kOk : kFailed;
}

Service* g_service = nullptr;

int cmd_serve(ServiceConfig config, const std::string& data_files, const std::string& mock) {
    config.agent = load_agent_config(data_files);
    if (auto problems = check_examples(config.agent); !problems.empty()) {
        for (const auto& p : problems)
            std::cerr << p << "\n";
        return kUsage;
    }
    if (!mock.empty())
        config.mock_script = json::parse(load(mock));
    apply_env_overrides(config);
    if (!config.mock_script && config.llm.endpoint.empty())
        throw UsageError("serve needs --mock <script> or --endpoint <url> (or TTVGA_LLM_ENDPOINT)");
    Service service(config);
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service)
            g_service->stop();
    });
    std::cerr << "listening on http://" << config.host << ":" << config.port << "\n";
    if (!service.listen()) {
        std::cerr << "cannot listen on " << config.host << ":" << config.port << "\n";
        return kUsage;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tiny Tapeout VGA design playground tools"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    app.add_flag("--json", as_json, "Print machine-readable JSON");

    std::string file;
    auto* lint = app.add_subcommand("lint", "Check a design for non-synthesizable constructs");
    lint->add_option("file", file, "Verilog file")->required();

    double capacity = kDefaultCapacityPer1x1;
    auto* check = app.add_subcommand("check", "Interface compliance and area estimate");
    check->add_option("file", file, "Verilog file")->required();
    check->add_option("--capacity", capacity, "Area units per 1x1 tile")->check(CLI::PositiveNumber);

    uint32_t frames = 1;
    std::string out_dir = ".";
    std::vector<std::string> pokes;
    auto* render = app.add_subcommand("render", "Simulate and write frames as PPM images");
    render->add_option("file", file, "Verilog file")->required();
    render->add_option("--frames", frames, "Number of frames")->check(CLI::Range(1u, 600u));
    render->add_option("--out", out_dir, "Output directory");
    render->add_option("--poke", pokes, "Set an input during capture: name=value@cycle");

    auto* sloc = app.add_subcommand("sloc", "Count effective lines of code");
    sloc->add_option("file", file, "Verilog file")->required();

    std::string depth = "full";
    auto* validate_cmd = app.add_subcommand("validate", "Run the whole validation pipeline");
    validate_cmd->add_option("file", file, "Verilog file")->required();
    validate_cmd->add_option("--depth", depth, "quick (1 frame) or full (3 frames)");

    ChatOptions chat_opts;
    auto* chat = app.add_subcommand("chat", "Chat with the design agent");
    chat->add_option("--mock", chat_opts.mock, "Scripted reply file instead of a real model");
    chat->add_option("--endpoint", chat_opts.endpoint, "Chat-completions base URL");
    chat->add_option("--model", chat_opts.model, "Model name");
    chat->add_option("--key", chat_opts.key, "API key")->envname("TTVGA_LLM_KEY");
    chat->add_option("--session", chat_opts.session_dir, "Directory holding the session log");
    chat->add_option("--data", chat_opts.data_dir, "Directory with prompts/ and examples/");
    chat->add_option("-m,--message", chat_opts.messages, "Message to send (repeatable); otherwise read stdin");
    chat->add_option("--repair-rounds", chat_opts.repair_rounds, "Automatic repair attempts per message");
    chat->add_option("--export", chat_opts.export_dir, "Export the final design to this directory");
    chat->add_flag("--replay", chat_opts.replay, "Replay a recorded session and compare");

    std::string corpus_dir;
    int threads = 0;
    bool serial = false;
    auto* corpus = app.add_subcommand("corpus", "Corpus operations");
    corpus->require_subcommand(1);
    auto* corpus_run = corpus->add_subcommand("run", "Fully validate every design in a corpus directory");
    corpus_run->add_option("dir", corpus_dir, "Corpus directory")->required();
    corpus_run->add_option("--threads", threads, "Worker threads (default: all cores)");
    corpus_run->add_flag("--serial", serial, "Validate one design at a time");

    ServiceConfig service_config;
    std::string data_files = TTVGA_DATA_DIR, mock;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--host", service_config.host, "Listen address");
    serve->add_option("--port", service_config.port, "Listen port");
    serve->add_option("--data-dir", service_config.data_dir, "Where sessions are stored");
    serve->add_option("--data", data_files, "Directory with prompts/ and examples/");
    serve->add_option("--mock", mock, "Scripted reply file instead of a real model");
    serve->add_option("--endpoint", service_config.llm.endpoint, "Chat-completions base URL");
    serve->add_option("--model", service_config.llm.model, "Model name");
    serve->add_option("--cors-origin", service_config.cors_origins, "Allowed browser origin (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*lint)
            return cmd_lint(file, as_json);
        if (*check)
            return cmd_check(file, capacity, as_json);
        if (*render)
            return cmd_render(file, frames, out_dir, pokes, as_json);
        if (*sloc)
            return cmd_sloc(file, as_json);
        if (*validate_cmd)
            return cmd_validate(file, depth, as_json);
        if (*chat)
            return cmd_chat(chat_opts, as_json);
        if (*corpus_run)
            return cmd_corpus_run(corpus_dir, threads, serial, as_json);
        if (*serve)
            return cmd_serve(service_config, data_files, mock);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
