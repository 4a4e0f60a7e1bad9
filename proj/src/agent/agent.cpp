#include "ttvga/agent/agent.hpp"

#include <algorithm>
#include <cctype>

#include "ttvga/util/digest.hpp"
#include "ttvga/util/files.hpp"
#include "ttvga/vga/image.hpp"

namespace ttvga {

namespace fs = std::filesystem;

namespace {

std::string trim_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r'))
        s.pop_back();
    return s;
}

std::string lower(std::string s) {
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

/// Position of `word` as a whole identifier at or after `from`.
size_t find_word(const std::string& text, const std::string& word, size_t from) {
    for (size_t pos = text.find(word, from); pos != std::string::npos; pos = text.find(word, pos + 1)) {
        bool left = pos == 0 || !is_word_char(text[pos - 1]);
        bool right = pos + word.size() >= text.size() || !is_word_char(text[pos + word.size()]);
        if (left && right)
            return pos;
    }
    return std::string::npos;
}

std::string example_reply(const ExamplePair& ex) { return "```verilog\n" + trim_trailing_newlines(ex.rtl.text) + "\n```"; }

} // namespace

AgentConfig load_agent_config(const fs::path& data_dir) {
    AgentConfig c;
    c.system_prompt = trim_trailing_newlines(read_file(data_dir / "prompts" / "system_prompt.md"));
    c.coding_instructions = trim_trailing_newlines(read_file(data_dir / "prompts" / "coding_instructions.md"));
    std::vector<fs::path> dirs;
    if (fs::exists(data_dir / "examples"))
        for (const auto& entry : fs::directory_iterator(data_dir / "examples"))
            if (entry.is_directory())
                dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        ExamplePair ex;
        ex.name = dir.filename().string();
        ex.description = trim_trailing_newlines(read_file(dir / "description.md"));
        ex.rtl = DesignSource{read_file(dir / "project.v"), Origin::Fixture, 1};
        c.examples.push_back(std::move(ex));
    }
    return c;
}

std::vector<std::string> check_examples(const AgentConfig& config) {
    std::vector<std::string> problems;
    for (const auto& ex : config.examples) {
        ValidationReport r = validate(ex.rtl, Depth::Full);
        if (!r.functional_ok() || !r.tapeout_ok())
            problems.push_back("example '" + ex.name + "' does not pass full validation: " + r.error_text());
    }
    return problems;
}

std::vector<ChatMessage> build_prompt(const AgentConfig& config, const DesignSession& session,
                                      const std::string& user_msg) {
    std::vector<ChatMessage> m;
    m.push_back({"system", config.system_prompt});
    m.push_back({"system", config.coding_instructions});
    for (const auto& ex : config.examples) {
        m.push_back({"user", ex.description});
        m.push_back({"assistant", example_reply(ex)});
    }
    std::vector<const ConversationTurn*> prior;
    for (const auto& t : session.turns())
        if (!t.failed)
            prior.push_back(&t);
    std::stable_sort(prior.begin(), prior.end(),
                     [](const ConversationTurn* a, const ConversationTurn* b) { return a->timestamp < b->timestamp; });
    for (const ConversationTurn* t : prior)
        m.push_back({t->role == Role::Agent ? "assistant" : "user", t->text});
    m.push_back({"user", user_msg});
    return m;
}

std::optional<std::string> extract_code(const std::string& reply) {
    struct Block {
        std::string lang;
        std::string body;
    };
    std::vector<Block> blocks;
    size_t pos = 0;
    bool in_block = false;
    Block cur;
    while (pos < reply.size()) {
        size_t nl = reply.find('\n', pos);
        std::string line = reply.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        size_t indent = line.find_first_not_of(" \t");
        bool fence = indent != std::string::npos && line.compare(indent, 3, "```") == 0;
        if (fence) {
            if (!in_block) {
                cur = Block{};
                std::string info = line.substr(indent + 3);
                size_t a = info.find_first_not_of(" \t");
                size_t b = info.find_last_not_of(" \t");
                cur.lang = a == std::string::npos ? "" : lower(info.substr(a, b - a + 1));
                in_block = true;
            } else {
                blocks.push_back(cur);
                in_block = false;
            }
        } else if (in_block) {
            cur.body += line + "\n";
        }
        if (nl == std::string::npos)
            break;
        pos = nl + 1;
    }
    if (in_block)
        blocks.push_back(cur);  // unterminated final block

    auto is_verilog = [](const std::string& lang) {
        return lang == "verilog" || lang == "v" || lang == "systemverilog" || lang == "sv";
    };
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it)
        if (is_verilog(it->lang))
            return it->body;
    if (!blocks.empty())
        return blocks.back().body;

    size_t start = find_word(reply, "module", 0);
    if (start == std::string::npos)
        return std::nullopt;
    size_t end = find_word(reply, "endmodule", start);
    if (end == std::string::npos)
        return reply.substr(start);
    return reply.substr(start, end + 9 - start) + "\n";
}

ChatResult chat_turn(DesignSession& session, const std::string& user_msg, const AgentConfig& config,
                     LlmClient& client) {
    ChatResult result;
    const uint32_t rounds = std::min(config.max_repair_rounds, kMaxRepairRounds);
    const std::string retry =
        " Your message was saved; please send it again in a moment. If this keeps happening, check the language "
        "model settings.";

    std::string reply;
    try {
        ++result.llm_calls;
        reply = client.complete(build_prompt(config, session, user_msg));
    } catch (const LlmError& e) {
        session.add_turn(Role::User, user_msg, true);
        result.error = std::string(e.what()) + retry;
        return result;
    }
    session.add_turn(Role::User, user_msg);
    session.add_turn(Role::Agent, reply);
    result.reply = reply;

    for (uint32_t round = 0;; ++round) {
        std::optional<std::string> code = extract_code(reply);
        if (!code)
            return result;
        ValidationReport report = validate(DesignSource{*code, Origin::Agent, 0}, Depth::Quick);
        result.revision = session.add_revision(*code, Origin::Agent, report.to_json());
        result.report = report;
        if (report.errors().empty() || round >= rounds)
            return result;

        std::string feedback = report.error_text();
        std::vector<ChatMessage> prompt = build_prompt(config, session, feedback);
        session.add_turn(Role::Validator, feedback);
        try {
            ++result.llm_calls;
            reply = client.complete(prompt);
        } catch (const LlmError& e) {
            result.error = std::string(e.what()) + retry;
            return result;
        }
        session.add_turn(Role::Agent, reply);
        result.reply = reply;
    }
}

ExportOutcome export_session(DesignSession& session, const fs::path& dest, const std::string& author,
                             const std::string& extra_yaml) {
    ExportOutcome out;
    if (session.revisions().empty()) {
        out.message = "There is no design to export yet. Ask the agent for a design first.";
        return out;
    }
    const RevisionRecord& latest = session.revisions().back();
    std::vector<Frame> frames;
    ValidationReport report = validate(latest.source, Depth::Full, {}, &frames);
    session.add_full_report(latest.source.revision, report.to_json());
    out.report = report;
    if (!report.functional_ok() || !report.tapeout_ok()) {
        std::string gate = !report.parse_ok()       ? "the code does not parse"
                           : !report.interface_ok() ? "the Tiny Tapeout interface check failed"
                           : !report.lint.synthesizable ? "the synthesizability check failed"
                           : !report.sim_ok()           ? "the VGA simulation failed"
                                                        : "the design does not fit the largest tile size";
        out.message = "Export refused: " + gate + ".\n" + report.error_text();
        return out;
    }

    ExportInput in;
    in.source = latest.source.text;
    in.top = *report.compliance.detected_top;
    in.tiles = report.area->tiles;
    in.title = in.top;
    in.author = author;
    for (const auto& t : session.turns())
        if (t.role == Role::User && !t.failed) {
            in.description = t.text;
            break;
        }
    in.frame0_ppm = encode_ppm(frames.at(0));
    in.extra_yaml = extra_yaml;
    if (!(in.tiles == TileShape{1, 1}))
        in.notes.push_back("The design needs about " + std::to_string(static_cast<long long>(report.area->cell_units)) +
                           " area units, more than one tile holds; info.yaml requests " + in.tiles.str() +
                           " tiles.");
    out.manifest = write_export_bundle(in, dest);
    out.ok = true;
    return out;
}

std::string transcript_text(const DesignSession& session) {
    std::string out;
    for (const auto& t : session.turns()) {
        nlohmann::ordered_json j = {{"role", std::string(to_string(t.role))}, {"text", t.text}, {"failed", t.failed}};
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<std::string> report_digests(const DesignSession& session) {
    std::vector<std::string> out;
    for (const auto& r : session.revisions()) {
        out.push_back(sha256_hex(r.quick_report.dump()));
        if (r.full_report)
            out.push_back(sha256_hex(r.full_report->dump()));
    }
    return out;
}

ReplayResult replay_session(const DesignSession& recorded, const nlohmann::json& mock_script,
                            const AgentConfig& config) {
    ScriptedMockClient mock(mock_script);
    int64_t tick = 0;
    DesignSession fresh(recorded.id(), [&tick] { return ++tick; });
    for (const auto& t : recorded.turns())
        if (t.role == Role::User)
            chat_turn(fresh, t.text, config, mock);
    ReplayResult r;
    r.original_transcript = transcript_text(recorded);
    r.replayed_transcript = transcript_text(fresh);
    for (const auto& rev : recorded.revisions())
        r.original_digests.push_back(sha256_hex(rev.quick_report.dump()));
    for (const auto& rev : fresh.revisions())
        r.replayed_digests.push_back(sha256_hex(rev.quick_report.dump()));
    r.identical = r.original_transcript == r.replayed_transcript && r.original_digests == r.replayed_digests;
    return r;
}

} // namespace ttvga
