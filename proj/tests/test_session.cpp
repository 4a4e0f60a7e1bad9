#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "test_support.hpp"
#include "ttvga/agent/agent.hpp"
#include "ttvga/agent/session.hpp"

using namespace ttvga;
using namespace ttvga::testing;

namespace {

Clock ticking() {
    auto t = std::make_shared<int64_t>(0);
    return [t] { return ++*t; };
}

void append_raw(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::app | std::ios::binary);
    out << text;
}

nlohmann::json ok_report() { return {{"functional_ok", true}, {"tapeout_ok", true}}; }

} // namespace

TEST_SUITE("session") {

TEST_CASE("status follows the latest revision") {
    DesignSession s("s", ticking());
    CHECK(s.status() == SessionStatus::Drafting);
    uint32_t r1 = s.add_revision("module a; endmodule\n", Origin::Agent, {{"functional_ok", false}});
    CHECK(r1 == 1);
    CHECK(s.status() == SessionStatus::Drafting);
    uint32_t r2 = s.add_revision("module b; endmodule\n", Origin::Agent, ok_report());
    CHECK(r2 == 2);
    CHECK(s.status() == SessionStatus::Valid);
    s.add_full_report(2, ok_report());
    CHECK(s.status() == SessionStatus::ExportReady);
    CHECK_THROWS_AS(s.add_full_report(3, ok_report()), std::out_of_range);
    CHECK(s.revisions()[0].source.revision == 1);
    CHECK(s.revisions()[1].source.origin == Origin::Agent);
}

TEST_CASE("a logged session loads back identically") {
    TempDir dir("ttvga-session");
    auto log = dir.path() / "s1" / "log.jsonl";
    DesignSession s("s1", ticking());
    s.attach_log(log);
    s.add_turn(Role::User, "a blue square");
    s.add_turn(Role::Agent, "line one\nline \"two\"");
    s.add_turn(Role::User, "retry me", true);
    s.add_revision("module a; endmodule\n", Origin::Agent, ok_report());
    s.add_full_report(1, {{"depth", "full"}});

    DesignSession back = DesignSession::load(log, "s1");
    REQUIRE(back.turns().size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back.turns()[i].role == s.turns()[i].role);
        CHECK(back.turns()[i].text == s.turns()[i].text);
        CHECK(back.turns()[i].timestamp == s.turns()[i].timestamp);
        CHECK(back.turns()[i].failed == s.turns()[i].failed);
    }
    REQUIRE(back.revisions().size() == 1);
    CHECK(back.revisions()[0].source.text == "module a; endmodule\n");
    CHECK(back.revisions()[0].quick_report == ok_report());
    CHECK(*back.revisions()[0].full_report == nlohmann::json{{"depth", "full"}});
    CHECK(transcript_text(back) == transcript_text(s));
    CHECK(report_digests(back) == report_digests(s));
}

TEST_CASE("appends after loading continue the same log") {
    TempDir dir("ttvga-session");
    auto log = dir.path() / "log.jsonl";
    {
        DesignSession s("s", ticking());
        s.attach_log(log);
        s.add_turn(Role::User, "first");
    }
    DesignSession again = DesignSession::load(log, "s", ticking());
    again.add_turn(Role::User, "second");
    DesignSession third = DesignSession::load(log, "s");
    REQUIRE(third.turns().size() == 2);
    CHECK(third.turns()[1].text == "second");
}

TEST_CASE("a truncated final record is dropped") {
    TempDir dir("ttvga-session");
    auto log = dir.path() / "log.jsonl";
    DesignSession s("s", ticking());
    s.attach_log(log);
    s.add_turn(Role::User, "kept");
    auto size = std::filesystem::file_size(log);
    append_raw(log, R"({"type":"turn","payload":{"role":"user","te)");

    DesignSession back = DesignSession::load(log, "s", ticking());
    REQUIRE(back.turns().size() == 1);
    CHECK(back.turns()[0].text == "kept");
    CHECK(std::filesystem::file_size(log) == size);
    back.add_turn(Role::User, "after");
    CHECK(DesignSession::load(log, "s").turns().size() == 2);
}

TEST_CASE("a malformed record before the end is an error") {
    TempDir dir("ttvga-session");
    auto log = dir.path() / "log.jsonl";
    DesignSession s("s", ticking());
    s.attach_log(log);
    s.add_turn(Role::User, "one");
    append_raw(log, "{not json}\n");
    s.add_turn(Role::User, "two");
    CHECK_THROWS_AS(DesignSession::load(log, "s"), std::runtime_error);

    auto other = dir.path() / "other.jsonl";
    append_raw(other, R"({"type":"report","payload":{"revision":4,"depth":"quick","report":{}},"timestamp":1})"
                      "\n");
    CHECK_THROWS_AS(DesignSession::load(other, "s"), std::runtime_error);
    CHECK_THROWS_AS(DesignSession::load(dir.path() / "missing.jsonl", "s"), std::runtime_error);
}

TEST_CASE("a replayed chat matches its log") {
    TempDir dir("ttvga-session");
    auto log = dir.path() / "log.jsonl";
    AgentConfig config;
    config.system_prompt = "S";
    config.coding_instructions = "C";
    std::string design = "```verilog\n" + corpus_source("blue_square") + "```\n";
    nlohmann::json script = {{"replies", {"Which colour?", design}}};
    {
        DesignSession s("s", ticking());
        s.attach_log(log);
        ScriptedMockClient mock(script);
        chat_turn(s, "a square", config, mock);
        chat_turn(s, "blue", config, mock);
    }
    DesignSession loaded = DesignSession::load(log, "s");
    CHECK(loaded.revisions().size() == 1);
    ReplayResult r = replay_session(loaded, script, config);
    CHECK(r.identical);
    CHECK(r.original_digests.size() == 1);
}

}
