#include <doctest.h>

#include <json.hpp>

#include "test_support.hpp"
#include "ttvga/agent/agent.hpp"
#include "ttvga/util/digest.hpp"

using namespace ttvga;
using namespace ttvga::testing;

namespace {

Clock ticking() {
    auto t = std::make_shared<int64_t>(0);
    return [t] { return ++*t; };
}

AgentConfig small_config() {
    AgentConfig c;
    c.system_prompt = "SYSTEM";
    c.coding_instructions = "RULES";
    c.examples.push_back({"ex", "a stripe", {"module tt_um_ex; endmodule\n", Origin::Fixture, 1}});
    return c;
}

std::string fenced(const std::string& code) { return "Here is the design.\n```verilog\n" + code + "```\n"; }

std::string good_design() { return corpus_source("blue_square"); }

std::string delayed_design() {
    std::string text = good_design();
    size_t at = text.find("assign uio_out");
    REQUIRE(at != std::string::npos);
    text.insert(at, "  reg slow;\n  always @(posedge clk) begin\n    #10;\n    slow <= 1'b0;\n  end\n");
    return text;
}

} // namespace

TEST_SUITE("agent") {

TEST_CASE("the prompt is system text, examples, history, then the message") {
    AgentConfig c = small_config();
    DesignSession s("s", ticking());
    std::vector<ChatMessage> first = build_prompt(c, s, "draw a car");
    REQUIRE(first.size() == 5);
    CHECK(first[0] == ChatMessage{"system", "SYSTEM"});
    CHECK(first[1] == ChatMessage{"system", "RULES"});
    CHECK(first[2] == ChatMessage{"user", "a stripe"});
    CHECK(first[3].role == "assistant");
    CHECK(first[3].content == "```verilog\nmodule tt_um_ex; endmodule\n```");
    CHECK(first[4] == ChatMessage{"user", "draw a car"});
    CHECK(serialize_messages(build_prompt(c, s, "draw a car")) == serialize_messages(first));

    s.add_turn(Role::User, "one");
    s.add_turn(Role::Agent, "two");
    s.add_turn(Role::User, "lost", true);
    s.add_turn(Role::Validator, "three");
    auto later = build_prompt(c, s, "four");
    REQUIRE(later.size() == 8);
    CHECK(later[4] == ChatMessage{"user", "one"});
    CHECK(later[5] == ChatMessage{"assistant", "two"});
    CHECK(later[6] == ChatMessage{"user", "three"});
    CHECK(later[7] == ChatMessage{"user", "four"});
}

TEST_CASE("the bundled prompts include every example") {
    AgentConfig c = load_agent_config(data_dir());
    CHECK_FALSE(c.system_prompt.empty());
    CHECK_FALSE(c.coding_instructions.empty());
    REQUIRE(c.examples.size() == 3);
    DesignSession s;
    CHECK(build_prompt(c, s, "hi").size() == 2 + 2 * c.examples.size() + 1);
}

TEST_CASE("every bundled example passes full validation") {
    CHECK(check_examples(load_agent_config(data_dir())).empty());
}

TEST_CASE("code extraction prefers the last verilog block") {
    CHECK(extract_code("text\n```verilog\nmodule a; endmodule\n```\n") == "module a; endmodule\n");
    CHECK_FALSE(extract_code("No code here, just a plan."));
    CHECK(extract_code("```verilog\nmodule a; endmodule\n```\nthen\n```verilog\nmodule b; endmodule\n```\n") ==
          "module b; endmodule\n");
    CHECK(extract_code("```verilog\nmodule a; endmodule\n```\n```text\nnote\n```\n") == "module a; endmodule\n");
    CHECK(extract_code("```\nmodule c; endmodule\n```") == "module c; endmodule\n");
    CHECK(extract_code("Sure: module d; endmodule and done") == "module d; endmodule\n");
    CHECK(extract_code("```verilog\r\nmodule e; endmodule\r\n") == "module e; endmodule\n");
}

TEST_CASE("full validation of blue square passes every stage") {
    ValidationReport r = validate({good_design(), Origin::User, 1}, Depth::Full);
    CHECK(r.functional_ok());
    CHECK(r.tapeout_ok());
    CHECK(r.errors().empty());
    REQUIRE(r.frame_digests.size() == 3);
    CHECK(r.frame_digests[0] == r.frame_digests[1]);
    CHECK(r.frame_digests[1] == r.frame_digests[2]);
    CHECK(r.area->tiles == TileShape{1, 1});
    CHECK(r.sloc == 41);
    CHECK(validate({good_design(), Origin::User, 1}, Depth::Quick).frame_digests.size() == 1);
    CHECK(r.digest() == validate({good_design(), Origin::Agent, 2}, Depth::Full).digest());
}

TEST_CASE("a lint error stops validation before simulation") {
    ValidationReport r = validate({delayed_design(), Origin::User, 1}, Depth::Quick);
    CHECK(r.parse_ok());
    CHECK(r.interface_ok());
    CHECK(r.lint_stage == StageStatus::Failed);
    CHECK(r.sim_stage == StageStatus::Skipped);
    CHECK(r.area_stage == StageStatus::Skipped);
    CHECK(r.frame_digests.empty());
    CHECK(r.error_text().rfind("DELAY_CONTROL (line ", 0) == 0);
    CHECK(r.to_json()["simulation"]["status"] == "skipped");
}

TEST_CASE("unparseable input skips every later stage") {
    ValidationReport r = validate({"module tt_um_x (\n", Origin::User, 1}, Depth::Full);
    CHECK(r.parse_stage == StageStatus::Failed);
    CHECK(r.interface_stage == StageStatus::Skipped);
    CHECK(r.lint_stage == StageStatus::Skipped);
    CHECK(r.sim_stage == StageStatus::Skipped);
    CHECK(r.area_stage == StageStatus::Skipped);
    CHECK_FALSE(r.errors().empty());
}

TEST_CASE("a timing failure is reported by the simulation stage") {
    std::string silent = tt_module("tt_um_silent", "  assign uo_out = 8'b0;\n  assign uio_out = 8'b0;\n"
                                                   "  assign uio_oe = 8'b0;\n  wire _unused = &{ena, clk, rst_n, "
                                                   "ui_in, uio_in};\n");
    ValidationReport r = validate({silent, Origin::User, 1}, Depth::Quick);
    CHECK(r.lint_stage == StageStatus::Passed);
    CHECK(r.sim_stage == StageStatus::Failed);
    REQUIRE(r.sim_error);
    CHECK(r.sim_error->code == "TIMING_VIOLATION");
    CHECK_FALSE(r.functional_ok());
}

TEST_CASE("a valid first reply costs one model call") {
    DesignSession s("s", ticking());
    ScriptedMockClient mock(nlohmann::json{{"replies", {fenced(good_design())}}});
    ChatResult r = chat_turn(s, "a blue square", small_config(), mock);
    CHECK(r.llm_calls == 1);
    CHECK(mock.calls() == 1);
    CHECK(r.revision == 1u);
    REQUIRE(r.report);
    CHECK(r.report->errors().empty());
    CHECK(s.turns().size() == 2);
    CHECK(s.status() == SessionStatus::Valid);
}

TEST_CASE("a flawed reply is repaired with the validator's words") {
    DesignSession s("s", ticking());
    ScriptedMockClient mock(nlohmann::json{{"replies", {fenced(delayed_design()), fenced(good_design())}}});
    ChatResult r = chat_turn(s, "a blue square", small_config(), mock);
    CHECK(r.llm_calls == 2);
    CHECK(mock.calls() == 2);
    REQUIRE(s.turns().size() == 4);
    CHECK(s.turns()[2].role == Role::Validator);
    CHECK(s.turns()[2].text.find("DELAY_CONTROL") != std::string::npos);
    CHECK(s.turns()[2].text == ValidationReport(validate({delayed_design(), Origin::Agent, 0}, Depth::Quick))
                                   .error_text());
    CHECK(s.revisions().size() == 2);
    CHECK(r.revision == 2u);
    CHECK(r.report->errors().empty());
}

TEST_CASE("repair stops after the configured number of rounds") {
    for (uint32_t rounds : {0u, 1u, 3u}) {
        AgentConfig c = small_config();
        c.max_repair_rounds = rounds;
        DesignSession s("s", ticking());
        ScriptedMockClient mock(nlohmann::json{{"replies", {fenced(delayed_design())}}, {"repeat_last", true}});
        ChatResult r = chat_turn(s, "a blue square", c, mock);
        CHECK(r.llm_calls == 1 + rounds);
        CHECK(mock.calls() == 1 + rounds);
        CHECK(s.revisions().size() == 1 + rounds);
        CHECK_FALSE(r.report->errors().empty());
    }
}

TEST_CASE("a reply without code is recorded but not validated") {
    DesignSession s("s", ticking());
    ScriptedMockClient mock(nlohmann::json{{"replies", {"What colour should the square be?"}}});
    ChatResult r = chat_turn(s, "a square", small_config(), mock);
    CHECK(r.llm_calls == 1);
    CHECK_FALSE(r.report);
    CHECK(s.revisions().empty());
    CHECK(s.turns().back().role == Role::Agent);
}

TEST_CASE("a transport failure keeps the message and explains how to retry") {
    DesignSession s("s", ticking());
    ScriptedMockClient mock(nlohmann::json{{"replies", nlohmann::json::array({{{"error", "timeout"}}})}});
    ChatResult r = chat_turn(s, "a blue square", small_config(), mock);
    REQUIRE(r.error);
    CHECK(r.error->find("timeout") != std::string::npos);
    CHECK(r.error->find("send it again") != std::string::npos);
    REQUIRE(s.turns().size() == 1);
    CHECK(s.turns()[0].failed);
    CHECK(s.turns()[0].text == "a blue square");
    CHECK(build_prompt(small_config(), s, "x").size() == 5);
}

TEST_CASE("prompt-hash scripts answer by exact prompt") {
    AgentConfig c = small_config();
    DesignSession empty;
    std::string hash = sha256_hex(serialize_messages(build_prompt(c, empty, "hello")));
    ScriptedMockClient mock(nlohmann::json{{"by_prompt_hash", {{hash, "matched"}}}, {"default", "fallback"}});
    CHECK(mock.complete(build_prompt(c, empty, "hello")) == "matched");
    CHECK(mock.complete(build_prompt(c, empty, "other")) == "fallback");
    CHECK_THROWS_AS(ScriptedMockClient(nlohmann::json::object()), std::invalid_argument);
}

TEST_CASE("the request body follows the chat-completions shape") {
    HttpLlmClient client({"http://localhost:1/v1", "m1", "", 0.2, 100, 1});
    auto body = nlohmann::json::parse(client.request_body({{"system", "s"}, {"user", "u"}}));
    CHECK(body["model"] == "m1");
    CHECK(body["messages"].size() == 2);
    CHECK(body["messages"][1]["content"] == "u");
    CHECK(body["max_tokens"] == 100);
}

TEST_CASE("an unreachable endpoint raises a transport error") {
    HttpLlmClient client({"http://127.0.0.1:1/v1", "m", "", 0.2, 10, 1});
    CHECK_THROWS_AS(client.complete({{"user", "u"}}), LlmError);
    CHECK(client.calls() == 1);
}

TEST_CASE("the transcript lists every turn in order") {
    DesignSession s("s", ticking());
    ScriptedMockClient mock(nlohmann::json{{"replies", {fenced(delayed_design()), fenced(good_design())}}});
    chat_turn(s, "a blue square", small_config(), mock);
    std::string t = transcript_text(s);
    std::vector<nlohmann::json> lines;
    size_t pos = 0;
    for (size_t nl; (nl = t.find('\n', pos)) != std::string::npos; pos = nl + 1)
        lines.push_back(nlohmann::json::parse(t.substr(pos, nl - pos)));
    REQUIRE(lines.size() == s.turns().size());
    CHECK(lines[0]["role"] == "user");
    CHECK(lines[0]["text"] == "a blue square");
    CHECK(lines[1]["text"] == fenced(delayed_design()));
    CHECK(lines[2]["role"] == "validator");
    CHECK(lines[3]["role"] == "agent");
}

TEST_CASE("replaying a session reproduces it exactly") {
    nlohmann::json script = {{"replies", {fenced(delayed_design()), fenced(good_design()), "Thanks!"}}};
    DesignSession s("s", ticking());
    ScriptedMockClient mock(script);
    chat_turn(s, "a blue square", small_config(), mock);
    chat_turn(s, "thank you", small_config(), mock);
    ReplayResult r = replay_session(s, script, small_config());
    CHECK(r.identical);
    CHECK(r.original_transcript == r.replayed_transcript);
    CHECK(r.original_digests == r.replayed_digests);

    nlohmann::json other = {{"replies", {fenced(good_design()), "Thanks!"}}};
    CHECK_FALSE(replay_session(s, other, small_config()).identical);
}

}
