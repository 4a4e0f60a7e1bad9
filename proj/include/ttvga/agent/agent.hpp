#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttvga/agent/llm.hpp"
#include "ttvga/agent/session.hpp"
#include "ttvga/agent/validate.hpp"
#include "ttvga/tt/export.hpp"

namespace ttvga {

struct ExamplePair {
    std::string name;
    std::string description;
    DesignSource rtl;
};

struct AgentConfig {
    std::string system_prompt;
    std::string coding_instructions;
    std::vector<ExamplePair> examples;
    uint32_t max_repair_rounds = 3;
    HttpLlmSettings llm;
};

inline constexpr uint32_t kMaxRepairRounds = 10;

/// Reads prompts/system_prompt.md, prompts/coding_instructions.md and every
/// examples/<name>/{description.md,project.v} under `data_dir`.
AgentConfig load_agent_config(const std::filesystem::path& data_dir);

/// Full-validates every example; returns one message per example that fails.
std::vector<std::string> check_examples(const AgentConfig& config);

/// System prompt, coding instructions, example exchanges, prior (non-failed)
/// turns, then `user_msg`.
std::vector<ChatMessage> build_prompt(const AgentConfig& config, const DesignSession& session,
                                      const std::string& user_msg);

/// Last ```verilog block, else the last fenced block, else the first
/// `module` ... matching `endmodule`; nullopt when there is no code.
std::optional<std::string> extract_code(const std::string& reply);

struct ChatResult {
    std::string reply;
    std::optional<ValidationReport> report;
    std::optional<uint32_t> revision;
    size_t llm_calls = 0;
    std::optional<std::string> error;  // transport failure, with retry guidance
};

ChatResult chat_turn(DesignSession& session, const std::string& user_msg, const AgentConfig& config,
                     LlmClient& client);

struct ExportOutcome {
    bool ok = false;
    std::string message;  // which gate failed, when not ok
    std::optional<ExportManifest> manifest;
    std::optional<ValidationReport> report;
};

/// Full-validates the latest revision, records the report, and writes the
/// bundle when every gate passes.
ExportOutcome export_session(DesignSession& session, const std::filesystem::path& dest,
                             const std::string& author = "", const std::string& extra_yaml = "");

struct ReplayResult {
    bool identical = false;
    std::string original_transcript;
    std::string replayed_transcript;
    std::vector<std::string> original_digests;
    std::vector<std::string> replayed_digests;
};

/// One JSON line per turn: {"role", "text", "failed"}.
std::string transcript_text(const DesignSession& session);
std::vector<std::string> report_digests(const DesignSession& session);

/// Re-runs the user turns of a recorded session against a fresh scripted mock
/// and compares transcripts and report digests.
ReplayResult replay_session(const DesignSession& recorded, const nlohmann::json& mock_script,
                            const AgentConfig& config);

} // namespace ttvga
