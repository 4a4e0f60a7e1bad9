#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttvga/frontend/source.hpp"

namespace ttvga {

enum class Role { User, Agent, Validator };
std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct ConversationTurn {
    Role role = Role::User;
    std::string text;
    int64_t timestamp = 0;
    bool failed = false;  // the LLM call for this turn did not complete
};

struct RevisionRecord {
    DesignSource source;
    nlohmann::json quick_report;              // report from the chat loop
    std::optional<nlohmann::json> full_report; // report from the export gate
};

enum class SessionStatus { Drafting, Valid, ExportReady };
std::string_view to_string(SessionStatus status);

/// Milliseconds since the epoch; injectable for deterministic tests.
using Clock = std::function<int64_t()>;
Clock system_clock();

/// Conversation memory and design history of one chat session. Turns and
/// revisions are append-only; when a log file is attached every append is
/// also written there as one JSON line.
class DesignSession {
public:
    explicit DesignSession(std::string id = {}, Clock clock = system_clock());

    const std::string& id() const { return id_; }
    const std::vector<ConversationTurn>& turns() const { return turns_; }
    const std::vector<RevisionRecord>& revisions() const { return revisions_; }
    SessionStatus status() const;

    const ConversationTurn& add_turn(Role role, std::string text, bool failed = false);
    /// Records a new revision with its quick report; returns the revision number (1-based).
    uint32_t add_revision(std::string source, Origin origin, nlohmann::json quick_report);
    /// Records a full-depth report for an existing revision.
    void add_full_report(uint32_t revision, nlohmann::json report);

    /// Starts appending records to `path` (created if missing).
    void attach_log(std::filesystem::path path);
    const std::optional<std::filesystem::path>& log_path() const { return log_; }

    /// Rebuilds a session from a log. A truncated final record is ignored;
    /// malformed records elsewhere throw std::runtime_error.
    static DesignSession load(const std::filesystem::path& path, std::string id, Clock clock = system_clock());

private:
    void append_record(const std::string& type, nlohmann::json payload, int64_t timestamp);
    void apply(const nlohmann::json& record);

    std::string id_;
    Clock clock_;
    std::vector<ConversationTurn> turns_;
    std::vector<RevisionRecord> revisions_;
    std::optional<std::filesystem::path> log_;
};

bool report_all_ok(const nlohmann::json& report);

} // namespace ttvga
