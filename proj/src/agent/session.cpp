#include "ttvga/agent/session.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ttvga {

std::string_view to_string(Role role) {
    switch (role) {
    case Role::User: return "user";
    case Role::Agent: return "agent";
    case Role::Validator: return "validator";
    }
    return "user";
}

Role role_from_string(std::string_view text) {
    if (text == "user")
        return Role::User;
    if (text == "agent")
        return Role::Agent;
    if (text == "validator")
        return Role::Validator;
    throw std::invalid_argument("unknown turn role: " + std::string(text));
}

std::string_view to_string(SessionStatus status) {
    switch (status) {
    case SessionStatus::Drafting: return "drafting";
    case SessionStatus::Valid: return "valid";
    case SessionStatus::ExportReady: return "export_ready";
    }
    return "drafting";
}

Clock system_clock() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    };
}

bool report_all_ok(const nlohmann::json& report) {
    return report.value("functional_ok", false) && report.value("tapeout_ok", false);
}

DesignSession::DesignSession(std::string id, Clock clock) : id_(std::move(id)), clock_(std::move(clock)) {}

SessionStatus DesignSession::status() const {
    if (revisions_.empty())
        return SessionStatus::Drafting;
    const RevisionRecord& last = revisions_.back();
    if (last.full_report && report_all_ok(*last.full_report))
        return SessionStatus::ExportReady;
    if (report_all_ok(last.quick_report))
        return SessionStatus::Valid;
    return SessionStatus::Drafting;
}

const ConversationTurn& DesignSession::add_turn(Role role, std::string text, bool failed) {
    ConversationTurn t{role, std::move(text), clock_(), failed};
    append_record("turn", {{"role", std::string(to_string(role))}, {"text", t.text}, {"failed", failed}},
                  t.timestamp);
    turns_.push_back(std::move(t));
    return turns_.back();
}

uint32_t DesignSession::add_revision(std::string source, Origin origin, nlohmann::json quick_report) {
    uint32_t number = static_cast<uint32_t>(revisions_.size() + 1);
    int64_t now = clock_();
    append_record("revision",
                  {{"revision", number}, {"origin", std::string(to_string(origin))}, {"source", source}}, now);
    append_record("report", {{"revision", number}, {"depth", "quick"}, {"report", quick_report}}, now);
    RevisionRecord r;
    r.source = DesignSource{std::move(source), origin, number};
    r.quick_report = std::move(quick_report);
    revisions_.push_back(std::move(r));
    return number;
}

void DesignSession::add_full_report(uint32_t revision, nlohmann::json report) {
    if (revision == 0 || revision > revisions_.size())
        throw std::out_of_range("no revision " + std::to_string(revision));
    append_record("report", {{"revision", revision}, {"depth", "full"}, {"report", report}}, clock_());
    revisions_[revision - 1].full_report = std::move(report);
}

void DesignSession::attach_log(std::filesystem::path path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream touch(path, std::ios::app);
    if (!touch)
        throw std::runtime_error("cannot open session log " + path.string());
    log_ = std::move(path);
}

void DesignSession::append_record(const std::string& type, nlohmann::json payload, int64_t timestamp) {
    if (!log_)
        return;
    nlohmann::json rec = {{"type", type}, {"payload", std::move(payload)}, {"timestamp", timestamp}};
    std::ofstream out(*log_, std::ios::app | std::ios::binary);
    out << rec.dump() << '\n';
    out.flush();
    if (!out)
        throw std::runtime_error("cannot append to session log " + log_->string());
}

void DesignSession::apply(const nlohmann::json& rec) {
    const std::string type = rec.at("type").get<std::string>();
    const nlohmann::json& p = rec.at("payload");
    int64_t ts = rec.at("timestamp").get<int64_t>();
    if (type == "turn") {
        turns_.push_back(ConversationTurn{role_from_string(p.at("role").get<std::string>()),
                                          p.at("text").get<std::string>(), ts, p.value("failed", false)});
    } else if (type == "revision") {
        RevisionRecord r;
        r.source = DesignSource{p.at("source").get<std::string>(),
                                origin_from_string(p.at("origin").get<std::string>()),
                                p.at("revision").get<uint32_t>()};
        if (r.source.revision != revisions_.size() + 1)
            throw std::runtime_error("session log revisions out of order");
        revisions_.push_back(std::move(r));
    } else if (type == "report") {
        uint32_t n = p.at("revision").get<uint32_t>();
        if (n == 0 || n > revisions_.size())
            throw std::runtime_error("session log report for unknown revision");
        if (p.at("depth").get<std::string>() == "full")
            revisions_[n - 1].full_report = p.at("report");
        else
            revisions_[n - 1].quick_report = p.at("report");
    } else {
        throw std::runtime_error("unknown session log record type: " + type);
    }
}

DesignSession DesignSession::load(const std::filesystem::path& path, std::string id, Clock clock) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open session log " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    DesignSession s(std::move(id), std::move(clock));
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos)
            break;  // incomplete tail record
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty())
            continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw std::runtime_error("corrupt record in session log " + path.string());
        }
        s.apply(rec);
    }
    s.log_ = path;
    if (pos < text.size()) {
        // Drop the partial record so later appends start on a clean line.
        std::filesystem::resize_file(path, pos);
    }
    return s;
}

} // namespace ttvga
