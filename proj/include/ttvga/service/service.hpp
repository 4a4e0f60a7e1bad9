#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttvga/agent/agent.hpp"
#include "ttvga/agent/llm.hpp"
#include "ttvga/agent/session.hpp"

namespace httplib {
class Server;
}

namespace ttvga {

using LlmFactory = std::function<std::unique_ptr<LlmClient>()>;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "ttvga-data";
    AgentConfig agent;
    std::vector<std::string> cors_origins = {"http://localhost:5173", "http://127.0.0.1:5173"};
    size_t max_sessions = 256;
    size_t max_body_bytes = 1 << 20;
    uint32_t viewer_frames = 4;  // frames captured per revision for the frame viewer
    std::string export_author = "Tiny Tapeout student";
    Clock clock = system_clock();
    /// Creates the LLM client for a new session. Defaults to an HTTP client
    /// built from `llm`, or a scripted mock when `mock_script` is set.
    LlmFactory llm_factory;
    HttpLlmSettings llm;
    std::optional<nlohmann::json> mock_script;
};

/// Applies TTVGA_LISTEN, TTVGA_PORT, TTVGA_DATA_DIR, TTVGA_LLM_ENDPOINT,
/// TTVGA_LLM_MODEL, TTVGA_LLM_KEY and TTVGA_MOCK_SCRIPT when set.
void apply_env_overrides(ServiceConfig& config);

class Service {
public:
    /// Throws std::runtime_error when the data directory is not writable.
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and serves until stop(). Returns false when binding fails.
    bool listen();
    /// Binds to an ephemeral port on `host` and returns it (tests).
    int bind_any_port();
    /// Serves on a socket bound by bind_any_port().
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

    httplib::Server& server() { return *server_; }
    const ServiceConfig& config() const { return config_; }

private:
    struct Slot;

    void routes();
    std::shared_ptr<Slot> find_session(const std::string& id);
    std::shared_ptr<Slot> create_session(std::string& id_out);
    std::filesystem::path session_dir(const std::string& id) const;
    std::string next_session_id();
    nlohmann::json session_json(const Slot& slot) const;
    /// Captures and stores the viewer frames of a revision; returns the frame
    /// directory or an error body with its HTTP status.
    std::filesystem::path ensure_frames(Slot& slot, uint32_t revision, std::optional<uint8_t> ui_in, int& status,
                                        nlohmann::json& error);

    ServiceConfig config_;
    std::unique_ptr<httplib::Server> server_;
    std::mutex registry_mu_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    uint64_t next_id_ = 0;
};

} // namespace ttvga
