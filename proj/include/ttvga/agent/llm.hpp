#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ttvga {

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// Deterministic JSON array of {role, content} objects.
std::string serialize_messages(const std::vector<ChatMessage>& messages);

/// Transport-level failure: timeout, connection error, HTTP error status or a
/// malformed response.
class LlmError : public std::runtime_error {
public:
    LlmError(std::string kind, const std::string& message) : std::runtime_error(message), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    /// Returns the assistant reply. Throws LlmError.
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
    virtual size_t calls() const = 0;
};

struct HttpLlmSettings {
    std::string endpoint;  // base URL, e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key;
    double temperature = 0.2;
    int max_tokens = 4096;
    int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions client.
class HttpLlmClient : public LlmClient {
public:
    explicit HttpLlmClient(HttpLlmSettings settings);
    std::string complete(const std::vector<ChatMessage>& messages) override;
    size_t calls() const override;

    /// Request body sent for `messages`.
    std::string request_body(const std::vector<ChatMessage>& messages) const;

private:
    HttpLlmSettings settings_;
    mutable std::mutex mu_;
    size_t calls_ = 0;
};

/// Scripted replies for tests and offline use. Script forms:
///   {"replies": [r1, r2, ...], "repeat_last": true}
///   {"by_prompt_hash": {"<sha256 of serialized messages>": r, ...}, "default": r}
/// A reply is a string or {"error": "timeout"} to simulate a transport failure.
class ScriptedMockClient : public LlmClient {
public:
    explicit ScriptedMockClient(nlohmann::json script);
    static ScriptedMockClient from_file(const std::filesystem::path& path);

    std::string complete(const std::vector<ChatMessage>& messages) override;
    size_t calls() const override;
    const nlohmann::json& script() const { return script_; }

private:
    std::string answer(const nlohmann::json& entry);

    nlohmann::json script_;
    mutable std::mutex mu_;
    size_t calls_ = 0;
    size_t next_ = 0;
};

} // namespace ttvga
