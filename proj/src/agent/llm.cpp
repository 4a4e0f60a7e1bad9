#include "ttvga/agent/llm.hpp"

#include <httplib.h>

#include "ttvga/util/digest.hpp"
#include "ttvga/util/files.hpp"

namespace ttvga {

std::string serialize_messages(const std::vector<ChatMessage>& messages) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& m : messages)
        arr.push_back({{"role", m.role}, {"content", m.content}});
    return arr.dump();
}

HttpLlmClient::HttpLlmClient(HttpLlmSettings settings) : settings_(std::move(settings)) {}

size_t HttpLlmClient::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

std::string HttpLlmClient::request_body(const std::vector<ChatMessage>& messages) const {
    nlohmann::ordered_json body;
    body["model"] = settings_.model;
    body["messages"] = nlohmann::ordered_json::parse(serialize_messages(messages));
    body["temperature"] = settings_.temperature;
    body["max_tokens"] = settings_.max_tokens;
    return body.dump();
}

std::string HttpLlmClient::complete(const std::vector<ChatMessage>& messages) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++calls_;
    }
    // Split "scheme://host:port/prefix" into the client base and the path prefix.
    std::string url = settings_.endpoint;
    size_t scheme_end = url.find("://");
    size_t path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();

    httplib::Client cli(base);
    if (!cli.is_valid())
        throw LlmError("config", "The LLM endpoint '" + settings_.endpoint + "' is not a valid URL.");
    cli.set_connection_timeout(settings_.timeout_seconds, 0);
    cli.set_read_timeout(settings_.timeout_seconds, 0);
    cli.set_write_timeout(settings_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!settings_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + settings_.api_key);

    auto res = cli.Post(prefix + "/chat/completions", headers, request_body(messages), "application/json");
    if (!res) {
        auto err = res.error();
        std::string kind = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ? "timeout" : "connection";
        throw LlmError(kind, "Could not reach the language model (" + httplib::to_string(err) + ").");
    }
    if (res->status != 200)
        throw LlmError("http", "The language model service answered with HTTP status " + std::to_string(res->status) + ".");
    try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw LlmError("format", "The language model service returned a response without a reply message.");
    }
}

ScriptedMockClient::ScriptedMockClient(nlohmann::json script) : script_(std::move(script)) {
    if (!script_.is_object() || (!script_.contains("replies") && !script_.contains("by_prompt_hash")))
        throw std::invalid_argument("mock script needs a \"replies\" list or a \"by_prompt_hash\" map");
}

ScriptedMockClient ScriptedMockClient::from_file(const std::filesystem::path& path) {
    return ScriptedMockClient(nlohmann::json::parse(read_file(path)));
}

size_t ScriptedMockClient::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
}

std::string ScriptedMockClient::answer(const nlohmann::json& entry) {
    if (entry.is_string())
        return entry.get<std::string>();
    if (entry.is_object() && entry.contains("error"))
        throw LlmError(entry["error"].get<std::string>(),
                       "The language model did not answer (" + entry["error"].get<std::string>() + ").");
    throw std::invalid_argument("mock reply must be a string or {\"error\": kind}");
}

std::string ScriptedMockClient::complete(const std::vector<ChatMessage>& messages) {
    nlohmann::json entry;
    {
        std::lock_guard<std::mutex> lock(mu_);
        ++calls_;
        if (script_.contains("by_prompt_hash")) {
            std::string hash = sha256_hex(serialize_messages(messages));
            const auto& map = script_["by_prompt_hash"];
            if (map.contains(hash))
                entry = map[hash];
            else if (script_.contains("default"))
                entry = script_["default"];
            else
                throw LlmError("script", "The mock script has no reply for this prompt.");
        } else {
            const auto& replies = script_["replies"];
            if (next_ < replies.size())
                entry = replies[next_++];
            else if (script_.value("repeat_last", false) && !replies.empty())
                entry = replies.back();
            else
                throw LlmError("script", "The mock script has run out of replies.");
        }
    }
    return answer(entry);
}

} // namespace ttvga
