#include "ttvga/service/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <stdexcept>

#include <httplib.h>

#include "ttvga/agent/validate.hpp"
#include "ttvga/util/digest.hpp"
#include "ttvga/util/files.hpp"
#include "ttvga/vga/image.hpp"

namespace ttvga {

namespace fs = std::filesystem;
using nlohmann::json;

struct Service::Slot {
    std::mutex busy;       // held for the duration of a chat turn or export
    std::mutex frames_mu;  // serializes frame capture for this session
    DesignSession session;
    std::unique_ptr<LlmClient> client;
};

namespace {

const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& message, json extra = json::object()) {
    extra["error"] = message;
    send_json(res, status, extra);
}

std::optional<json> parse_body(const httplib::Request& req) {
    if (req.body.empty())
        return std::nullopt;
    try {
        json j = json::parse(req.body);
        if (!j.is_object())
            return std::nullopt;
        return j;
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

bool valid_session_id(const std::string& id) { return std::regex_match(id, std::regex("sess-[0-9]{6,}")); }

json turn_json(const ConversationTurn& t) {
    return {{"role", std::string(to_string(t.role))}, {"text", t.text}, {"timestamp", t.timestamp}, {"failed", t.failed}};
}

} // namespace

void apply_env_overrides(ServiceConfig& c) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v)
            return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("TTVGA_LISTEN"))
        c.host = *v;
    if (auto v = env("TTVGA_PORT"))
        c.port = std::stoi(*v);
    if (auto v = env("TTVGA_DATA_DIR"))
        c.data_dir = *v;
    if (auto v = env("TTVGA_LLM_ENDPOINT"))
        c.llm.endpoint = *v;
    if (auto v = env("TTVGA_LLM_MODEL"))
        c.llm.model = *v;
    if (auto v = env("TTVGA_LLM_KEY"))
        c.llm.api_key = *v;
    if (auto v = env("TTVGA_MOCK_SCRIPT"))
        c.mock_script = json::parse(read_file(*v));
}

Service::Service(ServiceConfig config) : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
    std::error_code ec;
    fs::create_directories(config_.data_dir / "sessions", ec);
    fs::path probe = config_.data_dir / ".write-test";
    try {
        write_file_atomic(probe, "ok");
        fs::remove(probe);
    } catch (const std::exception&) {
        throw std::runtime_error("data directory is not writable: " + config_.data_dir.string());
    }
    if (!config_.llm_factory) {
        if (config_.mock_script) {
            json script = *config_.mock_script;
            config_.llm_factory = [script] { return std::make_unique<ScriptedMockClient>(script); };
        } else {
            HttpLlmSettings settings = config_.llm;
            config_.llm_factory = [settings] { return std::make_unique<HttpLlmClient>(settings); };
        }
    }
    for (const auto& e : fs::directory_iterator(config_.data_dir / "sessions")) {
        std::string name = e.path().filename().string();
        if (valid_session_id(name))
            next_id_ = std::max<uint64_t>(next_id_, std::stoull(name.substr(5)));
    }
    server_->set_payload_max_length(config_.max_body_bytes);
    routes();
}

Service::~Service() { stop(); }

bool Service::listen() { return server_->listen(config_.host, config_.port); }
int Service::bind_any_port() { return server_->bind_to_any_port(config_.host); }
bool Service::listen_after_bind() { return server_->listen_after_bind(); }
void Service::stop() {
    if (server_->is_running())
        server_->stop();
}
void Service::wait_until_ready() const { server_->wait_until_ready(); }

fs::path Service::session_dir(const std::string& id) const { return config_.data_dir / "sessions" / id; }

std::string Service::next_session_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sess-%06llu", static_cast<unsigned long long>(++next_id_));
    return buf;
}

std::shared_ptr<Service::Slot> Service::create_session(std::string& id_out) {
    std::lock_guard lock(registry_mu_);
    size_t existing = 0;
    for (const auto& e : fs::directory_iterator(config_.data_dir / "sessions"))
        if (valid_session_id(e.path().filename().string()))
            ++existing;
    if (existing >= config_.max_sessions)
        return nullptr;
    id_out = next_session_id();
    auto slot = std::make_shared<Slot>();
    slot->session = DesignSession(id_out, config_.clock);
    slot->session.attach_log(session_dir(id_out) / "log.ndjson");
    slot->client = config_.llm_factory();
    sessions_[id_out] = slot;
    return slot;
}

std::shared_ptr<Service::Slot> Service::find_session(const std::string& id) {
    if (!valid_session_id(id))
        return nullptr;
    std::lock_guard lock(registry_mu_);
    if (auto it = sessions_.find(id); it != sessions_.end())
        return it->second;
    fs::path log = session_dir(id) / "log.ndjson";
    if (!fs::exists(log))
        return nullptr;
    auto slot = std::make_shared<Slot>();
    slot->session = DesignSession::load(log, id, config_.clock);
    slot->client = config_.llm_factory();
    sessions_[id] = slot;
    return slot;
}

json Service::session_json(const Slot& slot) const {
    const DesignSession& s = slot.session;
    json turns = json::array();
    for (const auto& t : s.turns())
        turns.push_back(turn_json(t));
    json revisions = json::array();
    for (const auto& r : s.revisions()) {
        json rev = {{"revision", r.source.revision},
                    {"origin", std::string(to_string(r.source.origin))},
                    {"source", r.source.text},
                    {"quick_report", r.quick_report}};
        rev["full_report"] = r.full_report ? *r.full_report : json(nullptr);
        revisions.push_back(std::move(rev));
    }
    return {{"session_id", s.id()},
            {"status", std::string(to_string(s.status()))},
            {"turns", std::move(turns)},
            {"revisions", std::move(revisions)},
            {"exported", fs::exists(session_dir(s.id()) / "export" / "export.tar")}};
}

fs::path Service::ensure_frames(Slot& slot, uint32_t revision, std::optional<uint8_t> ui_in, int& status,
                                json& error) {
    std::lock_guard lock(slot.frames_mu);
    const auto& revs = slot.session.revisions();
    if (revision == 0 || revision > revs.size()) {
        status = 404;
        error = {{"error", "no revision " + std::to_string(revision)}};
        return {};
    }
    const RevisionRecord& rec = revs[revision - 1];
    if (!rec.quick_report.value("sim_ok", false)) {
        status = 422;
        json sim = rec.quick_report.value("simulation", json::object());
        error = {{"error", "this revision did not pass simulation, so there are no frames"},
                 {"diagnosis", sim.value("error", json(nullptr))},
                 {"report", rec.quick_report}};
        return {};
    }
    fs::path dir = session_dir(slot.session.id()) / "frames" / std::to_string(revision);
    if (ui_in)
        dir /= "ui_in-" + std::to_string(*ui_in);
    fs::path done = dir / "complete";
    if (fs::exists(done))
        return dir;

    ValidateOptions options;
    options.frames = config_.viewer_frames;
    if (ui_in)
        options.pokes.push_back({0, "ui_in", *ui_in});
    std::vector<Frame> frames;
    ValidationReport report = validate(rec.source, Depth::Quick, options, &frames);
    if (!report.sim_ok()) {
        status = 422;
        error = {{"error", "simulation failed"}, {"report", report.to_json()}};
        return {};
    }
    if (!ui_in) {
        json digests = rec.quick_report["simulation"].value("frame_digests", json::array());
        if (!digests.empty() && digests[0] != frames.at(0).digest()) {
            status = 500;
            error = {{"error", "re-captured frame differs from the recorded report"}};
            return {};
        }
    }
    for (size_t i = 0; i < frames.size(); ++i) {
        write_file_atomic(dir / (std::to_string(i) + ".ppm"), encode_ppm(frames[i]));
        write_file_atomic(dir / (std::to_string(i) + ".png"), encode_png(frames[i]));
        write_file_atomic(dir / (std::to_string(i) + ".sha256"), frames[i].digest());
    }
    write_file_atomic(done, std::to_string(frames.size()));
    return dir;
}

void Service::routes() {
    httplib::Server& s = *server_;

    s.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        std::string origin = req.get_header_value("Origin");
        if (!origin.empty() &&
            std::find(config_.cors_origins.begin(), config_.cors_origins.end(), origin) != config_.cors_origins.end()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Vary", "Origin");
        }
    });
    s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Max-Age", "600");
    });
    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send_error(res, 500, what);
    });

    s.Get("/api/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"ok", true}}); });

    s.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
        std::string id;
        if (!create_session(id)) {
            send_error(res, 503, "the maximum number of sessions has been reached");
            return;
        }
        send_json(res, 201, {{"session_id", id}});
    });

    s.Get("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
        std::vector<std::string> ids;
        for (const auto& e : fs::directory_iterator(config_.data_dir / "sessions"))
            if (valid_session_id(e.path().filename().string()) && fs::exists(e.path() / "log.ndjson"))
                ids.push_back(e.path().filename().string());
        std::sort(ids.begin(), ids.end());
        json list = json::array();
        for (const auto& id : ids) {
            auto slot = find_session(id);
            if (!slot)
                continue;
            std::lock_guard lock(slot->busy);
            list.push_back({{"session_id", id},
                            {"status", std::string(to_string(slot->session.status()))},
                            {"turns", slot->session.turns().size()},
                            {"revisions", slot->session.revisions().size()}});
        }
        send_json(res, 200, {{"sessions", list}});
    });

    s.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        auto slot = find_session(req.matches[1]);
        if (!slot) {
            send_error(res, 404, "unknown session");
            return;
        }
        std::unique_lock lock(slot->busy, std::try_to_lock);
        if (!lock.owns_lock()) {
            send_error(res, 409, "the session is busy, try again in a moment");
            return;
        }
        send_json(res, 200, session_json(*slot));
    });

    s.Post(R"(/api/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
        auto slot = find_session(req.matches[1]);
        if (!slot) {
            send_error(res, 404, "unknown session");
            return;
        }
        auto body = parse_body(req);
        if (!body || !body->contains("text") || !(*body)["text"].is_string() ||
            (*body)["text"].get<std::string>().empty()) {
            send_error(res, 400, "expected a JSON body with a non-empty \"text\" field");
            return;
        }
        std::unique_lock lock(slot->busy, std::try_to_lock);
        if (!lock.owns_lock()) {
            send_error(res, 409, "the agent is still working on the previous message");
            return;
        }
        ChatResult r = chat_turn(slot->session, (*body)["text"].get<std::string>(), config_.agent, *slot->client);
        json out = {{"reply", r.reply},
                    {"report", r.report ? r.report->to_json() : json(nullptr)},
                    {"revision", r.revision ? json(*r.revision) : json(nullptr)},
                    {"llm_calls", r.llm_calls},
                    {"status", std::string(to_string(slot->session.status()))}};
        if (r.error) {
            out["error"] = *r.error;
            out["retry"] = true;
            send_json(res, 502, out);
            return;
        }
        send_json(res, 200, out);
    });

    s.Post("/api/validate", [](const httplib::Request& req, httplib::Response& res) {
        auto body = parse_body(req);
        if (!body || !body->contains("source") || !(*body)["source"].is_string() ||
            (*body)["source"].get<std::string>().empty()) {
            send_error(res, 400, "expected a JSON body with a non-empty \"source\" field");
            return;
        }
        Depth depth = Depth::Quick;
        ValidateOptions options;
        try {
            depth = depth_from_string(body->value("depth", "quick"));
            for (const auto& p : body->value("pokes", json::array()))
                options.pokes.push_back(
                    {p.at("cycle").get<uint64_t>(), p.at("input").get<std::string>(), p.at("value").get<uint64_t>()});
        } catch (const std::exception& e) {
            send_error(res, 400, e.what());
            return;
        }
        ValidationReport report = validate(DesignSource{(*body)["source"].get<std::string>(), Origin::User, 0},
                                           depth, options);
        send_json(res, 200, report.to_json());
    });

    s.Get(R"(/api/sessions/([^/]+)/frames/([0-9]+)/([0-9]+)\.(ppm|png))",
          [this](const httplib::Request& req, httplib::Response& res) {
              auto slot = find_session(req.matches[1]);
              if (!slot) {
                  send_error(res, 404, "unknown session");
                  return;
              }
              uint32_t revision = static_cast<uint32_t>(std::stoul(req.matches[2]));
              unsigned long n = std::stoul(req.matches[3]);
              std::string ext = req.matches[4];
              std::optional<uint8_t> ui_in;
              if (req.has_param("ui_in")) {
                  unsigned long v = 256;
                  try {
                      v = std::stoul(req.get_param_value("ui_in"));
                  } catch (const std::exception&) {
                  }
                  if (v > 255) {
                      send_error(res, 400, "ui_in must be a number from 0 to 255");
                      return;
                  }
                  ui_in = static_cast<uint8_t>(v);
              }
              int status = 200;
              json error;
              fs::path dir = ensure_frames(*slot, revision, ui_in, status, error);
              if (status != 200) {
                  send_json(res, status, error);
                  return;
              }
              fs::path file = dir / (std::to_string(n) + "." + ext);
              if (n >= config_.viewer_frames || !fs::exists(file)) {
                  send_error(res, 404, "frame " + std::to_string(n) + " was not captured");
                  return;
              }
              res.set_header("X-Frame-Digest", read_file(dir / (std::to_string(n) + ".sha256")));
              res.set_header("Cache-Control", "max-age=31536000, immutable");
              res.set_content(read_file(file), ext == "png" ? "image/png" : "image/x-portable-pixmap");
          });

    s.Post(R"(/api/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
        auto slot = find_session(req.matches[1]);
        if (!slot) {
            send_error(res, 404, "unknown session");
            return;
        }
        std::unique_lock lock(slot->busy, std::try_to_lock);
        if (!lock.owns_lock()) {
            send_error(res, 409, "the session is busy, try again in a moment");
            return;
        }
        std::string author = config_.export_author;
        if (auto body = parse_body(req))
            author = body->value("author", author);
        ExportOutcome out = export_session(slot->session, session_dir(slot->session.id()) / "export", author);
        json report = out.report ? out.report->to_json() : json(nullptr);
        if (!out.ok) {
            send_error(res, 409, out.message,
                       {{"report", report}, {"status", std::string(to_string(slot->session.status()))}});
            return;
        }
        send_json(res, 200,
                  {{"manifest", json::parse(out.manifest->to_json())},
                   {"report", report},
                   {"status", std::string(to_string(slot->session.status()))},
                   {"archive", "/api/sessions/" + slot->session.id() + "/export/archive"}});
    });

    s.Get(R"(/api/sessions/([^/]+)/export/archive)", [this](const httplib::Request& req, httplib::Response& res) {
        auto slot = find_session(req.matches[1]);
        fs::path tar = slot ? session_dir(slot->session.id()) / "export" / "export.tar" : fs::path();
        if (!slot || !fs::exists(tar)) {
            send_error(res, 404, "no export archive for this session");
            return;
        }
        res.set_header("Content-Disposition", "attachment; filename=\"" + slot->session.id() + ".tar\"");
        res.set_content(read_file(tar), "application/x-tar");
    });
}

} // namespace ttvga
