#include "vaani/http_api.hpp"

#include <httplib.h>

#include "vaani/audio.hpp"

namespace vaani {

using nlohmann::json;

json snapshot_to_json(const SessionSnapshot& snap) {
  json j;
  j["id"] = snap.id;
  j["state"] = std::string(state_name(snap.state));
  if (snap.hypothesis) {
    json conf = json::array();
    for (const auto& s : snap.hypothesis->per_word) conf.push_back(s.confidence);
    j["hypothesis"] = {{"words", snap.hypothesis->words}, {"confidences", conf}};
  } else {
    j["hypothesis"] = nullptr;
  }
  if (snap.results) {
    json hits = json::array();
    for (size_t i = 0; i < snap.results->hits.size(); ++i) {
      const Hit& h = snap.results->hits[i];
      hits.push_back({{"rank", i + 1}, {"number", i + 1}, {"title", h.title}, {"url", h.url}, {"score", h.score},
                      {"doc_id", h.doc_id}});
    }
    j["results"] = hits;
    json links = json::array();
    for (const auto& l : snap.results->numbered_links)
      links.push_back({{"number", l.number}, {"text", l.anchor_text}, {"url", l.target_url}});
    j["links"] = links;
  } else {
    j["results"] = nullptr;
    j["links"] = nullptr;
  }
  if (snap.answer)
    j["answer"] = {{"english", snap.answer->english_sentence},
                   {"hindi", snap.answer->hindi_rendering},
                   {"doc_id", snap.answer->source_doc_id}};
  else
    j["answer"] = nullptr;
  j["message"] = snap.message ? json(*snap.message) : json(nullptr);
  j["page"] = snap.current_doc_id.empty() ? json(nullptr) : json(snap.current_doc_id);
  return j;
}

namespace {

int status_for(SessionError::Kind k) {
  switch (k) {
    case SessionError::Kind::NotFound: return 404;
    case SessionError::Kind::State: return 409;
    case SessionError::Kind::Range: return 422;
    case SessionError::Kind::Navigation: return 422;
    case SessionError::Kind::Config:
    case SessionError::Kind::Input: return 400;
  }
  return 400;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, const std::string& detail) {
  send_json(res, status, {{"error", error}, {"detail", detail}});
}

// Runs `fn` and turns library errors into 4xx JSON bodies.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    send_error(res, status_for(e.kind()), error_kind_name(e.kind()), e.what());
  } catch (const AudioFormatError& e) {
    send_error(res, 415, "audio_format_error", e.what());
  } catch (const FeatureError& e) {
    send_error(res, 400, "input_error", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_json", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

bool is_wav(const httplib::Request& req) {
  auto ct = req.get_header_value("Content-Type");
  return ct.rfind("audio/wav", 0) == 0 || ct.rfind("audio/x-wav", 0) == 0 || ct.rfind("audio/wave", 0) == 0;
}

}  // namespace

void mount_api(httplib::Server& server, SessionStore& store, const std::filesystem::path& ui_dir) {
  const std::string id_re = R"(/api/session/([0-9a-zA-Z-]+))";

  server.Post("/api/session", [&store](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto id = store.create();
      auto snap = store.get(id);
      send_json(res, 201, {{"id", id}, {"state", state_name(snap.state)}});
    });
  });

  server.Get(id_re, [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, snapshot_to_json(store.get(req.matches[1]))); });
  });

  server.Post(id_re + "/query", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      if (is_wav(req)) {
        AudioClip clip = decode_wav(req.body, "upload");
        auto snap = store.with_session(id, [&](Session& s) {
          s.submit_audio(clip);
          return s.snapshot();
        });
        send_json(res, 200, snapshot_to_json(snap));
        return;
      }
      json body = parse_body(req);
      if (!body.contains("text") || !body["text"].is_string())
        throw SessionError(SessionError::Kind::Input, "body must be {\"text\": \"...\"} or audio/wav");
      const std::string text = body["text"];
      auto snap = store.with_session(id, [&](Session& s) {
        s.submit_text(text);
        return s.snapshot();
      });
      send_json(res, 200, snapshot_to_json(snap));
    });
  });

  server.Post(id_re + "/confirm", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto snap = store.with_session(req.matches[1], [](Session& s) {
        s.confirm();
        return s.snapshot();
      });
      send_json(res, 200, snapshot_to_json(snap));
    });
  });

  server.Post(id_re + "/reject", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto snap = store.with_session(req.matches[1], [](Session& s) {
        s.reject();
        return s.snapshot();
      });
      send_json(res, 200, snapshot_to_json(snap));
    });
  });

  server.Post(id_re + "/select", [&store](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = parse_body(req);
      if (!body.contains("n") || !body["n"].is_number_integer())
        throw SessionError(SessionError::Kind::Input, "body must be {\"n\": int}");
      long long n = body["n"];
      if (n < 1) throw SessionError(SessionError::Kind::Range, "link number must be positive");
      auto snap = store.with_session(req.matches[1], [&](Session& s) {
        s.select_link(static_cast<size_t>(n));
        return s.snapshot();
      });
      send_json(res, 200, snapshot_to_json(snap));
    });
  });

  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) server.set_mount_point("/ui", ui_dir.string());
}

ApiServer::ApiServer(std::shared_ptr<SessionStore> store, std::filesystem::path ui_dir)
    : store_(std::move(store)), server_(std::make_unique<httplib::Server>()) {
  mount_api(*server_, *store_, ui_dir);
  server_->set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    store_->expire();
    return httplib::Server::HandlerResponse::Unhandled;
  });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void ApiServer::listen() { server_->listen_after_bind(); }

void ApiServer::stop() {
  if (server_) server_->stop();
}

}  // namespace vaani
