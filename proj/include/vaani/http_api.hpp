#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "vaani/session.hpp"

namespace httplib {
class Server;
}

namespace vaani {

nlohmann::json snapshot_to_json(const SessionSnapshot& snap);

// Registers the /api/session routes on `server`, plus static files under
// /ui/ when `ui_dir` exists.
void mount_api(httplib::Server& server, SessionStore& store, const std::filesystem::path& ui_dir = {});

// Blocking server; expired sessions are swept on every request.
class ApiServer {
 public:
  ApiServer(std::shared_ptr<SessionStore> store, std::filesystem::path ui_dir = {});
  ~ApiServer();

  // Port 0 binds any free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();
  SessionStore& store() { return *store_; }

 private:
  std::shared_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace vaani
