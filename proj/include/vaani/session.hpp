#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vaani/pipeline.hpp"
#include "vaani/recognizer.hpp"
#include "vaani/search.hpp"

namespace vaani {

enum class SessionState { AwaitQuery, Recognized, Searching, Results, Navigated, AskAgain, NoResults };

std::string_view state_name(SessionState s);
// Edges of the dialog graph; anything else is rejected.
bool legal_transition(SessionState from, SessionState to);

// Error kinds map onto HTTP status codes in the service layer.
class SessionError : public std::runtime_error {
 public:
  enum class Kind { Config, State, Range, Navigation, Input, NotFound };
  SessionError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view error_kind_name(SessionError::Kind k);

struct SessionConfig {
  double confidence_threshold = 0.4;
  size_t max_results = 10;
  bool text_mode_allowed = true;
  std::chrono::seconds idle_timeout{30 * 60};

  void validate() const;  // throws SessionError(Config)
};

struct SessionEvent {
  std::string kind;  // query_text, query_speech, query_audio, confirm, reject, select
  std::string payload;
  SessionState from = SessionState::AwaitQuery;
  SessionState to = SessionState::AwaitQuery;
};

struct SessionSnapshot {
  std::string id;
  SessionState state = SessionState::AwaitQuery;
  std::optional<Hypothesis> hypothesis;
  std::optional<ResultPage> results;
  std::optional<Answer> answer;
  std::optional<std::string> message;
  std::string current_doc_id;  // page whose links are numbered
  std::vector<SessionEvent> history;
};

// One dialog. Not thread-safe on its own; SessionStore serializes access.
class Session {
 public:
  Session(std::string id, std::shared_ptr<const Engine> engine, SessionConfig cfg);

  const std::string& id() const { return id_; }
  SessionState state() const { return state_; }
  SessionSnapshot snapshot() const;

  void submit_text(const std::string& text);
  // Text passed through the recognition error model; confidence of each word
  // is 1 minus the largest probability of some other word turning into it.
  void submit_simulated_speech(const std::string& text, const ConfusionModel& cm, uint64_t seed);
  void submit_audio(const AudioClip& clip);
  // Accepts an already decoded hypothesis; used when replaying a log.
  void submit_hypothesis(Hypothesis hyp, std::string kind);
  void confirm();
  void reject();
  void select_link(size_t n);

 private:
  void require(std::initializer_list<SessionState> allowed, std::string_view op) const;
  void move_to(SessionState next);
  void record(std::string kind, std::string payload, SessionState from);
  void accept_hypothesis(Hypothesis hyp, std::string kind, std::string payload);
  void ask_again(std::string reason);

  std::string id_;
  std::shared_ptr<const Engine> engine_;
  SessionConfig cfg_;
  SessionState state_ = SessionState::AwaitQuery;
  std::optional<Hypothesis> hypothesis_;
  std::optional<ResultPage> results_;
  std::optional<Answer> answer_;
  std::optional<std::string> message_;
  std::string current_doc_;
  std::vector<SessionEvent> history_;
};

// Replays an event log on a fresh session. Recognition events carry the
// decoded hypothesis, so audio and simulated speech replay exactly.
SessionSnapshot replay(const std::shared_ptr<const Engine>& engine, const SessionConfig& cfg,
                       const std::vector<SessionEvent>& events, const std::string& id = "replay");

class SessionStore {
 public:
  using Clock = std::chrono::steady_clock;

  SessionStore(std::shared_ptr<const Engine> engine, SessionConfig cfg);

  std::string create();
  // Runs `fn` on the session under its own lock; refreshes the idle clock.
  template <typename Fn>
  auto with_session(const std::string& id, Fn&& fn) {
    auto entry = find(id);
    std::lock_guard<std::mutex> lock(entry->mutex);
    entry->last_used = Clock::now();
    return fn(entry->session);
  }
  SessionSnapshot get(const std::string& id);
  // Drops sessions idle for longer than the configured timeout.
  size_t expire(Clock::time_point now = Clock::now());
  size_t size() const;
  const SessionConfig& config() const { return cfg_; }
  const Engine& engine() const { return *engine_; }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)), last_used(Clock::now()) {}
    Session session;
    std::mutex mutex;
    Clock::time_point last_used;
  };
  std::shared_ptr<Entry> find(const std::string& id);

  std::shared_ptr<const Engine> engine_;
  SessionConfig cfg_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  uint64_t counter_ = 0;
};

}  // namespace vaani
