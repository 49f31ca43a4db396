#include "vaani/session.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>

#include "vaani/text.hpp"

namespace vaani {

std::string_view state_name(SessionState s) {
  switch (s) {
    case SessionState::AwaitQuery: return "AwaitQuery";
    case SessionState::Recognized: return "Recognized";
    case SessionState::Searching: return "Searching";
    case SessionState::Results: return "Results";
    case SessionState::Navigated: return "Navigated";
    case SessionState::AskAgain: return "AskAgain";
    case SessionState::NoResults: return "NoResults";
  }
  return "?";
}

bool legal_transition(SessionState from, SessionState to) {
  using S = SessionState;
  switch (from) {
    case S::AwaitQuery:
    case S::AskAgain:
    case S::NoResults:
      return to == S::Recognized || to == S::AskAgain;
    case S::Recognized:
      return to == S::Searching || to == S::AskAgain;
    case S::Searching:
      return to == S::Results || to == S::NoResults || to == S::AskAgain;
    case S::Results:
      return to == S::Navigated || to == S::Recognized || to == S::AskAgain;
    case S::Navigated:
      return to == S::Results || to == S::Recognized || to == S::AskAgain;
  }
  return false;
}

std::string_view error_kind_name(SessionError::Kind k) {
  switch (k) {
    case SessionError::Kind::Config: return "config_error";
    case SessionError::Kind::State: return "state_error";
    case SessionError::Kind::Range: return "range_error";
    case SessionError::Kind::Navigation: return "navigation_error";
    case SessionError::Kind::Input: return "input_error";
    case SessionError::Kind::NotFound: return "not_found";
  }
  return "error";
}

void SessionConfig::validate() const {
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
    throw SessionError(SessionError::Kind::Config, "confidence_threshold must be in (0, 1)");
  if (max_results == 0) throw SessionError(SessionError::Kind::Config, "max_results must be at least 1");
  if (idle_timeout.count() <= 0) throw SessionError(SessionError::Kind::Config, "idle_timeout must be positive");
}

Session::Session(std::string id, std::shared_ptr<const Engine> engine, SessionConfig cfg)
    : id_(std::move(id)), engine_(std::move(engine)), cfg_(cfg) {
  cfg_.validate();
  if (!engine_) throw SessionError(SessionError::Kind::Config, "resources not loaded");
}

SessionSnapshot Session::snapshot() const {
  return {id_, state_, hypothesis_, results_, answer_, message_, current_doc_, history_};
}

void Session::require(std::initializer_list<SessionState> allowed, std::string_view op) const {
  if (std::find(allowed.begin(), allowed.end(), state_) == allowed.end())
    throw SessionError(SessionError::Kind::State,
                       std::string(op) + " not allowed in state " + std::string(state_name(state_)));
}

void Session::move_to(SessionState next) {
  if (!legal_transition(state_, next))
    throw std::logic_error("illegal transition " + std::string(state_name(state_)) + " -> " +
                           std::string(state_name(next)));
  state_ = next;
}

void Session::record(std::string kind, std::string payload, SessionState from) {
  history_.push_back({std::move(kind), std::move(payload), from, state_});
}

void Session::ask_again(std::string reason) {
  move_to(SessionState::AskAgain);
  hypothesis_.reset();
  results_.reset();
  answer_.reset();
  current_doc_.clear();
  message_ = std::move(reason);
}

void Session::accept_hypothesis(Hypothesis hyp, std::string kind, std::string payload) {
  const SessionState from = state_;
  if (hyp.empty()) {
    ask_again("no path");
  } else if (hyp.min_confidence() < cfg_.confidence_threshold) {
    auto weakest = std::min_element(hyp.per_word.begin(), hyp.per_word.end(),
                                    [](const WordSegment& a, const WordSegment& b) { return a.confidence < b.confidence; });
    ask_again("low confidence: " + weakest->word);
  } else {
    move_to(SessionState::Recognized);
    hypothesis_ = std::move(hyp);
    results_.reset();
    answer_.reset();
    current_doc_.clear();
    message_.reset();
  }
  record(std::move(kind), std::move(payload), from);
}

namespace {

constexpr std::initializer_list<SessionState> kQueryStates = {SessionState::AwaitQuery, SessionState::AskAgain,
                                                               SessionState::Results, SessionState::Navigated,
                                                               SessionState::NoResults};

std::vector<std::string> query_tokens(const std::string& text) {
  if (!is_ascii(text)) throw SessionError(SessionError::Kind::Input, "query must be romanized ASCII text");
  return split_ws(to_lower(text));
}

Hypothesis text_hypothesis(const std::vector<std::string>& words, const std::vector<double>& confidences) {
  Hypothesis h;
  h.total_log_prob = 0.0;
  for (size_t i = 0; i < words.size(); ++i) {
    h.words.push_back(words[i]);
    h.per_word.push_back({words[i], i, i + 1, confidences[i]});
  }
  return h;
}

}  // namespace

void Session::submit_text(const std::string& text) {
  require(kQueryStates, "query");
  if (!cfg_.text_mode_allowed) throw SessionError(SessionError::Kind::Input, "text mode disabled");
  auto words = query_tokens(text);
  const SessionState from = state_;
  if (words.empty()) {
    ask_again("empty query");
    record("query_text", text, from);
    return;
  }
  accept_hypothesis(text_hypothesis(words, std::vector<double>(words.size(), 1.0)), "query_text", text);
}

void Session::submit_simulated_speech(const std::string& text, const ConfusionModel& cm, uint64_t seed) {
  require(kQueryStates, "query");
  auto words = inject_errors(query_tokens(text), cm, seed);
  std::vector<double> conf;
  for (const auto& w : words) conf.push_back(1.0 - cm.max_incoming(w));
  Hypothesis h = text_hypothesis(words, conf);
  if (words.empty()) h.total_log_prob = kLogZero;
  std::string payload = dump_hypothesis(h);
  accept_hypothesis(std::move(h), "query_speech", std::move(payload));
}

void Session::submit_audio(const AudioClip& clip) {
  require(kQueryStates, "query");
  Hypothesis h;
  try {
    h = engine_->recognize(clip);
  } catch (const FeatureError& e) {
    throw SessionError(SessionError::Kind::Input, e.what());
  }
  std::string payload = dump_hypothesis(h);
  accept_hypothesis(std::move(h), "query_audio", std::move(payload));
}

void Session::submit_hypothesis(Hypothesis hyp, std::string kind) {
  require(kQueryStates, "query");
  std::string payload = dump_hypothesis(hyp);
  accept_hypothesis(std::move(hyp), std::move(kind), std::move(payload));
}

void Session::confirm() {
  require({SessionState::Recognized}, "confirm");
  const SessionState from = state_;
  move_to(SessionState::Searching);
  QueryOutcome out = engine_->run_query(hypothesis_->words, cfg_.max_results);
  if (!out.query) {
    ask_again("no keywords");
  } else if (out.page.hits.empty()) {
    move_to(SessionState::NoResults);
    results_ = std::move(out.page);
    message_ = "no results found";
  } else {
    move_to(SessionState::Results);
    current_doc_ = out.page.hits.front().doc_id;
    results_ = std::move(out.page);
    answer_ = std::move(out.answer);
    message_.reset();
  }
  record("confirm", "", from);
}

void Session::reject() {
  require({SessionState::Recognized}, "reject");
  const SessionState from = state_;
  ask_again("rejected");
  record("reject", "", from);
}

void Session::select_link(size_t n) {
  require({SessionState::Results, SessionState::Navigated}, "select");
  const auto& links = results_->numbered_links;
  if (n < 1 || n > links.size())
    throw SessionError(SessionError::Kind::Range,
                       "link " + std::to_string(n) + " out of range 1.." + std::to_string(links.size()));
  const Document* doc = engine_->documents().by_url(links[n - 1].target_url);
  if (!doc) throw SessionError(SessionError::Kind::Navigation, "dangling link " + links[n - 1].target_url);

  const SessionState from = state_;
  move_to(state_ == SessionState::Results ? SessionState::Navigated : SessionState::Results);
  current_doc_ = doc->id;
  results_->numbered_links = number_hyperlinks(*doc);
  record("select", std::to_string(n), from);
}

SessionSnapshot replay(const std::shared_ptr<const Engine>& engine, const SessionConfig& cfg,
                       const std::vector<SessionEvent>& events, const std::string& id) {
  Session s(id, engine, cfg);
  for (const auto& e : events) {
    if (e.kind == "query_text") {
      s.submit_text(e.payload);
    } else if (e.kind == "query_speech" || e.kind == "query_audio") {
      s.submit_hypothesis(parse_hypothesis(e.payload), e.kind);
    } else if (e.kind == "confirm") {
      s.confirm();
    } else if (e.kind == "reject") {
      s.reject();
    } else if (e.kind == "select") {
      s.select_link(std::stoul(e.payload));
    } else {
      throw SessionError(SessionError::Kind::Input, "unknown event kind " + e.kind);
    }
  }
  return s.snapshot();
}

SessionStore::SessionStore(std::shared_ptr<const Engine> engine, SessionConfig cfg)
    : engine_(std::move(engine)), cfg_(cfg) {
  cfg_.validate();
}

std::string SessionStore::create() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::unique_lock lock(mutex_);
  std::ostringstream os;
  os << std::hex << std::setfill('0') << std::setw(16) << rng() << '-' << ++counter_;
  std::string id = os.str();
  sessions_.emplace(id, std::make_shared<Entry>(Session(id, engine_, cfg_)));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError(SessionError::Kind::NotFound, "unknown session " + id);
  return it->second;
}

SessionSnapshot SessionStore::get(const std::string& id) {
  return with_session(id, [](Session& s) { return s.snapshot(); });
}

size_t SessionStore::expire(Clock::time_point now) {
  std::unique_lock lock(mutex_);
  size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    bool idle;
    {
      std::lock_guard<std::mutex> entry_lock(it->second->mutex);
      idle = now - it->second->last_used > cfg_.idle_timeout;
    }
    if (idle) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

size_t SessionStore::size() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

}  // namespace vaani
