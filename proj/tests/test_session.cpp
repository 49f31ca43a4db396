#include <doctest.h>

#include <random>
#include <thread>

#include "vaani/session.hpp"

using namespace vaani;

namespace {

std::shared_ptr<const Engine> engine() {
  static auto e = Engine::load(default_engine_options(VAANI_DATA_DIR));
  return e;
}

Session fresh(SessionConfig cfg = {}) { return Session("t", engine(), cfg); }

const std::string kPotato = "Aaj Dili ki mandi mein aalu ka bhav kya hai";

bool edge_ok(const SessionEvent& e) {
  if (legal_transition(e.from, e.to)) return true;
  // confirm passes through Searching
  return e.kind == "confirm" && legal_transition(e.from, SessionState::Searching) &&
         legal_transition(SessionState::Searching, e.to);
}

}  // namespace

TEST_CASE("configuration is validated") {
  SessionConfig bad;
  bad.confidence_threshold = 1.0;
  CHECK_THROWS_AS(fresh(bad), SessionError);
  bad = {};
  bad.max_results = 0;
  CHECK_THROWS_AS(SessionStore(engine(), bad), SessionError);
  CHECK_THROWS_AS(Session("x", nullptr, {}), SessionError);
  try {
    bad = {};
    bad.confidence_threshold = 0.0;
    bad.validate();
    FAIL("no throw");
  } catch (const SessionError& e) {
    CHECK(e.kind() == SessionError::Kind::Config);
  }
}

TEST_CASE("text query is recognized with full confidence") {
  Session s = fresh();
  CHECK(s.state() == SessionState::AwaitQuery);
  s.submit_text(kPotato);
  auto snap = s.snapshot();
  CHECK(snap.state == SessionState::Recognized);
  REQUIRE(snap.hypothesis);
  CHECK(snap.hypothesis->words.size() == 10);
  CHECK(snap.hypothesis->words[0] == "aaj");
  for (const auto& w : snap.hypothesis->per_word) CHECK(w.confidence == 1.0);
  CHECK_FALSE(snap.message);

  s.confirm();
  snap = s.snapshot();
  CHECK(snap.state == SessionState::Results);
  REQUIRE(snap.results);
  CHECK(snap.results->hits.front().doc_id == "delhi-mandi");
  CHECK(snap.current_doc_id == "delhi-mandi");
  REQUIRE(snap.answer);
  CHECK_FALSE(snap.results->numbered_links.empty());
  CHECK(snap.history.size() == 2);
  CHECK(snap.history[1].from == SessionState::Recognized);
  CHECK(snap.history[1].to == SessionState::Results);
}

TEST_CASE("inputs that lead back to the user") {
  Session s = fresh();
  s.submit_text("   ");
  CHECK(s.state() == SessionState::AskAgain);
  CHECK(s.snapshot().message == "empty query");

  CHECK_THROWS_AS(s.submit_text("sone ka bhav \xE0\xA4\x95"), SessionError);
  CHECK(s.state() == SessionState::AskAgain);

  s.submit_text("kya hai");
  s.confirm();
  CHECK(s.state() == SessionState::AskAgain);
  CHECK(s.snapshot().message == "no keywords");

  s.submit_text("zzz qqq");
  s.confirm();
  CHECK(s.state() == SessionState::AskAgain);

  s.submit_text("kisan");
  s.confirm();
  CHECK(s.state() == SessionState::NoResults);
  CHECK(s.snapshot().message == "no results found");
  CHECK(s.snapshot().results->hits.empty());

  s.submit_text("sone ka bhav kya hai");
  s.reject();
  CHECK(s.state() == SessionState::AskAgain);
  CHECK(s.snapshot().message == "rejected");
  CHECK_FALSE(s.snapshot().hypothesis);

  SessionConfig no_text;
  no_text.text_mode_allowed = false;
  Session t = fresh(no_text);
  CHECK_THROWS_AS(t.submit_text("sone"), SessionError);
}

TEST_CASE("audio input") {
  Session s = fresh();
  AudioClip tiny{std::vector<double>(500, 0.01), 16000, "tiny"};
  s.submit_audio(tiny);
  CHECK(s.state() == SessionState::AskAgain);
  CHECK(s.snapshot().message == "no path");
  REQUIRE(s.snapshot().history.size() == 1);
  CHECK(s.snapshot().history[0].kind == "query_audio");

  AudioClip too_short{std::vector<double>(100, 0.0), 16000, "short"};
  try {
    s.submit_audio(too_short);
    FAIL("no throw");
  } catch (const SessionError& e) {
    CHECK(e.kind() == SessionError::Kind::Input);
  }
  CHECK(s.state() == SessionState::AskAgain);

  AudioClip tone = load_wav(std::filesystem::path(VAANI_FIXTURE_DIR) / "tone.wav");
  CHECK_NOTHROW(s.submit_audio(tone));
  CHECK((s.state() == SessionState::Recognized || s.state() == SessionState::AskAgain));
}

TEST_CASE("operations outside their states are rejected without a state change") {
  Session s = fresh();
  auto expect_state_error = [&](auto&& op) {
    SessionState before = s.state();
    size_t events = s.snapshot().history.size();
    try {
      op();
      FAIL("no throw");
    } catch (const SessionError& e) {
      CHECK(e.kind() == SessionError::Kind::State);
    }
    CHECK(s.state() == before);
    CHECK(s.snapshot().history.size() == events);
  };
  expect_state_error([&] { s.confirm(); });
  expect_state_error([&] { s.reject(); });
  expect_state_error([&] { s.select_link(1); });
  s.submit_text("sone ka bhav kya hai");
  expect_state_error([&] { s.submit_text("aalu"); });
  expect_state_error([&] { s.select_link(1); });
}

TEST_CASE("link selection") {
  Session s = fresh();
  s.submit_text("sone ka bhav kya hai");
  s.confirm();
  REQUIRE(s.state() == SessionState::Results);
  const auto links = s.snapshot().results->numbered_links;
  REQUIRE(links.size() == 3);

  try {
    s.select_link(links.size() + 1);
    FAIL("no throw");
  } catch (const SessionError& e) {
    CHECK(e.kind() == SessionError::Kind::Range);
  }
  CHECK_THROWS_AS(s.select_link(0), SessionError);
  CHECK(s.state() == SessionState::Results);

  s.select_link(1);
  auto snap = s.snapshot();
  CHECK(snap.state == SessionState::Navigated);
  CHECK(snap.current_doc_id == "silver-price");
  CHECK(snap.results->numbered_links == number_hyperlinks(*engine()->documents().by_id("silver-price")));

  s.select_link(2);
  CHECK(s.state() == SessionState::Results);
  CHECK(s.snapshot().current_doc_id == "home");

  // A new query is allowed from a page.
  s.submit_text("bharat ki rajdhani kya hai");
  CHECK(s.state() == SessionState::Recognized);
}

TEST_CASE("retry after a recognition error") {
  ConfusionModel forced{{{"dili", "bili", 1.0}}, {}, 0.0};
  Session s = fresh();
  s.submit_simulated_speech(kPotato, forced, 42);
  CHECK(s.state() == SessionState::AskAgain);
  CHECK(s.snapshot().message == "low confidence: bili");

  s.submit_text(kPotato);
  s.confirm();
  CHECK(s.state() == SessionState::Results);

  // Low-rate confusions usually pass straight through.
  Session t = fresh();
  t.submit_simulated_speech("sone ka bhav kya hai", query_confusions(), 1);
  CHECK(t.state() == SessionState::Recognized);
}

TEST_CASE("random event sequences follow the dialog graph") {
  const std::vector<std::string> texts{kPotato, "sone ka bhav kya hai", "kya hai", "", "kisan", "zzz",
                                       "who ka kya matlab hai", "bharat ki rajdhani kya hai"};
  ConfusionModel cm = query_confusions(0.4, 0.1);
  std::mt19937_64 rng(2024);
  for (int seq = 0; seq < 1000; ++seq) {
    Session s = fresh();
    for (int step = 0; step < 12; ++step) {
      SessionState before = s.state();
      size_t events = s.snapshot().history.size();
      try {
        switch (rng() % 6) {
          case 0: s.submit_text(texts[rng() % texts.size()]); break;
          case 1: s.submit_simulated_speech(texts[rng() % texts.size()], cm, rng()); break;
          case 2: s.confirm(); break;
          case 3: s.reject(); break;
          default: s.select_link(rng() % 8); break;
        }
      } catch (const SessionError&) {
        REQUIRE(s.state() == before);
        REQUIRE(s.snapshot().history.size() == events);
      }
    }
    for (const auto& e : s.snapshot().history) REQUIRE(edge_ok(e));
  }
}

TEST_CASE("replaying the event log reproduces the session") {
  Session s = fresh();
  s.submit_simulated_speech(kPotato, query_confusions(0.3, 0.05), 9);
  if (s.state() == SessionState::Recognized) s.confirm();
  s.submit_text("sone ka bhav kya hai");
  s.confirm();
  s.select_link(1);
  s.submit_audio({std::vector<double>(500, 0.01), 16000, "tiny"});
  auto original = s.snapshot();
  auto again = replay(engine(), {}, original.history, "t");
  CHECK(again.state == original.state);
  CHECK(again.current_doc_id == original.current_doc_id);
  CHECK(again.message == original.message);
  REQUIRE(again.history.size() == original.history.size());
  for (size_t i = 0; i < again.history.size(); ++i) {
    CHECK(again.history[i].from == original.history[i].from);
    CHECK(again.history[i].to == original.history[i].to);
  }
  CHECK_THROWS_AS(replay(engine(), {}, {{"dance", "", {}, {}}}), SessionError);
}

TEST_CASE("session store") {
  SessionConfig cfg;
  cfg.idle_timeout = std::chrono::seconds(60);
  SessionStore store(engine(), cfg);
  auto a = store.create();
  auto b = store.create();
  CHECK(a != b);
  CHECK(store.size() == 2);
  CHECK(store.get(a).state == SessionState::AwaitQuery);
  try {
    store.get("nope");
    FAIL("no throw");
  } catch (const SessionError& e) {
    CHECK(e.kind() == SessionError::Kind::NotFound);
  }

  std::vector<std::thread> workers;
  for (int i = 0; i < 4; ++i)
    workers.emplace_back([&store, id = (i % 2 ? a : b)] {
      for (int k = 0; k < 5; ++k) {
        store.with_session(id, [](Session& s) {
          if (s.state() == SessionState::Recognized) s.reject();
          s.submit_text("sone ka bhav kya hai");
          return 0;
        });
      }
    });
  for (auto& w : workers) w.join();
  CHECK(store.get(a).history.size() == 19);

  CHECK(store.expire(SessionStore::Clock::now()) == 0);
  CHECK(store.expire(SessionStore::Clock::now() + std::chrono::seconds(61)) == 2);
  CHECK(store.size() == 0);
}
