// Acceptance checks, one PASS/FAIL line each. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "hmm_oracle.hpp"
#include "vaani/eval.hpp"
#include "vaani/morph.hpp"
#include "vaani/session.hpp"
#include "vaani/text.hpp"

using namespace vaani;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

const std::filesystem::path kData = VAANI_DATA_DIR;

std::shared_ptr<const Engine> engine() {
  static auto e = Engine::load(default_engine_options(kData));
  return e;
}

Outcome hmm_oracle() {
  std::mt19937_64 rng(20240601);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int mismatched_paths = 0;
  for (int i = 0; i < 200; ++i) {
    const size_t n = 1 + rng() % 4, T = 1 + rng() % 6, D = 1 + rng() % 3;
    Hmm m = oracle::random_model(rng, n, D, i % 2 == 1);
    FeatureSequence obs = oracle::random_obs(rng, T, D);
    auto e = oracle::enumerate(m, obs);
    double f = forward_loglik(m, obs);
    ViterbiResult v = viterbi(m, obs);
    auto gap = [](double a, double b) { return (a == kLogZero && b == kLogZero) ? 0.0 : std::abs(a - b); };
    worst = std::max({worst, gap(f, e.total), gap(v.log_prob, e.best)});
    if (e.best != kLogZero && std::abs(oracle::path_score(m, obs, v.state_path) - e.best) > 1e-9) ++mismatched_paths;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && mismatched_paths == 0 && secs < 5.0,
          fmt("max |diff| %.3g, %.3f s", worst, secs) + ", path mismatches " + std::to_string(mismatched_paths)};
}

Outcome baum_welch_monotone() {
  std::mt19937_64 rng(77);
  double worst_drop = 0.0;
  int broken = 0, short_runs = 0;
  for (int run = 0; run < 20; ++run) {
    Hmm gen = oracle::random_model(rng, 2 + rng() % 3, 1 + rng() % 3, run % 2 == 0);
    std::vector<FeatureSequence> data;
    for (int k = 0; k < 8; ++k) data.push_back(sample(gen, 15 + rng() % 20, rng()).obs);
    Hmm start = flat_start(gen, data, 1e-3);
    TrainConfig cfg;
    cfg.max_iters = 20;
    cfg.loglik_rel_tol = 0.0;
    auto r = baum_welch(start, data, cfg);
    if (r.iterations != 20) ++short_runs;
    for (size_t i = 1; i < r.loglik.size(); ++i) worst_drop = std::max(worst_drop, r.loglik[i - 1] - r.loglik[i]);
    try {
      r.model.validate(cfg.variance_floor);
    } catch (const HmmError&) {
      ++broken;
    }
  }
  return {worst_drop <= 1e-6 && broken == 0 && short_runs == 0,
          fmt("largest drop %.3g", worst_drop) + ", invalid models " + std::to_string(broken) +
              ", runs short of 20 iterations " + std::to_string(short_runs)};
}

Outcome self_recognition() {
  const auto t0 = Clock::now();
  auto res = load_resources(kData / "resources");
  SelfRecognitionConfig cfg;
  cfg.seed = 42;
  auto r = run_self_recognition(res, cfg);
  const double secs = seconds_since(t0);
  const auto& total = r.report;
  return {total.overall_accuracy_percent >= 95.0 && secs < 60.0 && r.references.size() == 100,
          fmt("accuracy %.1f%%, %.2f s", total.overall_accuracy_percent, secs)};
}

Outcome accuracy_formula() {
  const double a = accuracy(478, 66, 33);
  const double b = accuracy(100, 0, 0);
  int rejected = 0;
  for (auto [S, Es, Ed] : std::vector<std::tuple<long long, long long, long long>>{{0, 0, 0}, {10, -1, 0}, {10, 6, 5}}) {
    try {
      accuracy(S, Es, Ed);
    } catch (const EvalError&) {
      ++rejected;
    }
  }
  return {std::abs(a - 79.3) <= 0.05 && b == 100.0 && rejected == 3,
          fmt("accuracy(478,66,33)=%.1f, accuracy(100,0,0)=%.1f", a, b) + ", rejected " + std::to_string(rejected) + "/3"};
}

Outcome worked_translation() {
  auto e = engine();
  Translation t = e->translate_hindi("aaj dili ki mandi mein aalu ka bhav kya hai");
  const auto expected = split_ws("what is the price of potatoes in the market of delhi today");
  auto kw = drop_stop_words(t.english, e->resources().stop_words);
  bool stop_free = std::none_of(kw.begin(), kw.end(), [&](const std::string& w) { return e->resources().stop_words.contains(w); });
  std::set<std::string> have(kw.begin(), kw.end());
  bool all = true;
  for (const char* w : {"price", "potatoes", "market", "delhi", "today"}) all = all && have.count(w);
  return {t.english == expected && stop_free && all, "\"" + join(t.english, " ") + "\" -> [" + join(kw, ", ") + "]"};
}

Outcome dialogs() {
  auto e = engine();
  struct Case {
    const char* hindi;
    const char* needle;
  };
  const Case cases[] = {{"sone ka bhav kya hai", "31500"},
                        {"who ka kya matlab hai", "World Health Organization"},
                        {"bharat ki rajdhani kya hai", "delhi"}};
  bool ok = true;
  double slowest = 0.0;
  std::string detail;
  for (const auto& c : cases) {
    const auto t0 = Clock::now();
    Session s("acc", e, {});
    s.submit_text(c.hindi);
    if (s.state() == SessionState::Recognized) s.confirm();
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    auto snap = s.snapshot();
    std::string hindi = snap.answer ? snap.answer->hindi_rendering : "";
    std::string english = snap.answer ? snap.answer->english_sentence : "";
    bool hit = snap.state == SessionState::Results &&
               (hindi.find(c.needle) != std::string::npos || english.find(c.needle) != std::string::npos);
    ok = ok && hit && secs < 1.0;
    detail += (detail.empty() ? "" : "; ") + hindi;
  }
  return {ok, detail + fmt(" (slowest %.3f s)", slowest)};
}

Outcome hyperlink_navigation() {
  auto e = engine();
  const auto& docs = e->documents();
  // Reach every document from search results plus numbered links.
  std::map<std::string, Session> at;
  std::vector<std::string> queue;
  for (const char* q : {"sone ka bhav kya hai", "bharat ki rajdhani kya hai"}) {
    Session start("acc", e, {});
    start.submit_text(q);
    start.confirm();
    if (start.state() != SessionState::Results) return {false, std::string("no results for ") + q};
    const std::string top = start.snapshot().current_doc_id;
    if (at.emplace(top, start).second) queue.push_back(top);
  }
  size_t checked_links = 0;
  std::string problem;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    const Session& here = at.at(queue[qi]);
    const Document* doc = docs.by_id(queue[qi]);
    auto numbered = here.snapshot().results->numbered_links;
    if (numbered.size() != doc->links.size()) problem = "link count differs on " + doc->id;
    for (size_t n = 1; n <= numbered.size(); ++n) {
      if (numbered[n - 1].number != n || numbered[n - 1].target_url != doc->links[n - 1].href)
        problem = "numbering out of order on " + doc->id;
      Session next = here;
      const SessionState before = next.state();
      next.select_link(n);
      ++checked_links;
      const std::string target = next.snapshot().current_doc_id;
      if (docs.by_url(numbered[n - 1].target_url)->id != target || next.state() == before)
        problem = "link " + std::to_string(n) + " on " + doc->id + " did not navigate";
      if (!at.count(target)) {
        at.emplace(target, next);
        queue.push_back(target);
      }
    }
    Session past = here;
    const SessionState before = past.state();
    const size_t events = past.snapshot().history.size();
    try {
      past.select_link(numbered.size() + 1);
      problem = "L+1 accepted on " + doc->id;
    } catch (const SessionError& err) {
      if (err.kind() != SessionError::Kind::Range || past.state() != before || past.snapshot().history.size() != events)
        problem = "L+1 changed state on " + doc->id;
    }
  }
  bool covered = at.size() == docs.size();
  if (!covered) problem = "reached " + std::to_string(at.size()) + " of " + std::to_string(docs.size()) + " documents";
  return {problem.empty(), problem.empty() ? std::to_string(at.size()) + " documents, " +
                                                 std::to_string(checked_links) + " links"
                                           : problem};
}

Outcome retry_loop() {
  auto e = engine();
  const std::string query = "aaj dili ki mandi mein aalu ka bhav kya hai";
  Session s("acc", e, {});
  ConfusionModel cm = query_confusions();
  cm.substitutions.insert(cm.substitutions.begin(), {"dili", "bili", 1.0});
  cm.substitutions.erase(std::remove_if(cm.substitutions.begin() + 1, cm.substitutions.end(),
                                        [](const Substitution& x) { return x.from == "dili"; }),
                         cm.substitutions.end());
  cm.deletion.clear();
  s.submit_simulated_speech(query, cm, 42);
  bool asked = false;
  if (s.state() == SessionState::AskAgain) {
    asked = true;
  } else if (s.state() == SessionState::Recognized) {
    s.confirm();
    asked = s.state() == SessionState::AskAgain;
  }
  const std::string why = s.snapshot().message.value_or("");
  s.submit_text(query);
  s.confirm();
  const bool recovered = s.state() == SessionState::Results;

  const std::vector<std::string> texts{query, "sone ka bhav kya hai", "kya hai", "", "kisan", "who ka kya matlab hai"};
  ConfusionModel noisy = query_confusions(0.4, 0.1);
  std::mt19937_64 rng(1000);
  size_t illegal = 0, events = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    Session f("fuzz", e, {});
    try {
      for (int step = 0; step < 12; ++step) {
        try {
          switch (rng() % 6) {
            case 0: f.submit_text(texts[rng() % texts.size()]); break;
            case 1: f.submit_simulated_speech(texts[rng() % texts.size()], noisy, rng()); break;
            case 2: f.confirm(); break;
            case 3: f.reject(); break;
            default: f.select_link(rng() % 8); break;
          }
        } catch (const SessionError&) {
        }
      }
    } catch (const std::logic_error&) {
      ++illegal;
    }
    for (const auto& ev : f.snapshot().history) {
      ++events;
      bool ok = legal_transition(ev.from, ev.to) ||
                (ev.kind == "confirm" && legal_transition(ev.from, SessionState::Searching) &&
                 legal_transition(SessionState::Searching, ev.to));
      if (!ok) ++illegal;
    }
  }
  return {asked && recovered && illegal == 0,
          "first attempt: " + why + "; retry " + (recovered ? "reached Results" : "failed") + "; fuzz " +
              std::to_string(events) + " events, " + std::to_string(illegal) + " illegal"};
}

Outcome morphology_round_trip() {
  auto res = load_resources(kData / "resources");
  MorphLexicon hi = MorphLexicon::from_source(res.source);
  MorphLexicon en = MorphLexicon::from_bilingual(res.e2h);
  struct Side {
    const ParadigmTable* table;
    const MorphLexicon* lex;
    std::vector<std::pair<std::string, Category>> roots;
  };
  Side sides[2] = {{&res.paradigms_hi, &hi, {}}, {&res.paradigms_en, &en, {}}};
  for (const auto& r : res.source.hindi_root_lexicon) sides[0].roots.emplace_back(r.root, r.category);
  for (const auto& r : res.e2h.rules) sides[1].roots.emplace_back(r.source_root, r.category);

  size_t rows = 0, ok_rows = 0;
  std::string first_bad;
  for (const auto& side : sides) {
    for (const auto& rule : side.table->rules) {
      ++rows;
      size_t tried = 0, good = 0;
      for (const auto& [root, cat] : side.roots) {
        if (cat != rule.category || !ends_with(root, rule.root_replacement) ||
            root.size() <= rule.root_replacement.size())
          continue;
        const std::string expected = root.substr(0, root.size() - rule.root_replacement.size()) + rule.suffix;
        const std::string surface = generate(root, rule.features, *side.table, cat);
        if (surface != expected) continue;
        ++tried;
        Analysis a = analyze(surface, *side.table, *side.lex);
        if (a.root == root && subsumes(a.features, rule.features)) ++good;
      }
      if (tried > 0 && good == tried)
        ++ok_rows;
      else if (first_bad.empty())
        first_bad = std::string(category_name(rule.category)) + " -" + rule.suffix;
    }
    for (const auto& irr : side.table->irregulars) {
      ++rows;
      Analysis a = analyze(generate(irr.root, irr.features, *side.table, irr.category), *side.table, *side.lex);
      if (a.root == irr.root && a.features == irr.features)
        ++ok_rows;
      else if (first_bad.empty())
        first_bad = irr.surface;
    }
  }
  return {ok_rows == rows, std::to_string(ok_rows) + "/" + std::to_string(rows) + " rows" +
                               (first_bad.empty() ? "" : ", first failure " + first_bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"hmm-oracle-equivalence", hmm_oracle},
      {"baum-welch-monotonicity", baum_welch_monotone},
      {"self-recognition-accuracy", self_recognition},
      {"accuracy-formula", accuracy_formula},
      {"worked-translation", worked_translation},
      {"dialog-reproduction", dialogs},
      {"hyperlink-navigation", hyperlink_navigation},
      {"retry-loop", retry_loop},
      {"morphology-round-trip", morphology_round_trip},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures;
}
