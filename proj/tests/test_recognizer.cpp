#include <doctest.h>

#include <cmath>
#include <random>

#include "hmm_oracle.hpp"
#include "vaani/recognizer.hpp"
#include "vaani/synthetic.hpp"

using namespace vaani;

namespace {

struct Fixture {
  ResourceBundle res = load_resources(std::filesystem::path(VAANI_DATA_DIR) / "resources");
  AcousticModel am = make_generator_models(res.phones, 13, 42);

  WordModel word(std::string_view w) const { return compose_word_model(w, res.pron, res.phones, am); }
};

const Fixture& fx() {
  static Fixture f;
  return f;
}

WordModel wrap(std::string name, Hmm m) {
  WordModel w;
  w.word = std::move(name);
  w.units = {w.word};
  w.unit_offsets = {0};
  w.model = std::move(m);
  return w;
}

// Best score over every global state path, scoring word re-entry explicitly.
double brute_force_best(const GrammarNetwork& net, const FeatureSequence& obs) {
  std::vector<std::pair<size_t, size_t>> states;  // (word, state)
  for (size_t w = 0; w < net.words.size(); ++w)
    for (size_t s = 0; s < net.words[w].model.num_states(); ++s) states.emplace_back(w, s);
  const size_t G = states.size(), T = obs.num_frames();
  std::vector<size_t> idx(T, 0);
  double best = kLogZero;
  while (true) {
    double score = 0.0;
    for (size_t t = 0; t < T && score != kLogZero; ++t) {
      auto [w, s] = states[idx[t]];
      const Hmm& h = net.words[w].model;
      double step;
      if (t == 0) {
        step = net.log_priors[w] + h.initial(s);
      } else {
        auto [pw, ps] = states[idx[t - 1]];
        const Hmm& ph = net.words[pw].model;
        double inside = (pw == w && ph.allowed(ps, s)) ? ph.transition(ps, s) : kLogZero;
        double across = net.loop ? ph.exit(ps) + net.inter_word_log_penalty + net.log_priors[w] + h.initial(s)
                                 : kLogZero;
        step = std::max(inside, across);
      }
      score = step == kLogZero ? kLogZero : score + step + h.emission_log_prob(s, obs.frame(t));
    }
    if (score != kLogZero) {
      auto [w, s] = states[idx[T - 1]];
      score += net.words[w].model.exit(s) + net.end_log_penalty;
      best = std::max(best, score);
    }
    size_t k = 0;
    while (k < T && ++idx[k] == G) idx[k++] = 0;
    if (k == T) break;
  }
  return best;
}

}  // namespace

TEST_CASE("word composition concatenates unit models") {
  const auto& f = fx();
  WordModel aam = f.word("aam");
  CHECK(aam.units == std::vector<std::string>{"aa", "m"});
  CHECK(aam.model.num_states() == 6);
  WordModel bhav = f.word("bhav");
  CHECK(bhav.units == std::vector<std::string>{"bcl", "bh", "aa", "v"});
  CHECK(bhav.model.num_states() == 12);
  CHECK(bhav.unit_offsets == std::vector<size_t>{0, 3, 6, 9});
  CHECK_NOTHROW(bhav.model.validate());
  // Only the last state of the word may exit.
  for (size_t s = 0; s + 1 < bhav.model.num_states(); ++s) CHECK(bhav.model.exit(s) == kLogZero);
  CHECK(bhav.model.exit(11) == doctest::Approx(std::log(0.4)));
  CHECK(bhav.model.transition(2, 3) == doctest::Approx(std::log(0.4)));

  CHECK_THROWS_AS(f.word("qqq"), OovError);
  AcousticModel partial = f.am;
  partial.phones.erase("m");
  CHECK_THROWS_AS(compose_word_model("aam", f.res.pron, f.res.phones, partial), RecognizerError);
}

TEST_CASE("grammar priors") {
  const auto& f = fx();
  auto one = build_grammar({f.word("aam")});
  CHECK(std::exp(one.log_priors[0]) == doctest::Approx(1.0));

  auto four = build_grammar({f.word("aaj"), f.word("ki"), f.word("ka"), f.word("hai")});
  for (double lp : four.log_priors) CHECK(std::exp(lp) == doctest::Approx(0.25));
  CHECK(four.index_of("ka") == 2);
  CHECK(four.index_of("zzz") == static_cast<size_t>(-1));

  auto weighted = build_grammar({f.word("aaj"), f.word("ki")}, {3.0, 1.0});
  CHECK(std::exp(weighted.log_priors[0]) == doctest::Approx(0.75));
  CHECK(std::exp(weighted.log_priors[1]) == doctest::Approx(0.25));

  CHECK_THROWS_AS(build_grammar({}), RecognizerError);
  CHECK_THROWS_AS(build_grammar({f.word("ki"), f.word("ki")}), RecognizerError);
  CHECK_THROWS_AS(build_grammar({f.word("aaj"), f.word("ki")}, {1.0, 0.0}), RecognizerError);
  CHECK_THROWS_AS(build_grammar({f.word("aaj"), f.word("ki")}, {1.0}), RecognizerError);
}

TEST_CASE("single word without loop matches Viterbi") {
  const auto& f = fx();
  WordModel w = f.word("mandi");
  auto net = build_grammar({w}, {}, false);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    FeatureSequence obs = sample_word(w, seed);
    Hypothesis h = decode(net, obs);
    ViterbiResult v = viterbi(w.model, obs);
    REQUIRE(v.found());
    CHECK(h.words == std::vector<std::string>{"mandi"});
    CHECK(h.total_log_prob == doctest::Approx(v.log_prob).epsilon(1e-12));
    CHECK(std::abs(h.total_log_prob - v.log_prob) < 1e-9);
    CHECK(h.per_word[0].confidence == 1.0);
  }
}

TEST_CASE("decoder matches exhaustive search on small networks") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 40; ++rep) {
    std::vector<WordModel> words;
    for (int w = 0; w < 2; ++w) words.push_back(wrap("w" + std::to_string(w), oracle::random_model(rng, 2, 2, true)));
    auto net = build_grammar(std::move(words), {1.0 + rng() % 3, 1.0}, rep % 2 == 0);
    FeatureSequence obs = oracle::random_obs(rng, 1 + rng() % 5, 2);
    double expected = brute_force_best(net, obs);
    Hypothesis h = decode(net, obs);
    if (expected == kLogZero) {
      CHECK(h.empty());
    } else {
      CHECK(std::abs(h.total_log_prob - expected) < 1e-9);
      if (!net.loop) CHECK(h.words.size() == 1);
    }
  }
}

TEST_CASE("decoding samples of a word") {
  const auto& f = fx();
  auto net = build_grammar({f.word("aalu"), f.word("bhav")});
  int correct = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Hypothesis h = decode(net, sample_word(net.words[0], seed));
    if (h.words == std::vector<std::string>{"aalu"}) {
      ++correct;
      CHECK(h.per_word[0].confidence >= 0.5);
    }
  }
  CHECK(correct == 20);
}

TEST_CASE("segments partition the frames") {
  const auto& f = fx();
  auto net = build_grammar({f.word("aaj"), f.word("dili"), f.word("ki"), f.word("mandi")});
  for (uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<const WordModel*> utt{&net.words[seed % 4], &net.words[(seed + 1) % 4], &net.words[(seed + 3) % 4]};
    FeatureSequence obs = sample_utterance(utt, seed);
    Hypothesis h = decode(net, obs);
    REQUIRE_FALSE(h.empty());
    size_t at = 0;
    for (const auto& s : h.per_word) {
      CHECK(s.start_frame == at);
      CHECK(s.end_frame > s.start_frame);
      CHECK(s.confidence >= 0.0);
      CHECK(s.confidence <= 1.0);
      at = s.end_frame;
    }
    CHECK(at == obs.num_frames());
    CHECK(h.words.size() == h.per_word.size());
  }
}

TEST_CASE("too few frames for any word gives an empty hypothesis") {
  const auto& f = fx();
  auto net = build_grammar({f.word("bhav"), f.word("mandi")});
  FeatureSequence obs(13);
  std::vector<double> x(13, 0.0);
  for (int t = 0; t < 3; ++t) obs.push_back(x);
  Hypothesis h = decode(net, obs);
  CHECK(h.empty());
  CHECK(h.total_log_prob == kLogZero);
  CHECK(decode(net, FeatureSequence(13)).empty());
  CHECK_THROWS_AS(decode(net, FeatureSequence(5)), RecognizerError);
}

TEST_CASE("hypothesis dump round trip") {
  Hypothesis h;
  h.words = {"aalu", "ka"};
  h.per_word = {{"aalu", 0, 17, 0.8123456789012345}, {"ka", 17, 30, 1.0}};
  h.total_log_prob = -1234.5678901234567;
  Hypothesis back = parse_hypothesis(dump_hypothesis(h));
  CHECK(back.words == h.words);
  CHECK(back.total_log_prob == h.total_log_prob);
  CHECK(back.per_word[0].confidence == h.per_word[0].confidence);
  CHECK(back.per_word[1].start_frame == 17);

  Hypothesis none;
  CHECK(parse_hypothesis(dump_hypothesis(none)).empty());
  CHECK(parse_hypothesis(dump_hypothesis(none)).total_log_prob == kLogZero);
  CHECK_THROWS_AS(parse_hypothesis("aalu 0 x 1\n#total 0\n"), RecognizerError);
}

TEST_CASE("error injection") {
  const std::vector<std::string> query{"aaj", "dili", "ki", "mandi", "mein", "aalu", "ka", "bhav", "kya", "hai"};

  ConfusionModel forced{{{"dili", "bili", 1.0}}, {}, 0.0};
  auto out = inject_errors(query, forced, 7);
  REQUIRE(out.size() == query.size());
  CHECK(out[1] == "bili");
  for (size_t i = 0; i < out.size(); ++i)
    if (i != 1) CHECK(out[i] == query[i]);

  ConfusionModel zero = query_confusions(0.0, 0.0);
  for (uint64_t seed = 0; seed < 50; ++seed) CHECK(inject_errors(query, zero, seed) == query);

  ConfusionModel drop{{}, {{"aalu", 1.0}}, 0.0};
  auto dropped = inject_errors(query, drop, 1);
  CHECK(dropped.size() == query.size() - 1);
  CHECK(std::find(dropped.begin(), dropped.end(), "aalu") == dropped.end());

  ConfusionModel cm = query_confusions(0.3, 0.1);
  const std::vector<std::string> lexicon_words{"bili", "dandi", "balu", "dili", "mandi", "aalu"};
  for (uint64_t seed = 0; seed < 200; ++seed) {
    auto a = inject_errors(query, cm, seed);
    CHECK(a == inject_errors(query, cm, seed));
    CHECK(a.size() <= query.size());
    for (const auto& w : a) {
      bool ok = std::find(query.begin(), query.end(), w) != query.end() ||
                std::find(lexicon_words.begin(), lexicon_words.end(), w) != lexicon_words.end();
      CHECK(ok);
    }
  }

  CHECK(query_confusions().max_incoming("bili") == doctest::Approx(0.1));
  CHECK(query_confusions().max_incoming("aaj") == 0.0);
  ConfusionModel bad{{{"dili", "bili", 0.7}, {"dili", "pili", 0.6}}, {}, 0.0};
  CHECK_THROWS_AS(bad.validate(), RecognizerError);
  CHECK_THROWS_AS(inject_errors(query, bad, 0), RecognizerError);
}

TEST_CASE("acoustic model directory round trip") {
  const auto& f = fx();
  auto dir = std::filesystem::temp_directory_path() / "vaani_am_test";
  std::filesystem::remove_all(dir);
  f.am.save(dir);
  AcousticModel back = AcousticModel::load(dir);
  CHECK(back.dims == f.am.dims);
  REQUIRE(back.phones.size() == f.am.phones.size());
  FeatureSequence obs = sample_word(f.word("bhav"), 5);
  WordModel a = f.word("bhav");
  WordModel b = compose_word_model("bhav", f.res.pron, f.res.phones, back);
  CHECK(std::abs(viterbi(a.model, obs).log_prob - viterbi(b.model, obs).log_prob) < 1e-9);
  std::filesystem::remove_all(dir);
}
