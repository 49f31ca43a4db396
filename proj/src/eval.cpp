#include "vaani/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "vaani/recognizer.hpp"
#include "vaani/synthetic.hpp"

namespace vaani {

double accuracy(long long S, long long E_s, long long E_d) {
  if (S < 1) throw EvalError("S must be at least 1");
  if (E_s < 0 || E_d < 0) throw EvalError("error counts must be non-negative");
  if (E_s + E_d > S) throw EvalError("E_s + E_d exceeds S");
  double pct = static_cast<double>(S - E_s - E_d) / static_cast<double>(S) * 100.0;
  return std::round(pct * 10.0) / 10.0;
}

namespace {

bool strict_subsequence(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.size() >= ref.size()) return false;
  size_t j = 0;
  for (size_t i = 0; i < ref.size() && j < hyp.size(); ++i)
    if (ref[i] == hyp[j]) ++j;
  return j == hyp.size();
}

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SentenceScore score_sentences(const std::vector<std::vector<std::string>>& refs,
                              const std::vector<std::vector<std::string>>& hyps) {
  if (refs.size() != hyps.size())
    throw EvalError("references/hypotheses length mismatch: " + std::to_string(refs.size()) + " vs " +
                    std::to_string(hyps.size()));
  SentenceScore s;
  s.S = static_cast<long long>(refs.size());
  for (size_t i = 0; i < refs.size(); ++i) {
    if (refs[i] == hyps[i]) continue;
    if (strict_subsequence(hyps[i], refs[i]))
      ++s.E_d;
    else
      ++s.E_s;
  }
  return s;
}

std::string EvalReport::to_tsv() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << "label\tS\tE_s\tE_d\taccuracy\n";
  long long S = 0, Es = 0, Ed = 0;
  for (const auto& g : groups) {
    os << g.label << '\t' << g.S << '\t' << g.E_s << '\t' << g.E_d << '\t' << g.accuracy_percent << '\n';
    S += g.S;
    Es += g.E_s;
    Ed += g.E_d;
  }
  os << "Total\t" << S << '\t' << Es << '\t' << Ed << '\t' << overall_accuracy_percent << '\n';
  return os.str();
}

EvalReport run_experiment(const std::vector<EvalGroup>& groups, const SystemUnderTest& system, uint64_t seed) {
  if (groups.empty()) throw EvalError("no groups");
  EvalReport report;
  long long S = 0, Es = 0, Ed = 0;
  for (const auto& g : groups) {
    if (g.items.empty()) throw EvalError("empty group: " + g.label);
    std::vector<std::vector<std::string>> refs, hyps;
    for (const auto& item : g.items) {
      refs.push_back(item.reference);
      hyps.push_back(system(item, mix(seed, item.input_seed)));
    }
    SentenceScore sc = score_sentences(refs, hyps);
    report.groups.push_back({g.label, sc.S, sc.E_s, sc.E_d, accuracy(sc.S, sc.E_s, sc.E_d)});
    S += sc.S;
    Es += sc.E_s;
    Ed += sc.E_d;
  }
  report.overall_accuracy_percent = accuracy(S, Es, Ed);
  return report;
}

SelfRecognitionResult run_self_recognition(const ResourceBundle& res, const SelfRecognitionConfig& cfg) {
  if (cfg.vocabulary.empty()) throw EvalError("empty vocabulary");
  if (cfg.min_words < 1 || cfg.max_words < cfg.min_words) throw EvalError("bad utterance length range");

  AcousticModel generators = make_generator_models(res.phones, cfg.dims, cfg.seed, cfg.mean_spread);

  std::vector<std::string> units;
  std::set<std::string> seen;
  for (const auto& w : cfg.vocabulary)
    for (auto& u : pronounce(w, res.pron, res.phones))
      if (seen.insert(u).second) units.push_back(u);

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  AcousticModel trained =
      train_phone_models(sample_phone_data(generators, units, cfg.samples_per_phone, mix(cfg.seed, 1)), cfg.dims, tc);

  std::vector<WordModel> gen_words, words;
  for (const auto& w : cfg.vocabulary) {
    gen_words.push_back(compose_word_model(w, res.pron, res.phones, generators));
    words.push_back(compose_word_model(w, res.pron, res.phones, trained));
  }
  const GrammarNetwork net = build_grammar(std::move(words));

  std::mt19937_64 rng(mix(cfg.seed, 2));
  std::uniform_int_distribution<size_t> pick_len(cfg.min_words, cfg.max_words);
  std::uniform_int_distribution<size_t> pick_word(0, cfg.vocabulary.size() - 1);
  EvalGroup group{"self", {}};
  for (size_t u = 0; u < cfg.num_utterances; ++u) {
    EvalItem item;
    const size_t len = pick_len(rng);
    for (size_t k = 0; k < len; ++k) item.reference.push_back(cfg.vocabulary[pick_word(rng)]);
    item.input_seed = rng();
    group.items.push_back(std::move(item));
  }

  SelfRecognitionResult out;
  out.vocabulary = cfg.vocabulary;
  auto system = [&](const EvalItem& item, uint64_t seed) {
    std::vector<const WordModel*> seq;
    for (const auto& w : item.reference) seq.push_back(&gen_words[net.index_of(w)]);
    Hypothesis h = decode(net, sample_utterance(seq, seed));
    out.references.push_back(item.reference);
    out.hypotheses.push_back(h.words);
    return h.words;
  };
  out.report = run_experiment({group}, system, cfg.seed);
  return out;
}

}  // namespace vaani
