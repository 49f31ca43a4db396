#include "vaani/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace vaani {

const Hmm* AcousticModel::find(std::string_view unit) const {
  auto it = phones.find(unit);
  return it == phones.end() ? nullptr : &it->second;
}

void AcousticModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [unit, hmm] : phones) save_hmm(hmm, dir / (unit + ".hmm"));
}

AcousticModel AcousticModel::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw RecognizerError("model directory not found: " + dir.string());
  AcousticModel am;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".hmm") continue;
    Hmm h = load_hmm(entry.path());
    if (am.dims == 0) am.dims = h.dims();
    if (h.dims() != am.dims) throw RecognizerError("dimension mismatch in " + entry.path().string());
    am.phones.emplace(entry.path().stem().string(), std::move(h));
  }
  if (am.phones.empty()) throw RecognizerError("no .hmm files in " + dir.string());
  return am;
}

WordModel compose_word_model(std::string_view word, const PronLexicon& pron, const PhoneSet& phones,
                             const AcousticModel& am) {
  WordModel wm;
  wm.word = std::string(word);
  wm.units = pronounce(word, pron, phones);
  if (wm.units.empty()) throw RecognizerError("empty pronunciation: " + wm.word);

  std::vector<const Hmm*> parts;
  size_t total = 0;
  for (const auto& u : wm.units) {
    const Hmm* h = am.find(u);
    if (!h) throw RecognizerError("no model for phone " + u);
    if (h->dims() != am.dims) throw RecognizerError("dimension mismatch for phone " + u);
    if (h->open_end()) throw RecognizerError("phone model without exit arcs: " + u);
    wm.unit_offsets.push_back(total);
    parts.push_back(h);
    total += h->num_states();
  }

  Hmm m(total, am.dims);
  for (size_t k = 0; k < parts.size(); ++k) {
    const Hmm& h = *parts[k];
    const size_t off = wm.unit_offsets[k];
    const size_t n = h.num_states();
    for (size_t i = 0; i < n; ++i) {
      std::copy(h.mean(i).begin(), h.mean(i).end(), m.mean(off + i).begin());
      std::copy(h.variance(i).begin(), h.variance(i).end(), m.variance(off + i).begin());
      for (size_t j = 0; j < n; ++j)
        if (h.allowed(i, j)) m.set_transition(off + i, off + j, h.transition(i, j));
    }
    if (k == 0)
      for (size_t i = 0; i < n; ++i) m.set_initial(i, h.initial(i));

    if (k + 1 == parts.size()) {
      for (size_t i = 0; i < n; ++i)
        if (h.exit(i) != kLogZero) m.set_exit(off + i, h.exit(i));
      continue;
    }
    const Hmm& next = *parts[k + 1];
    const size_t next_off = wm.unit_offsets[k + 1];
    for (size_t i = 0; i < n; ++i) {
      if (h.exit(i) == kLogZero) continue;
      for (size_t j = 0; j < next.num_states(); ++j)
        if (next.initial(j) != kLogZero) m.set_transition(off + i, next_off + j, h.exit(i) + next.initial(j));
    }
  }
  m.set_open_end(false);
  wm.model = std::move(m);
  return wm;
}

size_t GrammarNetwork::index_of(std::string_view word) const {
  for (size_t i = 0; i < words.size(); ++i)
    if (words[i].word == word) return i;
  return std::string::npos;
}

GrammarNetwork build_grammar(std::vector<WordModel> words, const std::vector<double>& priors, bool loop) {
  if (words.empty()) throw RecognizerError("grammar needs at least one word");
  if (!priors.empty() && priors.size() != words.size())
    throw RecognizerError("expected " + std::to_string(words.size()) + " priors, got " +
                          std::to_string(priors.size()));
  for (size_t i = 0; i < words.size(); ++i)
    for (size_t j = i + 1; j < words.size(); ++j)
      if (words[i].word == words[j].word) throw RecognizerError("duplicate word in grammar: " + words[i].word);
  const size_t dims = words.front().model.dims();
  for (const auto& w : words)
    if (w.model.dims() != dims) throw RecognizerError("dimension mismatch for word " + w.word);

  GrammarNetwork net;
  net.loop = loop;
  net.log_priors.resize(words.size());
  if (priors.empty()) {
    std::fill(net.log_priors.begin(), net.log_priors.end(), -std::log(static_cast<double>(words.size())));
  } else {
    double sum = 0.0;
    for (double p : priors) {
      if (!(p > 0.0) || !std::isfinite(p)) throw RecognizerError("prior must be positive");
      sum += p;
    }
    for (size_t i = 0; i < priors.size(); ++i) net.log_priors[i] = std::log(priors[i] / sum);
  }
  net.words = std::move(words);
  return net;
}

double Hypothesis::min_confidence() const {
  if (per_word.empty()) return 0.0;
  double c = 1.0;
  for (const auto& s : per_word) c = std::min(c, s.confidence);
  return c;
}

namespace {

struct FlatWord {
  size_t offset = 0;
  std::vector<std::vector<size_t>> preds;
};

double end_weight(const Hmm& h, size_t i) { return h.open_end() ? 0.0 : h.exit(i); }

double avg_frame_score(const Hmm& model, const FeatureSequence& seg) {
  ViterbiResult v = viterbi(model, seg);
  if (!v.found()) return kLogZero;
  return v.log_prob / static_cast<double>(seg.num_frames());
}

}  // namespace

Hypothesis decode(const GrammarNetwork& net, const FeatureSequence& obs) {
  if (net.words.empty()) throw RecognizerError("empty grammar");
  const size_t dims = net.words.front().model.dims();
  if (obs.dims() != dims)
    throw RecognizerError("feature dims " + std::to_string(obs.dims()) + " != model dims " + std::to_string(dims));
  const size_t T = obs.num_frames();
  Hypothesis hyp;
  if (T == 0) return hyp;

  std::vector<FlatWord> flat(net.words.size());
  std::vector<size_t> word_of;
  size_t G = 0;
  for (size_t w = 0; w < net.words.size(); ++w) {
    flat[w].offset = G;
    flat[w].preds = net.words[w].model.predecessors();
    for (size_t s = 0; s < net.words[w].model.num_states(); ++s) word_of.push_back(w);
    G += net.words[w].model.num_states();
  }

  std::vector<double> prev(G, kLogZero), cur(G, kLogZero);
  std::vector<int32_t> back(T * G, -1);
  std::vector<uint8_t> via_entry(T * G, 0);

  for (size_t w = 0; w < net.words.size(); ++w) {
    const Hmm& h = net.words[w].model;
    for (size_t s = 0; s < h.num_states(); ++s) {
      double init = h.initial(s);
      if (init == kLogZero) continue;
      prev[flat[w].offset + s] = net.log_priors[w] + init + h.emission_log_prob(s, obs.frame(0));
    }
  }

  for (size_t t = 1; t < T; ++t) {
    double best_exit = kLogZero;
    int32_t best_exit_state = -1;
    if (net.loop) {
      for (size_t w = 0; w < net.words.size(); ++w) {
        const Hmm& h = net.words[w].model;
        for (size_t s = 0; s < h.num_states(); ++s) {
          double e = end_weight(h, s);
          if (e == kLogZero || prev[flat[w].offset + s] == kLogZero) continue;
          double cand = prev[flat[w].offset + s] + e;
          if (cand > best_exit) {
            best_exit = cand;
            best_exit_state = static_cast<int32_t>(flat[w].offset + s);
          }
        }
      }
    }
    for (size_t w = 0; w < net.words.size(); ++w) {
      const Hmm& h = net.words[w].model;
      const size_t off = flat[w].offset;
      for (size_t s = 0; s < h.num_states(); ++s) {
        double best = kLogZero;
        int32_t bp = -1;
        uint8_t entry = 0;
        for (size_t p : flat[w].preds[s]) {
          if (prev[off + p] == kLogZero) continue;
          double cand = prev[off + p] + h.transition(p, s);
          if (cand > best) {
            best = cand;
            bp = static_cast<int32_t>(off + p);
          }
        }
        if (best_exit_state >= 0 && h.initial(s) != kLogZero) {
          double cand = best_exit + net.inter_word_log_penalty + net.log_priors[w] + h.initial(s);
          if (cand > best) {
            best = cand;
            bp = best_exit_state;
            entry = 1;
          }
        }
        const size_t g = off + s;
        back[t * G + g] = bp;
        via_entry[t * G + g] = entry;
        cur[g] = best == kLogZero ? kLogZero : best + h.emission_log_prob(s, obs.frame(t));
      }
    }
    std::swap(prev, cur);
  }

  double best_final = kLogZero;
  int32_t state = -1;
  for (size_t w = 0; w < net.words.size(); ++w) {
    const Hmm& h = net.words[w].model;
    for (size_t s = 0; s < h.num_states(); ++s) {
      const size_t g = flat[w].offset + s;
      double e = end_weight(h, s);
      if (e == kLogZero || prev[g] == kLogZero) continue;
      double cand = prev[g] + e + net.end_log_penalty;
      if (cand > best_final) {
        best_final = cand;
        state = static_cast<int32_t>(g);
      }
    }
  }
  if (state < 0) return hyp;

  std::vector<size_t> path(T);
  std::vector<size_t> starts{0};
  for (size_t t = T; t-- > 0;) {
    path[t] = static_cast<size_t>(state);
    if (t > 0) {
      if (via_entry[t * G + path[t]]) starts.push_back(t);
      state = back[t * G + path[t]];
    }
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

  hyp.total_log_prob = best_final;
  for (size_t k = 0; k < starts.size(); ++k) {
    WordSegment seg;
    seg.start_frame = starts[k];
    seg.end_frame = k + 1 < starts.size() ? starts[k + 1] : T;
    const size_t w = word_of[path[seg.start_frame]];
    seg.word = net.words[w].word;

    FeatureSequence slice = obs.slice(seg.start_frame, seg.end_frame);
    double own = avg_frame_score(net.words[w].model, slice);
    double rival = kLogZero;
    for (size_t v = 0; v < net.words.size(); ++v)
      if (v != w) rival = std::max(rival, avg_frame_score(net.words[v].model, slice));
    seg.confidence = rival == kLogZero ? 1.0 : std::clamp(std::exp(own - rival), 0.0, 1.0);

    hyp.words.push_back(seg.word);
    hyp.per_word.push_back(std::move(seg));
  }
  return hyp;
}

std::string dump_hypothesis(const Hypothesis& hyp) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& s : hyp.per_word)
    os << s.word << ' ' << s.start_frame << ' ' << s.end_frame << ' ' << s.confidence << '\n';
  os << "#total " << hyp.total_log_prob << '\n';
  return os.str();
}

Hypothesis parse_hypothesis(std::string_view text) {
  Hypothesis hyp;
  std::istringstream in{std::string(text)};
  std::string line;
  bool total = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line.rfind("#total", 0) == 0) {
      std::string tag, value;
      ls >> tag >> value;
      hyp.total_log_prob = value == "-inf" ? kLogZero : std::stod(value);
      total = true;
      continue;
    }
    WordSegment seg;
    if (!(ls >> seg.word >> seg.start_frame >> seg.end_frame >> seg.confidence))
      throw RecognizerError("bad hypothesis line: " + line);
    hyp.words.push_back(seg.word);
    hyp.per_word.push_back(std::move(seg));
  }
  if (!total) throw RecognizerError("hypothesis dump without #total line");
  return hyp;
}

double ConfusionModel::deletion_prob(std::string_view word) const {
  auto it = deletion.find(word);
  return it == deletion.end() ? default_deletion : it->second;
}

double ConfusionModel::max_incoming(std::string_view word) const {
  double p = 0.0;
  for (const auto& s : substitutions)
    if (s.to == word && s.from != word) p = std::max(p, s.prob);
  return p;
}

void ConfusionModel::validate() const {
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(default_deletion)) throw RecognizerError("default deletion probability outside [0,1]");
  std::map<std::string, double, std::less<>> totals;
  for (const auto& [w, p] : deletion) {
    if (!in_unit(p)) throw RecognizerError("deletion probability outside [0,1] for " + w);
    totals[w] = p;
  }
  for (const auto& s : substitutions) {
    if (!in_unit(s.prob)) throw RecognizerError("substitution probability outside [0,1]: " + s.from + "->" + s.to);
    auto it = totals.find(s.from);
    double base = it == totals.end() ? default_deletion : it->second;
    totals[s.from] = base + s.prob;
  }
  for (const auto& [w, p] : totals)
    if (p > 1.0 + 1e-12) throw RecognizerError("edit probabilities for " + w + " sum above 1");
}

ConfusionModel query_confusions(double substitution_prob, double deletion_prob) {
  ConfusionModel cm;
  const std::pair<const char*, const char*> pairs[] = {{"dili", "bili"}, {"mandi", "dandi"}, {"aalu", "balu"}};
  for (const auto& [a, b] : pairs) {
    cm.substitutions.push_back({a, b, substitution_prob});
    cm.substitutions.push_back({b, a, substitution_prob});
  }
  cm.deletion["aalu"] = deletion_prob;
  return cm;
}

std::vector<std::string> inject_errors(const std::vector<std::string>& tokens, const ConfusionModel& cm,
                                       uint64_t seed) {
  cm.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const double u = unit(rng);
    double acc = cm.deletion_prob(tok);
    if (u < acc) continue;
    const std::string* replacement = nullptr;
    for (const auto& s : cm.substitutions) {
      if (s.from != tok) continue;
      acc += s.prob;
      if (u < acc) {
        replacement = &s.to;
        break;
      }
    }
    out.push_back(replacement ? *replacement : tok);
  }
  return out;
}

}  // namespace vaani
