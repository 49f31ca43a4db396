#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vaani/hmm.hpp"
#include "vaani/lexicon.hpp"

namespace vaani {

class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// (S - E_s - E_d) / S * 100, rounded to one decimal, half away from zero.
double accuracy(long long S, long long E_s, long long E_d);

struct SentenceScore {
  long long S = 0;
  long long E_s = 0;
  long long E_d = 0;
};

// Exact match is correct; a hypothesis that is a strict subsequence of its
// reference is a deletion error; anything else is a substitution error.
SentenceScore score_sentences(const std::vector<std::vector<std::string>>& references,
                              const std::vector<std::vector<std::string>>& hypotheses);

struct GroupResult {
  std::string label;
  long long S = 0;
  long long E_s = 0;
  long long E_d = 0;
  double accuracy_percent = 0.0;
};

struct EvalReport {
  std::vector<GroupResult> groups;
  double overall_accuracy_percent = 0.0;

  // label, S, E_s, E_d, accuracy with a header and a Total row.
  std::string to_tsv() const;
};

struct EvalItem {
  std::vector<std::string> reference;
  uint64_t input_seed = 0;  // what the system under test turns into its input
};

struct EvalGroup {
  std::string label;
  std::vector<EvalItem> items;
};

// Maps a test item to a recognized token list; `seed` is derived from the
// experiment seed and the item's input seed, so equal items see equal seeds.
using SystemUnderTest = std::function<std::vector<std::string>(const EvalItem& item, uint64_t seed)>;

EvalReport run_experiment(const std::vector<EvalGroup>& groups, const SystemUnderTest& system, uint64_t seed);

struct SelfRecognitionConfig {
  uint64_t seed = 42;
  std::vector<std::string> vocabulary{"aaj", "dili", "ki", "mandi", "mein", "aalu", "ka", "bhav", "kya", "hai"};
  size_t num_utterances = 100;
  size_t min_words = 1;
  size_t max_words = 3;
  size_t samples_per_phone = 40;
  size_t dims = 13;
  double mean_spread = 3.0;
  TrainConfig train{};
};

struct SelfRecognitionResult {
  EvalReport report;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<std::string>> references;
  std::vector<std::vector<std::string>> hypotheses;
};

// Trains phone HMMs on samples from seeded generator models, then decodes
// utterances sampled from the generators through a word-loop grammar.
SelfRecognitionResult run_self_recognition(const ResourceBundle& resources, const SelfRecognitionConfig& cfg = {});

}  // namespace vaani
