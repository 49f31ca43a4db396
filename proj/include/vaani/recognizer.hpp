#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vaani/audio.hpp"
#include "vaani/hmm.hpp"
#include "vaani/lexicon.hpp"

namespace vaani {

class RecognizerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One trained HMM per phone unit, all with the same feature dimension.
struct AcousticModel {
  size_t dims = 0;
  std::map<std::string, Hmm, std::less<>> phones;

  const Hmm* find(std::string_view unit) const;
  void save(const std::filesystem::path& dir) const;  // one <unit>.hmm per phone
  static AcousticModel load(const std::filesystem::path& dir);
};

struct WordModel {
  std::string word;
  std::vector<std::string> units;  // after closure/release expansion
  Hmm model;
  // First state of each unit inside `model`.
  std::vector<size_t> unit_offsets;
};

// Concatenates the phone HMMs of `word`; the exit mass of each unit's states
// is moved onto the next unit's entry distribution. Throws OovError for an
// unknown word and RecognizerError for a unit without a model.
WordModel compose_word_model(std::string_view word, const PronLexicon& pron, const PhoneSet& phones,
                             const AcousticModel& am);

inline constexpr double kDefaultInterWordLogPenalty = -2.302585092994046;  // log(0.1)

struct GrammarNetwork {
  std::vector<WordModel> words;
  std::vector<double> log_priors;
  bool loop = true;
  double inter_word_log_penalty = kDefaultInterWordLogPenalty;
  double end_log_penalty = 0.0;

  size_t index_of(std::string_view word) const;  // npos when absent
};

// Uniform priors when `priors` is empty; otherwise normalized weights, one per
// word. Throws RecognizerError on an empty list, duplicate words or a
// non-positive weight.
GrammarNetwork build_grammar(std::vector<WordModel> words, const std::vector<double>& priors = {},
                             bool loop = true);

struct WordSegment {
  std::string word;
  size_t start_frame = 0;
  size_t end_frame = 0;  // exclusive
  double confidence = 0.0;
};

struct Hypothesis {
  std::vector<std::string> words;
  double total_log_prob = kLogZero;
  std::vector<WordSegment> per_word;

  bool empty() const { return words.empty(); }
  double min_confidence() const;
};

// Token-passing Viterbi over the word network. A sequence with no legal path
// gives an empty hypothesis.
Hypothesis decode(const GrammarNetwork& net, const FeatureSequence& obs);

// "word start end confidence" per segment, then "#total <logprob>".
std::string dump_hypothesis(const Hypothesis& hyp);
Hypothesis parse_hypothesis(std::string_view text);  // throws RecognizerError

struct Substitution {
  std::string from;
  std::string to;
  double prob = 0.0;
};

struct ConfusionModel {
  std::vector<Substitution> substitutions;
  std::map<std::string, double, std::less<>> deletion;
  double default_deletion = 0.0;

  double deletion_prob(std::string_view word) const;
  // Largest probability with which some other word turns into `word`.
  double max_incoming(std::string_view word) const;
  // Throws RecognizerError on a probability outside [0, 1] or a per-token
  // total above 1.
  void validate() const;
};

// Pairs observed among the query recognition variants, both directions.
ConfusionModel query_confusions(double substitution_prob = 0.1, double deletion_prob = 0.02);

// At most one edit per token; identical output for a fixed seed.
std::vector<std::string> inject_errors(const std::vector<std::string>& tokens, const ConfusionModel& cm,
                                       uint64_t seed);

}  // namespace vaani
