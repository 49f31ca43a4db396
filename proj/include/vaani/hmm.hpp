#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vaani/audio.hpp"

namespace vaani {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

class HmmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double log_sum_exp(double a, double b);
double log_sum_exp(std::span<const double> xs);

// Continuous-density HMM with one diagonal Gaussian per state. All
// probabilities are natural logs.
//
// Two end conventions:
//  - open end: a sequence may stop in any state; each transition row sums to 1.
//  - exit arcs: a sequence must leave through exit_log[i]; for each row,
//    sum_j exp(transition(i, j)) + exp(exit_log[i]) = 1. Phone and word models
//    use this so that word composition can hand exit mass to the next unit.
class Hmm {
 public:
  Hmm() = default;
  Hmm(size_t num_states, size_t dims);

  size_t num_states() const { return num_states_; }
  size_t dims() const { return dims_; }

  double initial(size_t i) const { return initial_[i]; }
  double transition(size_t i, size_t j) const { return transition_[i * num_states_ + j]; }
  double exit(size_t i) const { return exit_[i]; }
  bool allowed(size_t i, size_t j) const { return topology_[i * num_states_ + j] != 0; }
  bool open_end() const { return open_end_; }

  std::span<const double> mean(size_t i) const { return {means_.data() + i * dims_, dims_}; }
  std::span<const double> variance(size_t i) const { return {vars_.data() + i * dims_, dims_}; }
  std::span<double> mean(size_t i) { return {means_.data() + i * dims_, dims_}; }
  std::span<double> variance(size_t i) { return {vars_.data() + i * dims_, dims_}; }

  void set_initial(size_t i, double logp) { initial_[i] = logp; }
  // Setting a finite log-probability marks the arc as allowed.
  void set_transition(size_t i, size_t j, double logp);
  void disallow(size_t i, size_t j);
  void set_exit(size_t i, double logp);
  void set_open_end(bool open) { open_end_ = open; }

  // Diagonal Gaussian log density of state i.
  double emission_log_prob(size_t i, std::span<const double> x) const;

  // Throws HmmError naming the first broken invariant.
  void validate(double variance_floor = 0.0, double tol = 1e-9) const;

  // Predecessor lists over allowed arcs, for sparse recursions.
  std::vector<std::vector<size_t>> predecessors() const;

 private:
  size_t num_states_ = 0;
  size_t dims_ = 0;
  std::vector<double> initial_;
  std::vector<double> transition_;
  std::vector<uint8_t> topology_;
  std::vector<double> exit_;
  bool open_end_ = true;
  std::vector<double> means_;
  std::vector<double> vars_;
};

// Strict left-to-right topology with self-loops and a final exit arc:
// state i -> i (self_loop), i -> i+1 (1 - self_loop); last state exits with
// 1 - self_loop. Means 0, variances 1.
Hmm make_left_to_right(size_t num_states, size_t dims, double self_loop = 0.6);

// Left-to-right chain without self-loops; the last state exits with prob 1.
Hmm make_chain(size_t num_states, size_t dims);

struct TrainConfig {
  int max_iters = 20;
  double loglik_rel_tol = 1e-5;  // 0 runs all max_iters
  double variance_floor = 1e-3;
  uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  Hmm model;
  // Entry 0 is the starting model; entry k the model after k re-estimations.
  std::vector<double> loglik;
  int iterations = 0;
  bool converged = false;
  // States whose emission or transition statistics were empty in some
  // iteration; their previous parameters were kept.
  std::vector<size_t> zero_occupancy_states;
  // Sequences that have no legal path through the topology (skipped).
  std::vector<size_t> skipped_sequences;
};

double forward_loglik(const Hmm& model, const FeatureSequence& obs);

struct ViterbiResult {
  std::vector<size_t> state_path;
  double log_prob = kLogZero;
  bool found() const { return !state_path.empty(); }
};

// Best state path; ties resolve to the lowest state index. An impossible
// observation sequence gives an empty path with log_prob = -inf.
ViterbiResult viterbi(const Hmm& model, const FeatureSequence& obs);

TrainResult baum_welch(const Hmm& model, std::span<const FeatureSequence> data,
                       const TrainConfig& cfg = {});

// Flat start: keeps the topology of `topology`, sets every state's Gaussian
// to the global data mean/variance (floored) and spreads each row uniformly
// over its allowed arcs.
Hmm flat_start(const Hmm& topology, std::span<const FeatureSequence> data, double variance_floor);

// Initialization from per-frame state labels (one label vector per sequence).
Hmm labeled_init(const Hmm& topology, std::span<const FeatureSequence> data,
                 std::span<const std::vector<size_t>> labels, double variance_floor);

struct SampledSequence {
  FeatureSequence obs;
  std::vector<size_t> states;
};

// Draws a state path of exactly `length` frames that ends legally, then one
// observation per frame. Deterministic for a fixed seed.
SampledSequence sample(const Hmm& model, size_t length, uint64_t seed);

std::string write_hmm(const Hmm& model);
Hmm read_hmm(std::string_view text);
void save_hmm(const Hmm& model, const std::filesystem::path& path);
Hmm load_hmm(const std::filesystem::path& path);

}  // namespace vaani
