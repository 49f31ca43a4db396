#include "vaani/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "vaani/text.hpp"

namespace vaani {

double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> xs) {
  double mx = kLogZero;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kLogZero) return kLogZero;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

Hmm::Hmm(size_t num_states, size_t dims)
    : num_states_(num_states),
      dims_(dims),
      initial_(num_states, kLogZero),
      transition_(num_states * num_states, kLogZero),
      topology_(num_states * num_states, 0),
      exit_(num_states, kLogZero),
      means_(num_states * dims, 0.0),
      vars_(num_states * dims, 1.0) {
  if (num_states == 0) throw HmmError("HMM needs at least one state");
  if (dims == 0) throw HmmError("HMM needs at least one dimension");
}

void Hmm::set_transition(size_t i, size_t j, double logp) {
  transition_[i * num_states_ + j] = logp;
  if (logp != kLogZero) topology_[i * num_states_ + j] = 1;
}

void Hmm::disallow(size_t i, size_t j) {
  transition_[i * num_states_ + j] = kLogZero;
  topology_[i * num_states_ + j] = 0;
}

void Hmm::set_exit(size_t i, double logp) {
  exit_[i] = logp;
  if (logp != kLogZero) open_end_ = false;
}

double Hmm::emission_log_prob(size_t i, std::span<const double> x) const {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const double* mu = means_.data() + i * dims_;
  const double* var = vars_.data() + i * dims_;
  double acc = 0.0;
  for (size_t d = 0; d < dims_; ++d) {
    double diff = x[d] - mu[d];
    acc += kLog2Pi + std::log(var[d]) + diff * diff / var[d];
  }
  return -0.5 * acc;
}

void Hmm::validate(double variance_floor, double tol) const {
  auto fail = [](const std::string& what) { throw HmmError("invalid HMM: " + what); };
  double init_mass = 0.0;
  for (double v : initial_) {
    if (std::isnan(v) || v > 1e-12) fail("initial log-probability out of range");
    init_mass += std::exp(v);
  }
  if (std::abs(init_mass - 1.0) > tol) fail("initial probabilities sum to " + std::to_string(init_mass));
  for (size_t i = 0; i < num_states_; ++i) {
    double row = 0.0;
    for (size_t j = 0; j < num_states_; ++j) {
      double v = transition(i, j);
      if (!allowed(i, j) && v != kLogZero)
        fail("disallowed arc " + std::to_string(i) + "->" + std::to_string(j) + " has mass");
      if (std::isnan(v) || v > 1e-12) fail("transition log-probability out of range");
      row += std::exp(v);
    }
    if (!open_end_) row += std::exp(exit_[i]);
    if (std::abs(row - 1.0) > tol)
      fail("row " + std::to_string(i) + " sums to " + std::to_string(row));
    for (size_t d = 0; d < dims_; ++d) {
      double var = vars_[i * dims_ + d];
      if (!std::isfinite(var) || var <= 0.0 || var < variance_floor)
        fail("state " + std::to_string(i) + " variance " + std::to_string(var) + " below floor");
      if (!std::isfinite(means_[i * dims_ + d])) fail("non-finite mean");
    }
  }
}

std::vector<std::vector<size_t>> Hmm::predecessors() const {
  std::vector<std::vector<size_t>> preds(num_states_);
  for (size_t i = 0; i < num_states_; ++i)
    for (size_t j = 0; j < num_states_; ++j)
      if (allowed(i, j) && transition(i, j) != kLogZero) preds[j].push_back(i);
  return preds;
}

Hmm make_left_to_right(size_t num_states, size_t dims, double self_loop) {
  Hmm m(num_states, dims);
  m.set_initial(0, 0.0);
  const double stay = std::log(self_loop), move = std::log(1.0 - self_loop);
  for (size_t i = 0; i < num_states; ++i) {
    m.set_transition(i, i, stay);
    if (i + 1 < num_states) m.set_transition(i, i + 1, move);
    else m.set_exit(i, move);
  }
  return m;
}

Hmm make_chain(size_t num_states, size_t dims) {
  Hmm m(num_states, dims);
  m.set_initial(0, 0.0);
  for (size_t i = 0; i + 1 < num_states; ++i) m.set_transition(i, i + 1, 0.0);
  m.set_exit(num_states - 1, 0.0);
  return m;
}

void TrainConfig::validate() const {
  if (max_iters < 1) throw HmmError("max_iters must be >= 1");
  if (!(variance_floor > 0.0)) throw HmmError("variance_floor must be positive");
  if (!(loglik_rel_tol >= 0.0)) throw HmmError("loglik_rel_tol must be non-negative");
}

namespace {

void check_dims(const Hmm& model, const FeatureSequence& obs) {
  if (obs.dims() != model.dims())
    throw HmmError("dimension mismatch: model has " + std::to_string(model.dims()) +
                   " dims, observations have " + std::to_string(obs.dims()));
  if (obs.num_frames() == 0) throw HmmError("empty observation sequence");
}

std::vector<double> emission_table(const Hmm& model, const FeatureSequence& obs) {
  const size_t n = model.num_states(), t_max = obs.num_frames();
  std::vector<double> b(t_max * n);
  for (size_t t = 0; t < t_max; ++t)
    for (size_t i = 0; i < n; ++i) b[t * n + i] = model.emission_log_prob(i, obs.frame(t));
  return b;
}

double end_weight(const Hmm& model, size_t i) { return model.open_end() ? 0.0 : model.exit(i); }

// alpha[t * N + i]
std::vector<double> forward_table(const Hmm& model, const std::vector<double>& b, size_t t_max,
                                  const std::vector<std::vector<size_t>>& preds) {
  const size_t n = model.num_states();
  std::vector<double> alpha(t_max * n, kLogZero);
  for (size_t i = 0; i < n; ++i) alpha[i] = model.initial(i) + b[i];
  std::vector<double> terms;
  for (size_t t = 1; t < t_max; ++t) {
    for (size_t j = 0; j < n; ++j) {
      terms.clear();
      for (size_t i : preds[j]) terms.push_back(alpha[(t - 1) * n + i] + model.transition(i, j));
      double s = log_sum_exp(terms);
      alpha[t * n + j] = s == kLogZero ? kLogZero : s + b[t * n + j];
    }
  }
  return alpha;
}

std::vector<double> backward_table(const Hmm& model, const std::vector<double>& b, size_t t_max) {
  const size_t n = model.num_states();
  std::vector<double> beta(t_max * n, kLogZero);
  for (size_t i = 0; i < n; ++i) beta[(t_max - 1) * n + i] = end_weight(model, i);
  std::vector<double> terms;
  for (size_t t = t_max - 1; t-- > 0;) {
    for (size_t i = 0; i < n; ++i) {
      terms.clear();
      for (size_t j = 0; j < n; ++j) {
        double a = model.transition(i, j);
        if (a == kLogZero) continue;
        terms.push_back(a + b[(t + 1) * n + j] + beta[(t + 1) * n + j]);
      }
      beta[t * n + i] = log_sum_exp(terms);
    }
  }
  return beta;
}

double total_from_alpha(const Hmm& model, const std::vector<double>& alpha, size_t t_max) {
  const size_t n = model.num_states();
  std::vector<double> terms(n);
  for (size_t i = 0; i < n; ++i) terms[i] = alpha[(t_max - 1) * n + i] + end_weight(model, i);
  return log_sum_exp(terms);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t draw_categorical(std::mt19937_64& rng, const std::vector<double>& logw) {
  double total = log_sum_exp(logw);
  double u = uniform01(rng);
  double acc = 0.0;
  size_t last = logw.size();
  for (size_t i = 0; i < logw.size(); ++i) {
    if (logw[i] == kLogZero) continue;
    acc += std::exp(logw[i] - total);
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace

double forward_loglik(const Hmm& model, const FeatureSequence& obs) {
  check_dims(model, obs);
  auto b = emission_table(model, obs);
  auto alpha = forward_table(model, b, obs.num_frames(), model.predecessors());
  return total_from_alpha(model, alpha, obs.num_frames());
}

ViterbiResult viterbi(const Hmm& model, const FeatureSequence& obs) {
  check_dims(model, obs);
  const size_t n = model.num_states(), t_max = obs.num_frames();
  auto b = emission_table(model, obs);
  auto preds = model.predecessors();
  for (auto& p : preds) std::sort(p.begin(), p.end());
  std::vector<double> delta(t_max * n, kLogZero);
  std::vector<size_t> back(t_max * n, 0);
  for (size_t i = 0; i < n; ++i) delta[i] = model.initial(i) + b[i];
  for (size_t t = 1; t < t_max; ++t) {
    for (size_t j = 0; j < n; ++j) {
      double best = kLogZero;
      size_t arg = 0;
      for (size_t i : preds[j]) {
        double v = delta[(t - 1) * n + i] + model.transition(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      if (best != kLogZero) {
        delta[t * n + j] = best + b[t * n + j];
        back[t * n + j] = arg;
      }
    }
  }
  ViterbiResult res;
  size_t arg = 0;
  for (size_t i = 0; i < n; ++i) {
    double v = delta[(t_max - 1) * n + i] + end_weight(model, i);
    if (v > res.log_prob) {
      res.log_prob = v;
      arg = i;
    }
  }
  if (res.log_prob == kLogZero) return res;
  res.state_path.resize(t_max);
  res.state_path[t_max - 1] = arg;
  for (size_t t = t_max - 1; t > 0; --t) res.state_path[t - 1] = back[t * n + res.state_path[t]];
  return res;
}

Hmm flat_start(const Hmm& topology, std::span<const FeatureSequence> data, double variance_floor) {
  if (data.empty()) throw HmmError("flat start needs data");
  const size_t n = topology.num_states(), dims = topology.dims();
  std::vector<double> sum(dims, 0.0), sq(dims, 0.0);
  double count = 0.0;
  for (const auto& seq : data) {
    if (seq.dims() != dims) throw HmmError("dimension mismatch in training data");
    for (size_t t = 0; t < seq.num_frames(); ++t) {
      auto f = seq.frame(t);
      for (size_t d = 0; d < dims; ++d) sum[d] += f[d];
      count += 1.0;
    }
  }
  if (count == 0.0) throw HmmError("flat start needs at least one frame");
  for (auto& s : sum) s /= count;
  for (const auto& seq : data)
    for (size_t t = 0; t < seq.num_frames(); ++t) {
      auto f = seq.frame(t);
      for (size_t d = 0; d < dims; ++d) sq[d] += (f[d] - sum[d]) * (f[d] - sum[d]);
    }

  Hmm m = topology;
  for (size_t i = 0; i < n; ++i) {
    auto mu = m.mean(i);
    auto var = m.variance(i);
    for (size_t d = 0; d < dims; ++d) {
      mu[d] = sum[d];
      var[d] = std::max(sq[d] / count, variance_floor);
    }
  }
  size_t n_init = 0;
  for (size_t i = 0; i < n; ++i) n_init += topology.initial(i) != kLogZero;
  for (size_t i = 0; i < n; ++i)
    m.set_initial(i, topology.initial(i) != kLogZero ? -std::log(static_cast<double>(n_init)) : kLogZero);
  for (size_t i = 0; i < n; ++i) {
    size_t outs = topology.open_end() ? 0 : (topology.exit(i) != kLogZero ? 1 : 0);
    for (size_t j = 0; j < n; ++j) outs += topology.allowed(i, j);
    if (outs == 0) continue;
    double lp = -std::log(static_cast<double>(outs));
    for (size_t j = 0; j < n; ++j)
      if (topology.allowed(i, j)) m.set_transition(i, j, lp);
    if (!topology.open_end() && topology.exit(i) != kLogZero) m.set_exit(i, lp);
  }
  return m;
}

Hmm labeled_init(const Hmm& topology, std::span<const FeatureSequence> data,
                 std::span<const std::vector<size_t>> labels, double variance_floor) {
  if (data.size() != labels.size()) throw HmmError("one label vector per sequence required");
  const size_t n = topology.num_states(), dims = topology.dims();
  std::vector<double> occ(n, 0.0), sum(n * dims, 0.0), sq(n * dims, 0.0);
  std::vector<double> trans(n * n, 0.0), exits(n, 0.0), init(n, 0.0);
  for (size_t s = 0; s < data.size(); ++s) {
    const auto& seq = data[s];
    const auto& lab = labels[s];
    if (lab.size() != seq.num_frames()) throw HmmError("label count differs from frame count");
    if (seq.dims() != dims) throw HmmError("dimension mismatch in training data");
    for (size_t t = 0; t < lab.size(); ++t) {
      size_t i = lab[t];
      if (i >= n) throw HmmError("state label out of range");
      occ[i] += 1.0;
      auto f = seq.frame(t);
      for (size_t d = 0; d < dims; ++d) sum[i * dims + d] += f[d];
      if (t == 0) init[i] += 1.0;
      else trans[lab[t - 1] * n + i] += 1.0;
    }
    if (!lab.empty()) exits[lab.back()] += 1.0;
  }
  Hmm m = flat_start(topology, data, variance_floor);
  for (size_t i = 0; i < n; ++i) {
    if (occ[i] == 0.0) continue;
    auto mu = m.mean(i);
    for (size_t d = 0; d < dims; ++d) mu[d] = sum[i * dims + d] / occ[i];
  }
  for (size_t s = 0; s < data.size(); ++s)
    for (size_t t = 0; t < labels[s].size(); ++t) {
      size_t i = labels[s][t];
      auto f = data[s].frame(t);
      auto mu = m.mean(i);
      for (size_t d = 0; d < dims; ++d) sq[i * dims + d] += (f[d] - mu[d]) * (f[d] - mu[d]);
    }
  for (size_t i = 0; i < n; ++i) {
    if (occ[i] == 0.0) continue;
    auto var = m.variance(i);
    for (size_t d = 0; d < dims; ++d) var[d] = std::max(sq[i * dims + d] / occ[i], variance_floor);
  }
  double init_total = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (topology.initial(i) != kLogZero) init_total += init[i];
  if (init_total > 0.0)
    for (size_t i = 0; i < n; ++i)
      m.set_initial(i, topology.initial(i) != kLogZero && init[i] > 0.0 ? std::log(init[i] / init_total)
                                                                         : kLogZero);
  for (size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j)
      if (topology.allowed(i, j)) denom += trans[i * n + j];
    bool has_exit = !topology.open_end() && topology.exit(i) != kLogZero;
    if (has_exit) denom += exits[i];
    if (denom == 0.0) continue;  // keep the uniform flat-start row
    for (size_t j = 0; j < n; ++j)
      if (topology.allowed(i, j)) m.set_transition(i, j, std::log(trans[i * n + j] / denom));
    if (has_exit) m.set_exit(i, std::log(exits[i] / denom));
  }
  return m;
}

TrainResult baum_welch(const Hmm& start, std::span<const FeatureSequence> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw HmmError("baum_welch needs at least one sequence");
  for (const auto& seq : data) check_dims(start, seq);

  const size_t n = start.num_states(), dims = start.dims();
  TrainResult res;
  res.model = start;
  std::set<size_t> zero_occ;
  std::set<size_t> skipped;
  double prev = kLogZero;

  for (int iter = 0;; ++iter) {
    const Hmm& m = res.model;
    auto preds = m.predecessors();
    std::vector<double> occ(n, 0.0), sum(n * dims, 0.0), init(n, 0.0), exits(n, 0.0);
    std::vector<double> trans(n * n, 0.0);
    std::vector<std::vector<double>> gammas(data.size());
    double total = 0.0;
    size_t used = 0;

    // E-step, sequences in index order so that accumulation is reproducible.
    for (size_t s = 0; s < data.size(); ++s) {
      const auto& seq = data[s];
      const size_t t_max = seq.num_frames();
      auto b = emission_table(m, seq);
      auto alpha = forward_table(m, b, t_max, preds);
      double ll = total_from_alpha(m, alpha, t_max);
      if (ll == kLogZero) {
        skipped.insert(s);
        continue;
      }
      ++used;
      total += ll;
      auto beta = backward_table(m, b, t_max);
      auto& gamma = gammas[s];
      gamma.assign(t_max * n, 0.0);
      for (size_t t = 0; t < t_max; ++t)
        for (size_t i = 0; i < n; ++i) {
          double g = alpha[t * n + i] + beta[t * n + i] - ll;
          gamma[t * n + i] = g == kLogZero ? 0.0 : std::exp(g);
        }
      for (size_t i = 0; i < n; ++i) {
        init[i] += gamma[i];
        if (!m.open_end()) {
          double e = alpha[(t_max - 1) * n + i] + m.exit(i) - ll;
          exits[i] += e == kLogZero ? 0.0 : std::exp(e);
        }
      }
      for (size_t t = 0; t < t_max; ++t) {
        auto f = seq.frame(t);
        for (size_t i = 0; i < n; ++i) {
          double g = gamma[t * n + i];
          if (g == 0.0) continue;
          occ[i] += g;
          for (size_t d = 0; d < dims; ++d) sum[i * dims + d] += g * f[d];
        }
      }
      for (size_t t = 0; t + 1 < t_max; ++t)
        for (size_t j = 0; j < n; ++j) {
          double right = b[(t + 1) * n + j] + beta[(t + 1) * n + j] - ll;
          if (right == kLogZero) continue;
          for (size_t i : preds[j]) {
            double x = alpha[t * n + i] + m.transition(i, j) + right;
            if (x != kLogZero) trans[i * n + j] += std::exp(x);
          }
        }
    }
    if (used == 0) throw HmmError("no training sequence has a legal path through the model");
    res.loglik.push_back(total);

    if (iter > 0 && cfg.loglik_rel_tol > 0.0) {
      double rel = (total - prev) / std::max(std::abs(prev), 1e-300);
      if (rel < cfg.loglik_rel_tol) {
        res.converged = true;
        break;
      }
    }
    if (iter == cfg.max_iters) break;
    prev = total;

    // M-step.
    Hmm next = m;
    double init_total = 0.0;
    for (double v : init) init_total += v;
    for (size_t i = 0; i < n; ++i)
      next.set_initial(i, init[i] > 0.0 ? std::log(init[i] / init_total) : kLogZero);

    for (size_t i = 0; i < n; ++i) {
      double denom = exits[i];
      for (size_t j = 0; j < n; ++j) denom += trans[i * n + j];
      if (denom <= 0.0) {
        zero_occ.insert(i);
        continue;
      }
      for (size_t j = 0; j < n; ++j) {
        if (!m.allowed(i, j)) continue;
        double p = trans[i * n + j] / denom;
        if (p > 0.0) next.set_transition(i, j, std::log(p));
        else next.disallow(i, j);
      }
      if (!m.open_end() && m.exit(i) != kLogZero) {
        double p = exits[i] / denom;
        next.set_exit(i, p > 0.0 ? std::log(p) : kLogZero);
      }
    }

    for (size_t i = 0; i < n; ++i) {
      if (occ[i] <= 0.0) {
        zero_occ.insert(i);
        continue;
      }
      auto mu = next.mean(i);
      for (size_t d = 0; d < dims; ++d) mu[d] = sum[i * dims + d] / occ[i];
    }
    // Second pass: variance around the updated mean.
    std::vector<double> sq(n * dims, 0.0);
    for (size_t s = 0; s < data.size(); ++s) {
      const auto& gamma = gammas[s];
      if (gamma.empty()) continue;
      for (size_t t = 0; t < data[s].num_frames(); ++t) {
        auto f = data[s].frame(t);
        for (size_t i = 0; i < n; ++i) {
          double g = gamma[t * n + i];
          if (g == 0.0) continue;
          auto mu = next.mean(i);
          for (size_t d = 0; d < dims; ++d) sq[i * dims + d] += g * (f[d] - mu[d]) * (f[d] - mu[d]);
        }
      }
    }
    for (size_t i = 0; i < n; ++i) {
      if (occ[i] <= 0.0) continue;
      auto var = next.variance(i);
      for (size_t d = 0; d < dims; ++d) var[d] = std::max(sq[i * dims + d] / occ[i], cfg.variance_floor);
    }
    res.model = std::move(next);
    res.iterations = iter + 1;
  }
  res.zero_occupancy_states.assign(zero_occ.begin(), zero_occ.end());
  res.skipped_sequences.assign(skipped.begin(), skipped.end());
  return res;
}

SampledSequence sample(const Hmm& model, size_t length, uint64_t seed) {
  if (length == 0) throw HmmError("sample length must be >= 1");
  const size_t n = model.num_states();
  // reach[t * N + i]: log mass of legal continuations from state i at frame t.
  std::vector<double> reach(length * n, kLogZero);
  for (size_t i = 0; i < n; ++i) reach[(length - 1) * n + i] = end_weight(model, i);
  std::vector<double> terms;
  for (size_t t = length - 1; t-- > 0;)
    for (size_t i = 0; i < n; ++i) {
      terms.clear();
      for (size_t j = 0; j < n; ++j) terms.push_back(model.transition(i, j) + reach[(t + 1) * n + j]);
      reach[t * n + i] = log_sum_exp(terms);
    }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SampledSequence out{FeatureSequence(model.dims()), {}};
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) w[i] = model.initial(i) + reach[i];
  if (log_sum_exp(w) == kLogZero)
    throw HmmError("no legal path of length " + std::to_string(length));
  size_t state = draw_categorical(rng, w);
  std::vector<double> x(model.dims());
  for (size_t t = 0; t < length; ++t) {
    if (t > 0) {
      for (size_t j = 0; j < n; ++j) w[j] = model.transition(state, j) + reach[t * n + j];
      state = draw_categorical(rng, w);
    }
    out.states.push_back(state);
    auto mu = model.mean(state);
    auto var = model.variance(state);
    for (size_t d = 0; d < model.dims(); ++d) x[d] = mu[d] + std::sqrt(var[d]) * gauss(rng);
    out.obs.push_back(x);
  }
  return out;
}

namespace {

std::string fmt_log10(double lnp) {
  if (lnp == kLogZero) return "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << lnp / std::numbers::ln10;
  return os.str();
}

double parse_log10(const std::string& s) {
  if (s == "-inf") return kLogZero;
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw HmmError("bad number '" + s + "'");
  return v * std::numbers::ln10;
}

std::string fmt_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string write_hmm(const Hmm& m) {
  const size_t n = m.num_states(), dims = m.dims();
  std::ostringstream os;
  os << "#hmm v1 states=" << n << " dims=" << dims << "\n";
  os << "end " << (m.open_end() ? "open" : "exit") << "\n";
  os << "init";
  for (size_t i = 0; i < n; ++i) os << ' ' << fmt_log10(m.initial(i));
  os << "\n";
  for (size_t i = 0; i < n; ++i) {
    os << "trans";
    for (size_t j = 0; j < n; ++j) os << ' ' << fmt_log10(m.allowed(i, j) ? m.transition(i, j) : kLogZero);
    os << "\n";
  }
  if (!m.open_end()) {
    os << "exit";
    for (size_t i = 0; i < n; ++i) os << ' ' << fmt_log10(m.exit(i));
    os << "\n";
  }
  for (size_t i = 0; i < n; ++i) {
    os << "mean";
    for (double v : m.mean(i)) os << ' ' << fmt_real(v);
    os << "\nvar";
    for (double v : m.variance(i)) os << ' ' << fmt_real(v);
    os << "\n";
  }
  return os.str();
}

Hmm read_hmm(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw HmmError("empty model file");
  auto head = split_ws(line);
  if (head.size() < 4 || head[0] != "#hmm" || head[1] != "v1")
    throw HmmError("model file must start with '#hmm v1 states=N dims=D'");
  size_t n = 0, dims = 0;
  for (size_t k = 2; k < head.size(); ++k) {
    auto eq = head[k].find('=');
    if (eq == std::string::npos) continue;
    auto key = head[k].substr(0, eq);
    auto val = std::stoul(head[k].substr(eq + 1));
    if (key == "states") n = val;
    else if (key == "dims") dims = val;
  }
  Hmm m(n, dims);
  size_t trans_row = 0, mean_row = 0, var_row = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    const std::string& tag = toks[0];
    auto expect = [&](size_t count) {
      if (toks.size() != count + 1)
        throw HmmError("line " + std::to_string(line_no) + ": expected " + std::to_string(count) +
                       " values after '" + tag + "'");
    };
    if (tag == "end") {
      m.set_open_end(toks.size() > 1 && toks[1] == "open");
    } else if (tag == "init") {
      expect(n);
      for (size_t i = 0; i < n; ++i) m.set_initial(i, parse_log10(toks[i + 1]));
    } else if (tag == "trans") {
      expect(n);
      if (trans_row >= n) throw HmmError("too many trans rows");
      for (size_t j = 0; j < n; ++j) {
        double v = parse_log10(toks[j + 1]);
        if (v == kLogZero) m.disallow(trans_row, j);
        else m.set_transition(trans_row, j, v);
      }
      ++trans_row;
    } else if (tag == "exit") {
      expect(n);
      for (size_t i = 0; i < n; ++i) m.set_exit(i, parse_log10(toks[i + 1]));
      m.set_open_end(false);
    } else if (tag == "mean") {
      expect(dims);
      if (mean_row >= n) throw HmmError("too many mean rows");
      auto mu = m.mean(mean_row++);
      for (size_t d = 0; d < dims; ++d) mu[d] = std::stod(toks[d + 1]);
    } else if (tag == "var") {
      expect(dims);
      if (var_row >= n) throw HmmError("too many var rows");
      auto var = m.variance(var_row++);
      for (size_t d = 0; d < dims; ++d) var[d] = std::stod(toks[d + 1]);
    } else {
      throw HmmError("line " + std::to_string(line_no) + ": unknown record '" + tag + "'");
    }
  }
  if (trans_row != n || mean_row != n || var_row != n)
    throw HmmError("model file is missing rows");
  return m;
}

void save_hmm(const Hmm& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw HmmError("cannot write '" + path.string() + "'");
  out << write_hmm(model);
}

Hmm load_hmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HmmError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_hmm(ss.str());
}

}  // namespace vaani
