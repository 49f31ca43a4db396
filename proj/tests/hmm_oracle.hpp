// Brute-force reference computations for small HMMs.
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vaani/hmm.hpp"

namespace oracle {

inline double gauss_log(const vaani::Hmm& m, size_t s, std::span<const double> x) {
  double acc = 0.0;
  for (size_t d = 0; d < m.dims(); ++d) {
    double v = m.variance(s)[d], diff = x[d] - m.mean(s)[d];
    acc += -0.5 * std::log(2 * std::numbers::pi * v) - diff * diff / (2 * v);
  }
  return acc;
}

inline double path_score(const vaani::Hmm& m, const vaani::FeatureSequence& obs, const std::vector<size_t>& path) {
  double lp = m.initial(path[0]) + gauss_log(m, path[0], obs.frame(0));
  for (size_t t = 1; t < path.size(); ++t) lp += m.transition(path[t - 1], path[t]) + gauss_log(m, path[t], obs.frame(t));
  lp += m.open_end() ? 0.0 : m.exit(path.back());
  return lp;
}

struct Enumeration {
  double total = vaani::kLogZero;
  double best = vaani::kLogZero;
  std::vector<size_t> best_path;
};

// Every one of the N^T state paths.
inline Enumeration enumerate(const vaani::Hmm& m, const vaani::FeatureSequence& obs) {
  const size_t n = m.num_states(), T = obs.num_frames();
  std::vector<size_t> path(T, 0);
  std::vector<double> scores;
  Enumeration e;
  for (;;) {
    double s = path_score(m, obs, path);
    scores.push_back(s);
    if (s > e.best) {
      e.best = s;
      e.best_path = path;
    }
    size_t k = T;
    while (k > 0) {
      --k;
      if (++path[k] < n) break;
      path[k] = 0;
      if (k == 0) {
        k = T + 1;
        break;
      }
    }
    if (k == T + 1) break;
  }
  double mx = vaani::kLogZero;
  for (double s : scores) mx = std::max(mx, s);
  if (mx == vaani::kLogZero) return e;
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - mx);
  e.total = mx + std::log(acc);
  return e;
}

// Random sparse model; with_exit selects exit arcs instead of an open end.
inline vaani::Hmm random_model(std::mt19937_64& rng, size_t n, size_t dims, bool with_exit) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> g(0.0, 1.5);
  vaani::Hmm m(n, dims);
  std::vector<double> w(n + 1);
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
  };
  std::vector<double> init(n);
  for (size_t i = 0; i < n; ++i) init[i] = (i == 0 || rng() % 3) ? u(rng) : 0.0;
  normalize(init);
  for (size_t i = 0; i < n; ++i) m.set_initial(i, init[i] > 0 ? std::log(init[i]) : vaani::kLogZero);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) w[j] = (j == i || rng() % 3) ? u(rng) : 0.0;
    w[n] = with_exit ? u(rng) : 0.0;
    normalize(w);
    for (size_t j = 0; j < n; ++j)
      if (w[j] > 0) m.set_transition(i, j, std::log(w[j]));
    if (with_exit) m.set_exit(i, std::log(w[n]));
    for (size_t d = 0; d < dims; ++d) {
      m.mean(i)[d] = g(rng);
      m.variance(i)[d] = 0.3 + u(rng);
    }
  }
  return m;
}

inline vaani::FeatureSequence random_obs(std::mt19937_64& rng, size_t T, size_t dims) {
  std::normal_distribution<double> g(0.0, 1.5);
  vaani::FeatureSequence obs(dims);
  std::vector<double> x(dims);
  for (size_t t = 0; t < T; ++t) {
    for (double& v : x) v = g(rng);
    obs.push_back(x);
  }
  return obs;
}

}  // namespace oracle
