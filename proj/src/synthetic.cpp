#include "vaani/synthetic.hpp"

#include <cmath>
#include <random>

namespace vaani {

AcousticModel make_generator_models(const PhoneSet& phones, size_t dims, uint64_t seed, double spread) {
  AcousticModel am;
  am.dims = dims;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, spread);
  for (const auto& unit : phones.units()) {
    Hmm h = make_left_to_right(3, dims);
    for (size_t s = 0; s < 3; ++s)
      for (double& m : h.mean(s)) m = gauss(rng);
    am.phones.emplace(unit.id, std::move(h));
  }
  return am;
}

size_t sample_duration(const Hmm& model, uint64_t seed) {
  if (model.open_end()) throw HmmError("duration sampling needs exit arcs");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const size_t n = model.num_states();

  auto draw = [&](auto prob_of, size_t count) -> size_t {
    double u = unit(rng), acc = 0.0;
    size_t last = count;
    for (size_t k = 0; k < count; ++k) {
      double p = prob_of(k);
      if (p <= 0.0) continue;
      acc += p;
      last = k;
      if (u < acc) return k;
    }
    return last;
  };

  size_t state = draw([&](size_t k) { return std::exp(model.initial(k)); }, n);
  size_t frames = 1;
  for (;;) {
    size_t next = draw(
        [&](size_t k) { return k < n ? std::exp(model.transition(state, k)) : std::exp(model.exit(state)); }, n + 1);
    if (next == n) return frames;
    state = next;
    ++frames;
  }
}

FeatureSequence sample_word(const WordModel& word, uint64_t seed) {
  std::mt19937_64 rng(seed);
  size_t len = sample_duration(word.model, rng());
  return sample(word.model, len, rng()).obs;
}

FeatureSequence sample_utterance(const std::vector<const WordModel*>& words, uint64_t seed) {
  std::mt19937_64 rng(seed);
  FeatureSequence out(words.empty() ? 0 : words.front()->model.dims());
  for (const WordModel* w : words) {
    FeatureSequence part = sample_word(*w, rng());
    for (size_t t = 0; t < part.num_frames(); ++t) out.push_back(part.frame(t));
  }
  return out;
}

std::vector<PhoneTrainingSet> sample_phone_data(const AcousticModel& generators,
                                                const std::vector<std::string>& units, size_t per_unit,
                                                uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PhoneTrainingSet> out;
  for (const auto& u : units) {
    const Hmm* h = generators.find(u);
    if (!h) throw RecognizerError("no generator for phone " + u);
    PhoneTrainingSet set{u, {}};
    for (size_t k = 0; k < per_unit; ++k) {
      size_t len = sample_duration(*h, rng());
      set.samples.push_back(sample(*h, len, rng()).obs);
    }
    out.push_back(std::move(set));
  }
  return out;
}

AcousticModel train_phone_models(const std::vector<PhoneTrainingSet>& data, size_t dims, const TrainConfig& cfg) {
  AcousticModel am;
  am.dims = dims;
  for (const auto& set : data) {
    Hmm start = flat_start(make_left_to_right(3, dims), set.samples, cfg.variance_floor);
    am.phones.emplace(set.unit, baum_welch(start, set.samples, cfg).model);
  }
  return am;
}

}  // namespace vaani
