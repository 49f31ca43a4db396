#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vaani/hmm.hpp"
#include "vaani/lexicon.hpp"
#include "vaani/recognizer.hpp"

namespace vaani {

// Seeded stand-in acoustics: every phone unit gets a 3-state left-to-right
// HMM with unit variances and means drawn from N(0, spread^2).
AcousticModel make_generator_models(const PhoneSet& phones, size_t dims, uint64_t seed, double spread = 3.0);

// Frame count for one pass through a left-to-right model: each state lasts
// 1 + Geometric(1 - self_loop) frames.
size_t sample_duration(const Hmm& model, uint64_t seed);

// Observation sequence for `word` drawn from its composed model.
FeatureSequence sample_word(const WordModel& word, uint64_t seed);

// Concatenated word samples for a whole utterance.
FeatureSequence sample_utterance(const std::vector<const WordModel*>& words, uint64_t seed);

struct PhoneTrainingSet {
  std::string unit;
  std::vector<FeatureSequence> samples;
};

// Isolated samples of each unit drawn from `generators`.
std::vector<PhoneTrainingSet> sample_phone_data(const AcousticModel& generators,
                                                const std::vector<std::string>& units, size_t per_unit,
                                                uint64_t seed);

// Flat start plus Baum-Welch for every unit in `data`.
AcousticModel train_phone_models(const std::vector<PhoneTrainingSet>& data, size_t dims, const TrainConfig& cfg);

}  // namespace vaani
