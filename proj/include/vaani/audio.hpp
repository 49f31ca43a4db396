#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vaani {

class AudioFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCanonicalSampleRate = 16000;

// Mono clip, samples in [-1, +1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;
  std::string source_id;
};

// RIFF/WAVE PCM16 mono 16 kHz only. Anything else is an AudioFormatError that
// names the offending header field, e.g. "channels=2".
AudioClip load_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::string_view bytes, std::string source_id = "");

// PCM16 mono encoder; samples are clipped to [-1, 1] and scaled by 32767.
std::string encode_wav(const AudioClip& clip);
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

struct FeatureConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  double pre_emphasis_coeff = 0.97;
  int num_filters = 24;
  int num_cepstra = 12;
  bool include_log_energy = true;
  double energy_floor = 1e-10;

  size_t dims() const { return static_cast<size_t>(num_cepstra) + (include_log_energy ? 1 : 0); }
  size_t window_samples(int sample_rate_hz) const;
  size_t hop_samples(int sample_rate_hz) const;
  // Throws FeatureError on a violated invariant.
  void validate() const;
};

// T x D row-major matrix of cepstral frames.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(size_t dims, double frame_hop_ms = 10.0, std::string source_id = "")
      : dims_(dims), frame_hop_ms_(frame_hop_ms), source_id_(std::move(source_id)) {}

  size_t dims() const { return dims_; }
  size_t num_frames() const { return dims_ == 0 ? 0 : data_.size() / dims_; }
  bool empty() const { return data_.empty(); }
  double frame_hop_ms() const { return frame_hop_ms_; }
  const std::string& source_id() const { return source_id_; }
  void set_source_id(std::string id) { source_id_ = std::move(id); }

  std::span<const double> frame(size_t t) const {
    return {data_.data() + t * dims_, dims_};
  }
  std::span<double> frame(size_t t) { return {data_.data() + t * dims_, dims_}; }

  void push_back(std::span<const double> frame);
  FeatureSequence slice(size_t begin, size_t end) const;
  const std::vector<double>& data() const { return data_; }

 private:
  size_t dims_ = 0;
  double frame_hop_ms_ = 10.0;
  std::string source_id_;
  std::vector<double> data_;
};

// Number of frames for n samples, window w and hop h: floor((n - w) / h) + 1,
// zero when n < w.
size_t frame_count(size_t num_samples, size_t window, size_t hop);

struct MelFilterbank {
  size_t fft_size = 0;
  std::vector<double> center_hz;
  // weights[filter][bin], bins 0..fft_size/2.
  std::vector<std::vector<double>> weights;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);
MelFilterbank make_mel_filterbank(int num_filters, int sample_rate_hz, size_t fft_size);
size_t fft_size_for(size_t window_samples);

// Linear (pre-log) mel filterbank outputs for one frame of exactly
// window_samples samples: pre-emphasis, Hamming window, magnitude spectrum,
// triangular filters.
std::vector<double> frame_filterbank(std::span<const double> frame, const FeatureConfig& cfg,
                                     int sample_rate_hz);

FeatureSequence extract_features(const AudioClip& clip, const FeatureConfig& cfg = {});

// Text dump: "#dims=D hop_ms=H" then one frame per line.
std::string dump_features(const FeatureSequence& feats);
FeatureSequence parse_feature_dump(std::string_view text);

}  // namespace vaani
