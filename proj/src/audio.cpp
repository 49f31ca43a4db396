#include "vaani/audio.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vaani/text.hpp"

namespace vaani {

namespace {

uint32_t read_u32(std::string_view b, size_t off) {
  return static_cast<uint32_t>(static_cast<uint8_t>(b[off])) |
         static_cast<uint32_t>(static_cast<uint8_t>(b[off + 1])) << 8 |
         static_cast<uint32_t>(static_cast<uint8_t>(b[off + 2])) << 16 |
         static_cast<uint32_t>(static_cast<uint8_t>(b[off + 3])) << 24;
}

uint16_t read_u16(std::string_view b, size_t off) {
  return static_cast<uint16_t>(static_cast<uint8_t>(b[off]) |
                               static_cast<uint8_t>(b[off + 1]) << 8);
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

// FFTW planning is not thread-safe; execution on plan-private buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // Magnitude spectrum of `x` zero-padded to n, bins 0..n/2.
  void magnitude(std::span<const double> x, std::vector<double>& mag) {
    std::fill(in_, in_ + n_, 0.0);
    std::copy(x.begin(), x.end(), in_);
    fftw_execute(plan_);
    mag.resize(n_ / 2 + 1);
    for (size_t k = 0; k <= n_ / 2; ++k) mag[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

void preemphasize_and_window(std::span<const double> frame, double coeff, std::vector<double>& out) {
  const size_t w = frame.size();
  out.resize(w);
  for (size_t n = 0; n < w; ++n) {
    double prev = n == 0 ? frame[0] : frame[n - 1];
    double hamming = w > 1 ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (w - 1)) : 1.0;
    out[n] = (frame[n] - coeff * prev) * hamming;
  }
}

std::vector<double> apply_filterbank(const MelFilterbank& fb, const std::vector<double>& mag) {
  std::vector<double> energies(fb.weights.size(), 0.0);
  for (size_t j = 0; j < fb.weights.size(); ++j) {
    const auto& w = fb.weights[j];
    double acc = 0.0;
    for (size_t k = 0; k < w.size(); ++k) acc += w[k] * mag[k];
    energies[j] = acc;
  }
  return energies;
}

}  // namespace

AudioClip decode_wav(std::string_view b, std::string source_id) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw AudioFormatError("not a RIFF/WAVE file");
  size_t off = 12;
  bool have_fmt = false;
  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  std::string_view data;
  bool have_data = false;
  while (off + 8 <= b.size()) {
    std::string_view id = b.substr(off, 4);
    uint32_t size = read_u32(b, off + 4);
    size_t body = off + 8;
    if (body + size > b.size()) {
      if (id == "data") size = static_cast<uint32_t>(b.size() - body);  // truncated writer
      else throw AudioFormatError("chunk '" + std::string(id) + "' overruns file");
    }
    if (id == "fmt ") {
      if (size < 16) throw AudioFormatError("fmt chunk too small");
      uint16_t format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format != 1) throw AudioFormatError("audio_format=" + std::to_string(format));
      have_fmt = true;
    } else if (id == "data") {
      data = b.substr(body, size);
      have_data = true;
    }
    off = body + size + (size & 1);
  }
  if (!have_fmt) throw AudioFormatError("missing fmt chunk");
  if (channels != 1) throw AudioFormatError("channels=" + std::to_string(channels));
  if (bits != 16) throw AudioFormatError("bits_per_sample=" + std::to_string(bits));
  if (rate != kCanonicalSampleRate) throw AudioFormatError("sample_rate=" + std::to_string(rate));
  if (!have_data) throw AudioFormatError("missing data chunk");

  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.source_id = std::move(source_id);
  clip.samples.resize(data.size() / 2);
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    auto v = static_cast<int16_t>(read_u16(data, 2 * i));
    clip.samples[i] = v / 32768.0;
  }
  return clip;
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioFormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_wav(ss.str(), path.stem().string());
}

std::string encode_wav(const AudioClip& clip) {
  const auto n = static_cast<uint32_t>(clip.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : clip.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(std::lround(c * 32767.0))));
  }
  return out;
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AudioFormatError("cannot write '" + path.string() + "'");
  std::string bytes = encode_wav(clip);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

size_t FeatureConfig::window_samples(int sample_rate_hz) const {
  return static_cast<size_t>(std::lround(window_ms * sample_rate_hz / 1000.0));
}

size_t FeatureConfig::hop_samples(int sample_rate_hz) const {
  return static_cast<size_t>(std::lround(hop_ms * sample_rate_hz / 1000.0));
}

void FeatureConfig::validate() const {
  if (!(hop_ms > 0.0) || hop_ms > window_ms)
    throw FeatureError("need 0 < hop_ms <= window_ms");
  if (num_filters < 1) throw FeatureError("num_filters must be positive");
  if (num_cepstra < 1 || num_cepstra >= num_filters)
    throw FeatureError("need 0 < num_cepstra < num_filters");
  if (!(energy_floor > 0.0)) throw FeatureError("energy_floor must be positive");
}

void FeatureSequence::push_back(std::span<const double> frame) {
  if (frame.size() != dims_)
    throw FeatureError("frame has " + std::to_string(frame.size()) + " dims, expected " +
                       std::to_string(dims_));
  data_.insert(data_.end(), frame.begin(), frame.end());
}

FeatureSequence FeatureSequence::slice(size_t begin, size_t end) const {
  FeatureSequence out(dims_, frame_hop_ms_, source_id_);
  out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(begin * dims_),
                   data_.begin() + static_cast<std::ptrdiff_t>(end * dims_));
  return out;
}

size_t frame_count(size_t num_samples, size_t window, size_t hop) {
  if (num_samples < window || window == 0 || hop == 0) return 0;
  return (num_samples - window) / hop + 1;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

size_t fft_size_for(size_t window_samples) {
  size_t n = 1;
  while (n < window_samples) n <<= 1;
  return n;
}

MelFilterbank make_mel_filterbank(int num_filters, int sample_rate_hz, size_t fft_size) {
  MelFilterbank fb;
  fb.fft_size = fft_size;
  const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
  const auto m = static_cast<size_t>(num_filters);
  std::vector<double> edges(m + 2);
  for (size_t i = 0; i < m + 2; ++i) edges[i] = mel_hi * static_cast<double>(i) / static_cast<double>(m + 1);
  const size_t bins = fft_size / 2 + 1;
  fb.weights.assign(m, std::vector<double>(bins, 0.0));
  fb.center_hz.resize(m);
  for (size_t j = 0; j < m; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    fb.center_hz[j] = mel_to_hz(mid);
    for (size_t k = 0; k < bins; ++k) {
      double mel = hz_to_mel(static_cast<double>(k) * sample_rate_hz / static_cast<double>(fft_size));
      double w = 0.0;
      if (mel > lo && mel <= mid) w = (mel - lo) / (mid - lo);
      else if (mel > mid && mel < hi) w = (hi - mel) / (hi - mid);
      fb.weights[j][k] = w;
    }
  }
  return fb;
}

std::vector<double> frame_filterbank(std::span<const double> frame, const FeatureConfig& cfg,
                                     int sample_rate_hz) {
  cfg.validate();
  const size_t n = fft_size_for(frame.size());
  RealFft fft(n);
  MelFilterbank fb = make_mel_filterbank(cfg.num_filters, sample_rate_hz, n);
  std::vector<double> windowed, mag;
  preemphasize_and_window(frame, cfg.pre_emphasis_coeff, windowed);
  fft.magnitude(windowed, mag);
  return apply_filterbank(fb, mag);
}

FeatureSequence extract_features(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.validate();
  if (clip.sample_rate_hz <= 0) throw FeatureError("sample rate must be positive");
  const size_t w = cfg.window_samples(clip.sample_rate_hz);
  const size_t h = cfg.hop_samples(clip.sample_rate_hz);
  if (clip.samples.size() < w)
    throw FeatureError("clip too short: need " + std::to_string(w) + " samples, got " +
                       std::to_string(clip.samples.size()));
  const size_t frames = frame_count(clip.samples.size(), w, h);
  const size_t n = fft_size_for(w);
  const auto m = static_cast<size_t>(cfg.num_filters);
  const auto nc = static_cast<size_t>(cfg.num_cepstra);

  RealFft fft(n);
  MelFilterbank fb = make_mel_filterbank(cfg.num_filters, clip.sample_rate_hz, n);

  // Orthonormal type-II cosine basis.
  std::vector<double> basis(nc * m);
  for (size_t i = 0; i < nc; ++i) {
    double scale = i == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (size_t j = 0; j < m; ++j)
      basis[i * m + j] = scale * std::cos(std::numbers::pi * i * (j + 0.5) / m);
  }

  FeatureSequence out(cfg.dims(), cfg.hop_ms, clip.source_id);
  std::vector<double> windowed, mag, row(cfg.dims());
  for (size_t t = 0; t < frames; ++t) {
    std::span<const double> frame(clip.samples.data() + t * h, w);
    preemphasize_and_window(frame, cfg.pre_emphasis_coeff, windowed);
    fft.magnitude(windowed, mag);
    std::vector<double> energies = apply_filterbank(fb, mag);
    for (double& e : energies) e = std::log(std::max(e, cfg.energy_floor));
    for (size_t i = 0; i < nc; ++i) {
      double acc = 0.0;
      for (size_t j = 0; j < m; ++j) acc += basis[i * m + j] * energies[j];
      row[i] = acc;
    }
    if (cfg.include_log_energy) {
      double e = 0.0;
      for (double s : frame) e += s * s;
      row[nc] = std::log(std::max(e, cfg.energy_floor));
    }
    out.push_back(row);
  }
  return out;
}

std::string dump_features(const FeatureSequence& feats) {
  std::ostringstream os;
  os << "#dims=" << feats.dims() << " hop_ms=" << feats.frame_hop_ms() << "\n";
  os << std::setprecision(17);
  for (size_t t = 0; t < feats.num_frames(); ++t) {
    auto f = feats.frame(t);
    for (size_t d = 0; d < f.size(); ++d) {
      if (d) os << ' ';
      os << f[d];
    }
    os << '\n';
  }
  return os.str();
}

FeatureSequence parse_feature_dump(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header) || !starts_with(header, "#dims="))
    throw FeatureError("feature dump must start with '#dims=D hop_ms=H'");
  size_t dims = 0;
  double hop = 10.0;
  for (const auto& tok : split_ws(header.substr(1))) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    if (tok.substr(0, eq) == "dims") dims = std::stoul(tok.substr(eq + 1));
    else if (tok.substr(0, eq) == "hop_ms") hop = std::stod(tok.substr(eq + 1));
  }
  if (dims == 0) throw FeatureError("feature dump has dims=0");
  FeatureSequence out(dims, hop);
  std::string line;
  std::vector<double> row;
  while (std::getline(in, line)) {
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    row.clear();
    for (const auto& t : toks) row.push_back(std::stod(t));
    out.push_back(row);
  }
  return out;
}

}  // namespace vaani
