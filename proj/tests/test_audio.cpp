#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "vaani/audio.hpp"

using namespace vaani;

namespace {

const std::filesystem::path kFixtures = VAANI_FIXTURE_DIR;

AudioClip sine_clip(double hz, double amplitude, size_t n, int rate = 16000) {
  AudioClip c;
  c.sample_rate_hz = rate;
  for (size_t i = 0; i < n; ++i) c.samples.push_back(amplitude * std::sin(2 * std::numbers::pi * hz * i / rate));
  return c;
}

AudioClip noise_clip(size_t n, uint64_t seed, double amplitude = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  AudioClip c;
  for (size_t i = 0; i < n; ++i) c.samples.push_back(u(rng));
  return c;
}

}  // namespace

TEST_CASE("load_wav reads silence") {
  AudioClip c = load_wav(kFixtures / "silence.wav");
  CHECK(c.samples.size() == 16000);
  CHECK(c.sample_rate_hz == 16000);
  for (double s : c.samples) REQUIRE(s == 0.0);
}

TEST_CASE("load_wav reads the 440 Hz tone fixture") {
  AudioClip c = load_wav(kFixtures / "tone.wav");
  CHECK(c.samples.size() == 8000);
  double peak = 0.0;
  for (double s : c.samples) peak = std::max(peak, std::abs(s));
  CHECK(std::abs(peak - 1.0) <= 1e-3);
}

TEST_CASE("load_wav rejects multichannel and missing files") {
  try {
    load_wav(kFixtures / "stereo.wav");
    FAIL("expected a format error");
  } catch (const AudioFormatError& e) {
    CHECK(std::string(e.what()).find("channels=2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_wav(kFixtures / "no-such.wav"), AudioFormatError);
}

TEST_CASE("wav encode/decode round trip") {
  AudioClip c = sine_clip(300.0, 0.5, 1234);
  AudioClip d = decode_wav(encode_wav(c));
  REQUIRE(d.samples.size() == c.samples.size());
  for (size_t i = 0; i < c.samples.size(); ++i) CHECK(std::abs(d.samples[i] - c.samples[i]) < 1.0 / 16384);

  std::string bytes = encode_wav(c);
  bytes[24] = 0x44;  // sample rate low byte
  bytes[25] = 0xAC;
  CHECK_THROWS_WITH_AS(decode_wav(bytes), doctest::Contains("sample_rate="), AudioFormatError);
}

TEST_CASE("one second at 16 kHz gives 98 frames") {
  // 98 = floor((16000 - 400) / 160) + 1, computed by an external script.
  FeatureSequence f = extract_features(AudioClip{std::vector<double>(16000, 0.0), 16000, "z"});
  CHECK(f.num_frames() == 98);
  CHECK(f.dims() == 13);
}

TEST_CASE("frame count matches window enumeration") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    size_t w = 1 + rng() % 500, h = 1 + rng() % w, n = w + rng() % 3000;
    size_t count = 0;
    for (size_t start = 0; start + w <= n; start += h) ++count;
    REQUIRE(frame_count(n, w, h) == count);
  }
  CHECK(frame_count(10, 20, 5) == 0);
}

TEST_CASE("too-short clip reports required and actual samples") {
  AudioClip c{std::vector<double>(100, 0.0), 16000, ""};
  CHECK_THROWS_WITH_AS(extract_features(c), "clip too short: need 400 samples, got 100", FeatureError);
}

TEST_CASE("silence gives identical finite frames") {
  FeatureSequence f = extract_features(AudioClip{std::vector<double>(4000, 0.0), 16000, ""});
  REQUIRE(f.num_frames() > 1);
  for (size_t t = 1; t < f.num_frames(); ++t)
    for (size_t d = 0; d < f.dims(); ++d) REQUIRE(f.frame(t)[d] == f.frame(0)[d]);
  for (double v : f.data()) CHECK(std::isfinite(v));
}

TEST_CASE("filterbank of a cosine at a filter centre matches a direct DFT") {
  const int rate = 16000;
  const size_t w = 400, nfft = 512, filters = 24;
  FeatureConfig cfg;
  // Independent triangular filters on the mel scale.
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto inv = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double top = mel(rate / 2.0);
  const size_t target = 10;
  const double centre = inv(top * (target + 1) / (filters + 1));

  std::vector<double> frame(w);
  for (size_t i = 0; i < w; ++i) frame[i] = std::cos(2 * std::numbers::pi * centre * i / rate);

  std::vector<double> x(w);
  for (size_t i = 0; i < w; ++i) {
    double pre = frame[i] - 0.97 * (i == 0 ? frame[0] : frame[i - 1]);
    x[i] = pre * (0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / (w - 1)));
  }
  std::vector<double> mag(nfft / 2 + 1);
  for (size_t k = 0; k <= nfft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < w; ++i) acc += x[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / nfft);
    mag[k] = std::abs(acc);
  }
  std::vector<double> expected(filters, 0.0);
  for (size_t j = 0; j < filters; ++j) {
    double lo = top * j / (filters + 1), mid = top * (j + 1) / (filters + 1), hi = top * (j + 2) / (filters + 1);
    for (size_t k = 0; k <= nfft / 2; ++k) {
      double m = mel(static_cast<double>(k) * rate / nfft);
      double wt = 0.0;
      if (m > lo && m <= mid) wt = (m - lo) / (mid - lo);
      else if (m > mid && m < hi) wt = (hi - m) / (hi - mid);
      expected[j] += wt * mag[k];
    }
  }

  std::vector<double> got = frame_filterbank(frame, cfg, rate);
  REQUIRE(got.size() == filters);
  double peak = *std::max_element(expected.begin(), expected.end());
  for (size_t j = 0; j < filters; ++j) CHECK(std::abs(got[j] - expected[j]) <= 1e-6 * peak);
  CHECK(std::max_element(got.begin(), got.end()) - got.begin() == static_cast<long>(target));
  CHECK(std::abs(make_mel_filterbank(24, rate, nfft).center_hz[target] - centre) < 1e-9);
}

TEST_CASE("amplitude scaling shifts only c0 and log energy") {
  AudioClip a = noise_clip(6400, 11);
  for (double c : {0.5, 2.0, 3.7}) {
    AudioClip b = a;
    for (double& s : b.samples) s *= c;
    FeatureSequence fa = extract_features(a), fb = extract_features(b);
    const double shift = std::log(c);
    for (size_t t = 0; t < fa.num_frames(); ++t) {
      CHECK(fb.frame(t)[0] - fa.frame(t)[0] == doctest::Approx(shift * std::sqrt(24.0)).epsilon(1e-9));
      for (size_t d = 1; d < 12; ++d) CHECK(std::abs(fb.frame(t)[d] - fa.frame(t)[d]) < 1e-6);
      CHECK(std::abs(fb.frame(t)[12] - fa.frame(t)[12] - 2 * shift) < 1e-6);
    }
  }
}

TEST_CASE("random input never yields non-finite features") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    AudioClip c = noise_clip(800 + seed * 37, seed, seed % 2 ? 1.0 : 1e-12);
    for (double v : extract_features(c).data()) REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("feature dump round trip") {
  FeatureSequence f = extract_features(noise_clip(2000, 5));
  std::string text = dump_features(f);
  CHECK(text.rfind("#dims=13 hop_ms=10", 0) == 0);
  FeatureSequence g = parse_feature_dump(text);
  REQUIRE(g.num_frames() == f.num_frames());
  CHECK(g.data() == f.data());
}

TEST_CASE("config invariants") {
  FeatureConfig cfg;
  cfg.hop_ms = 30;
  CHECK_THROWS_AS(cfg.validate(), FeatureError);
  cfg = {};
  cfg.num_cepstra = 24;
  CHECK_THROWS_AS(cfg.validate(), FeatureError);
  cfg = {};
  cfg.include_log_energy = false;
  CHECK(cfg.dims() == 12);
}
