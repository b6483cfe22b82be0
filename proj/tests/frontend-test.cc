// tests/frontend-test.cc

// Copyright 2026  The ivnda Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "ivnda/feature-archive.h"
#include "ivnda/frontend.h"
#include "oracles.h"
#include "test-util.h"

using namespace ivnda;

namespace {

AudioSignal Tone(double hz, double seconds, int rate, double amp) {
  AudioSignal s;
  s.sample_rate_hz = rate;
  int n = static_cast<int>(seconds * rate);
  for (int i = 0; i < n; i++)
    s.samples.push_back(amp * std::sin(2.0 * std::numbers::pi * hz * i / rate));
  return s;
}

// Textbook MFCC with a direct O(N^2) DFT; same documented settings as the
// library (per-frame pre-emphasis, Hamming, mel 1127 ln(1 + f/700),
// triangles on the mel axis, log floor, orthonormal DCT-II).
Matrix ReferenceMfcc(const AudioSignal &s, int num_ceps = 13, int num_bins = 24) {
  const double pi = std::numbers::pi;
  const int rate = s.sample_rate_hz, len = rate / 40, shift = rate / 100;
  const int nfft = rate == 8000 ? 512 : 1024;
  const int frames = (static_cast<int>(s.samples.size()) - len) / shift + 1;
  auto mel = [](double f) { return 1127.0 * std::log(1.0 + f / 700.0); };
  double lo = mel(0.0), hi = mel(rate / 2.0), step = (hi - lo) / (num_bins + 1);
  Matrix out(frames, num_ceps);
  for (int t = 0; t < frames; t++) {
    std::vector<double> x(len);
    for (int i = 0; i < len; i++) x[i] = s.samples[t * shift + i];
    std::vector<double> y(len);
    y[0] = x[0] - 0.97 * x[0];
    for (int i = 1; i < len; i++) y[i] = x[i] - 0.97 * x[i - 1];
    for (int i = 0; i < len; i++) y[i] *= 0.54 - 0.46 * std::cos(2 * pi * i / (len - 1));
    std::vector<double> power(nfft / 2 + 1);
    for (int k = 0; k <= nfft / 2; k++) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < len; i++)
        acc += y[i] * std::polar(1.0, -2.0 * pi * k * i / nfft);
      power[k] = std::norm(acc);
    }
    std::vector<double> logmel(num_bins);
    for (int b = 0; b < num_bins; b++) {
      double l = lo + b * step, c = l + step, r = c + step, e = 0.0;
      for (int k = 0; k <= nfft / 2; k++) {
        double m = mel(static_cast<double>(k) * rate / nfft);
        if (m > l && m <= c) e += power[k] * (m - l) / (c - l);
        else if (m > c && m < r) e += power[k] * (r - m) / (r - c);
      }
      logmel[b] = std::log(std::max(e, 1e-10));
    }
    for (int q = 0; q < num_ceps; q++) {
      double acc = 0.0;
      for (int b = 0; b < num_bins; b++)
        acc += logmel[b] * std::cos(pi * q * (b + 0.5) / num_bins);
      out(t, q) = acc * std::sqrt((q == 0 ? 1.0 : 2.0) / num_bins);
    }
  }
  return out;
}

FeatureMatrix Features(const Matrix &m) {
  FeatureMatrix f;
  f.frames = m;
  f.speech_mask.assign(m.rows(), 1);
  return f;
}

}  // namespace

TEST_CASE("read_wav: zero signal, scale endpoint, sine via independent writer") {
  std::vector<int16_t> zeros(8000, 0);
  AudioSignal z = ParseWav(oracle::WavBytes(zeros, 8000), "zeros");
  CHECK(z.samples.size() == 8000);
  CHECK(z.sample_rate_hz == 8000);
  for (double v : z.samples) CHECK(v == 0.0);

  AudioSignal m = ParseWav(oracle::WavBytes({-32768, 32767, 0}, 16000), "ends");
  CHECK(m.samples[0] == -1.0);
  CHECK(m.samples[1] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-15));

  std::vector<int16_t> sine(8000);
  for (int i = 0; i < 8000; i++)
    sine[i] = static_cast<int16_t>(
        std::lround(32767.0 * std::sin(2.0 * std::numbers::pi * 1000.0 * i / 8000.0)));
  AudioSignal s = ParseWav(oracle::WavBytes(sine, 8000), "sine");
  REQUIRE(s.samples.size() == 8000);
  double mx = 0.0;
  for (int i = 0; i < 8000; i++) {
    CHECK(s.samples[i] == sine[i] / 32768.0);
    mx = std::max(mx, s.samples[i]);
  }
  CHECK(mx == doctest::Approx(0.99997).epsilon(1e-5));
}

TEST_CASE("read_wav error paths") {
  std::string good = oracle::WavBytes({1, 2, 3, 4}, 8000);
  CHECK_KIND(ParseWav(good.substr(0, 20), "trunc"), kFormat);
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_KIND(ParseWav(bad_magic, "magic"), kFormat);
  CHECK_KIND(ParseWav(oracle::WavBytes({1, 2, 3, 4}, 8000, 2), "stereo"),
             kUnsupportedFormat);
  CHECK_KIND(ParseWav(oracle::WavBytes({1, 2, 3, 4}, 8000, 1, 16, 3), "float"),
             kUnsupportedFormat);
  CHECK_KIND(ParseWav(oracle::WavBytes({1, 2, 3, 4}, 44100), "rate"),
             kUnsupportedFormat);
  CHECK_KIND(ParseWav(oracle::WavBytes({}, 8000), "empty"), kEmptyInput);
  CHECK_KIND(ReadWav("/nonexistent/x.wav"), kIo);
}

TEST_CASE("wav encode/decode round trip") {
  AudioSignal s = Tone(440.0, 0.1, 16000, 0.5);
  AudioSignal back = ParseWav(EncodeWav(s), "rt");
  REQUIRE(back.samples.size() == s.samples.size());
  for (size_t i = 0; i < s.samples.size(); i++)
    CHECK(std::abs(back.samples[i] - s.samples[i]) <= 0.5 / 32768.0 + 1e-15);
  CHECK(EncodeWav(back) == EncodeWav(s));
}

TEST_CASE("compute_mfcc: frame count and shape") {
  MfccOptions opts;
  FeatureMatrix f = ComputeMfcc(Tone(300.0, 1.0, 8000, 0.3), opts);
  CHECK(f.NumFrames() == 98);
  CHECK(f.Dim() == 13);
  CHECK(ComputeMfcc(Tone(300.0, 1.0, 16000, 0.3), opts).NumFrames() == 98);
  for (int n : {200, 279, 280, 281, 1000, 7999})
    CHECK(NumFrames(n, 8000, opts) == (n - 200) / 80 + 1);
  AudioSignal short_sig;
  short_sig.samples.assign(199, 0.1);
  CHECK_KIND(ComputeMfcc(short_sig, opts), kEmptyInput);
}

TEST_CASE("compute_mfcc: silence gives identical rows") {
  AudioSignal z;
  z.samples.assign(4000, 0.0);
  FeatureMatrix f = ComputeMfcc(z, MfccOptions());
  for (int t = 1; t < f.NumFrames(); t++) CHECK(f.frames.row(t) == f.frames.row(0));
}

TEST_CASE("compute_mfcc: matches a direct-DFT reference and is flat on a tone") {
  for (int rate : {8000, 16000}) {
    AudioSignal s = Tone(1000.0, 0.3, rate, 0.8);
    Matrix got = ComputeMfcc(s, MfccOptions()).frames;
    Matrix ref = ReferenceMfcc(s);
    REQUIRE(got.rows() == ref.rows());
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-8);
    Matrix interior = got.middleRows(1, got.rows() - 2);
    Eigen::RowVectorXd mean = interior.colwise().mean();
    for (int c = 0; c < 13; c++) {
      double var = (interior.col(c).array() - mean(c)).square().mean();
      CHECK(var < 1e-6);
    }
  }
}

TEST_CASE("append_deltas") {
  Matrix m = Matrix::Constant(10, 13, 2.5);
  FeatureMatrix d = AppendDeltas(Features(m));
  CHECK(d.Dim() == 39);
  CHECK(d.frames.rightCols(26).cwiseAbs().maxCoeff() == 0.0);

  const double slope = 0.7;
  Matrix lin = Matrix::Zero(12, 13);
  for (int t = 0; t < 12; t++) lin(t, 0) = slope * t;
  FeatureMatrix dl = AppendDeltas(Features(lin));
  for (int t = 2; t < 10; t++) {
    CHECK(dl.frames(t, 13) == doctest::Approx(slope).epsilon(1e-12));
    if (t >= 4 && t < 8) CHECK(std::abs(dl.frames(t, 26)) < 1e-12);
  }
  CHECK_KIND(AppendDeltas(Features(Matrix::Zero(4, 13))), kInsufficientData);
}

TEST_CASE("detect_speech: silence, bursts, shared frame grid") {
  MfccOptions mo;
  SadOptions so;
  AudioSignal z;
  z.samples.assign(8000, 0.0);
  for (uint8_t b : DetectSpeech(z, mo, so)) CHECK(b == 0);

  // 300 ms noise bursts separated by 300 ms of silence.
  Rng rng(5);
  AudioSignal s;
  const int seg = 2400;
  for (int k = 0; k < 6; k++)
    for (int i = 0; i < seg; i++)
      s.samples.push_back(k % 2 == 0 ? std::clamp(0.5 * rng.Normal(), -1.0, 1.0) : 0.0);
  std::vector<uint8_t> mask = DetectSpeech(s, mo, so);
  REQUIRE(static_cast<int>(mask.size()) == NumFrames(s.samples.size(), 8000, mo));
  // Energy oracle: a frame lying entirely in a burst is speech; one
  // entirely in silence, at least 3 frames from any burst, is not.
  for (size_t t = 0; t < mask.size(); t++) {
    int start = t * 80, end = start + 200;
    int first = start / seg, last = (end - 1) / seg;
    if (first == last && first % 2 == 0) CHECK(mask[t] == 1);
    int lo = std::max(0, start - 240), hi = end + 240;
    bool near_burst = false;
    for (int k = lo / seg; k <= std::min(5, (hi - 1) / seg); k++)
      near_burst |= k % 2 == 0;
    if (!near_burst) CHECK(mask[t] == 0);
  }
  for (int n : {200, 333, 4001, 12345}) {
    AudioSignal x;
    for (int i = 0; i < n; i++) x.samples.push_back(0.1 * rng.Normal());
    int frames = ComputeMfcc(x, mo).NumFrames();
    CHECK(static_cast<int>(DetectSpeech(x, mo, so).size()) == frames);
    if (frames >= 5) CHECK(AppendDeltas(ComputeMfcc(x, mo)).NumFrames() == frames);
  }
}

TEST_CASE("apply_cms") {
  FeatureMatrix one = Features(Matrix::Constant(3, 2, 4.0));
  one.speech_mask = {0, 1, 0};
  one.frames(1, 0) = 9.0;
  FeatureMatrix c1 = ApplyCms(one);
  CHECK(c1.frames.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c1.frames.row(0) == one.frames.row(0));  // non-speech untouched

  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  Matrix expect(2, 2);
  expect << -1, -1, 1, 1;
  CHECK(ApplyCms(Features(m)).frames == expect);

  Rng rng(2);
  FeatureMatrix r = Features(oracle::RandomMatrix(&rng, 100, 39, 3.0));
  for (int t = 0; t < 100; t++) r.speech_mask[t] = rng.Uniform() < 0.7;
  FeatureMatrix c = ApplyCms(r);
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(39);
  for (int t = 0; t < 100; t++)
    if (r.speech_mask[t]) sum += c.frames.row(t);
  CHECK((sum / r.NumSpeechFrames()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((ApplyCms(c).frames - c.frames).cwiseAbs().maxCoeff() <= 1e-10);

  FeatureMatrix none = Features(m);
  none.speech_mask = {0, 0};
  CHECK_KIND(ApplyCms(none), kNoSpeech);
}

TEST_CASE("apply_fmllr") {
  Rng rng(3);
  FeatureMatrix f = Features(oracle::RandomMatrix(&rng, 10, 4));
  f.speech_mask[3] = 0;
  FmllrTransform id{Matrix::Identity(4, 4), Vector::Zero(4)};
  CHECK(ApplyFmllr(f, id).frames == f.frames);

  FmllrTransform two{2.0 * Matrix::Identity(4, 4), Vector::Zero(4)};
  CHECK(ApplyFmllr(Features(Matrix::Ones(1, 4)), two).frames == 2.0 * Matrix::Ones(1, 4));

  FmllrTransform xf{oracle::RandomMatrix(&rng, 4, 4) + 3.0 * Matrix::Identity(4, 4),
                    rng.NormalVector(4)};
  FeatureMatrix g = ApplyFmllr(f, xf);
  CHECK(g.speech_mask == f.speech_mask);
  for (int t = 0; t < 10; t++)
    for (int i = 0; i < 4; i++) {
      double acc = xf.b(i);
      for (int j = 0; j < 4; j++) acc += xf.a(i, j) * f.frames(t, j);
      CHECK(std::abs(g.frames(t, i) - acc) <= 1e-12);
    }
  Matrix inv = xf.a.inverse();
  FmllrTransform back{inv, -inv * xf.b};
  CHECK((ApplyFmllr(g, back).frames - f.frames).cwiseAbs().maxCoeff() <= 1e-8);

  CHECK_KIND(ApplyFmllr(f, FmllrTransform{Matrix::Identity(3, 3), Vector::Zero(3)}),
             kShape);

  FmllrTransform parsed = ParseFmllr(FormatFmllr(xf), "rt");
  CHECK((parsed.a - xf.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((parsed.b - xf.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK_KIND(ParseFmllr("2\n1 2 0\n2 4 0\n", "singular"), kNumeric);
  CHECK_KIND(ParseFmllr("2\n1 0 0\n", "short"), kFormat);
}

TEST_CASE("SAD mask files") {
  MfccOptions mo;
  CHECK(ParseSadMask("1\n0\n1\n", 3, mo, "m") == std::vector<uint8_t>{1, 0, 1});
  CHECK_KIND(ParseSadMask("1\n0\n", 3, mo, "m"), kAlignment);
  CHECK_KIND(ParseSadMask("1\n2\n0\n", 3, mo, "m"), kFormat);
  // Frame centres at 12.5, 22.5, 32.5, 42.5 ms.
  CHECK(ParseSadMask("0.02 0.035\n", 4, mo, "s") == std::vector<uint8_t>{0, 1, 1, 0});
  CHECK_KIND(ParseSadMask("0.02 abc\n", 4, mo, "s"), kFormat);
}

TEST_CASE("feature archive round trip and determinism") {
  Rng rng(4);
  FeatureArchive a;
  a.fingerprint = 77;
  for (int i = 0; i < 3; i++) {
    FeatureRecord r;
    r.id = "rec" + std::to_string(i);
    r.pipeline = "mfcc+deltas,sad,drop,cms";
    r.features = Features(oracle::RandomMatrix(&rng, 20 + i, 39));
    r.features.speech_mask[1] = 0;
    a.records.push_back(r);
  }
  std::string bytes = EncodeFeatureArchive(a);
  FeatureArchive b = DecodeFeatureArchive(bytes, "rt");
  REQUIRE(b.records.size() == 3);
  CHECK(b.fingerprint == 77);
  CHECK(b.records[2].id == "rec2");
  CHECK(b.records[1].features.speech_mask == a.records[1].features.speech_mask);
  // Frames are stored as f32.
  CHECK((b.records[0].features.frames - a.records[0].features.frames).cwiseAbs().maxCoeff() <
        1e-5);
  CHECK(EncodeFeatureArchive(b) == bytes);
  CHECK(DecodeFeatureArchive(EncodeFeatureArchive(FeatureArchive{}), "e").records.empty());
  CHECK_KIND(DecodeFeatureArchive(bytes.substr(0, bytes.size() - 3), "t"), kFormat);
}
