// src/frontend.cc

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

#include "ivnda/frontend.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <sstream>

#include "ivnda/binary-io.h"

namespace ivnda {

int FeatureMatrix::NumSpeechFrames() const {
  int n = 0;
  for (uint8_t m : speech_mask) n += (m != 0);
  return n;
}

Matrix FeatureMatrix::SpeechFrames() const {
  Matrix out(NumSpeechFrames(), Dim());
  int r = 0;
  for (int t = 0; t < NumFrames(); t++)
    if (speech_mask[t]) out.row(r++) = frames.row(t);
  return out;
}

// ---------------------------------------------------------------- WAV

namespace {

uint32_t Le32(const std::string &b, size_t pos) {
  uint32_t v;
  std::memcpy(&v, b.data() + pos, 4);
  return v;
}

uint16_t Le16(const std::string &b, size_t pos) {
  uint16_t v;
  std::memcpy(&v, b.data() + pos, 2);
  return v;
}

}  // namespace

AudioSignal ParseWav(const std::string &bytes, const std::string &what) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0)
    Fail(ErrorKind::kFormat, what, ": not a RIFF/WAVE file");
  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string id = bytes.substr(pos, 4);
    uint32_t size = Le32(bytes, pos + 4);
    size_t body = pos + 8;
    if (body + size > bytes.size())
      Fail(ErrorKind::kFormat, what, ": chunk '", id, "' overruns file");
    if (id == "fmt ") {
      if (size < 16) Fail(ErrorKind::kFormat, what, ": short fmt chunk");
      format = Le16(bytes, body);
      channels = Le16(bytes, body + 2);
      rate = Le32(bytes, body + 4);
      bits = Le16(bytes, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(ErrorKind::kFormat, what, ": data before fmt chunk");
      if (format != 1 || bits != 16)
        Fail(ErrorKind::kUnsupportedFormat, what,
             ": only 16-bit PCM is supported (format ", format, ", ", bits,
             " bits)");
      if (channels != 1)
        Fail(ErrorKind::kUnsupportedFormat, what, ": ", channels,
             " channels, expected mono");
      if (rate != 8000 && rate != 16000)
        Fail(ErrorKind::kUnsupportedFormat, what, ": sample rate ", rate,
             " Hz, expected 8000 or 16000");
      if (size % 2 != 0) Fail(ErrorKind::kFormat, what, ": odd data size");
      if (size == 0) Fail(ErrorKind::kEmptyInput, what, ": no samples");
      AudioSignal sig;
      sig.sample_rate_hz = static_cast<int>(rate);
      sig.samples.resize(size / 2);
      for (size_t i = 0; i < sig.samples.size(); i++) {
        int16_t s;
        std::memcpy(&s, bytes.data() + body + 2 * i, 2);
        sig.samples[i] = s / 32768.0;
      }
      return sig;
    }
    pos = body + size + (size & 1);
  }
  Fail(ErrorKind::kFormat, what, ": no data chunk");
}

AudioSignal ReadWav(const std::string &path) {
  return ParseWav(ReadFileBytes(path), path);
}

std::string EncodeWav(const AudioSignal &signal) {
  uint32_t data_size = static_cast<uint32_t>(signal.samples.size() * 2);
  BinaryWriter w;
  w.Magic("RIFF");
  w.U32(36 + data_size);
  w.Magic("WAVE");
  w.Magic("fmt ");
  w.U32(16);
  std::string fmt(4, '\0');
  uint16_t pcm = 1, mono = 1, block = 2, bits = 16;
  std::memcpy(&fmt[0], &pcm, 2);
  std::memcpy(&fmt[2], &mono, 2);
  w.Bytes(fmt);
  w.U32(static_cast<uint32_t>(signal.sample_rate_hz));
  w.U32(static_cast<uint32_t>(signal.sample_rate_hz) * 2);
  std::string tail(4, '\0');
  std::memcpy(&tail[0], &block, 2);
  std::memcpy(&tail[2], &bits, 2);
  w.Bytes(tail);
  w.Magic("data");
  w.U32(data_size);
  std::string pcm_bytes(data_size, '\0');
  for (size_t i = 0; i < signal.samples.size(); i++) {
    double v = std::round(signal.samples[i] * 32768.0);
    int16_t s = static_cast<int16_t>(std::clamp(v, -32768.0, 32767.0));
    std::memcpy(&pcm_bytes[2 * i], &s, 2);
  }
  w.Bytes(pcm_bytes);
  return w.buffer();
}

void WriteWav(const std::string &path, const AudioSignal &signal) {
  WriteFileAtomic(path, EncodeWav(signal));
}

// ---------------------------------------------------------------- MFCC

namespace {

int FrameLength(int rate, const MfccOptions &o) {
  return static_cast<int>(std::lround(rate * o.frame_length_ms / 1000.0));
}

int FrameShift(int rate, const MfccOptions &o) {
  return static_cast<int>(std::lround(rate * o.frame_shift_ms / 1000.0));
}

// In-place iterative radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>> *data) {
  auto &a = *data;
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; i++) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; k++) {
        std::complex<double> w(std::cos(ang * k), std::sin(ang * k));
        std::complex<double> u = a[i + k], v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

double MelScale(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }

// num_bins x (fft_size/2 + 1) triangular weights, triangles in mel space.
Matrix MelBanks(int num_bins, int fft_size, int rate, double low_hz,
                double high_hz) {
  int num_fft_bins = fft_size / 2 + 1;
  double mel_low = MelScale(low_hz), mel_high = MelScale(high_hz);
  double delta = (mel_high - mel_low) / (num_bins + 1);
  Matrix banks = Matrix::Zero(num_bins, num_fft_bins);
  for (int b = 0; b < num_bins; b++) {
    double left = mel_low + b * delta, center = left + delta,
           right = center + delta;
    for (int i = 0; i < num_fft_bins; i++) {
      double mel = MelScale(static_cast<double>(i) * rate / fft_size);
      if (mel > left && mel < right) {
        banks(b, i) = mel <= center ? (mel - left) / (center - left)
                                    : (right - mel) / (right - center);
      }
    }
  }
  return banks;
}

// Orthonormal DCT-II rows.
Matrix DctMatrix(int num_ceps, int num_bins) {
  Matrix dct(num_ceps, num_bins);
  for (int k = 0; k < num_ceps; k++) {
    double scale = k == 0 ? std::sqrt(1.0 / num_bins) : std::sqrt(2.0 / num_bins);
    for (int m = 0; m < num_bins; m++)
      dct(k, m) = scale * std::cos(M_PI * k * (m + 0.5) / num_bins);
  }
  return dct;
}

}  // namespace

int NumFrames(int num_samples, int sample_rate_hz, const MfccOptions &opts) {
  int len = FrameLength(sample_rate_hz, opts),
      shift = FrameShift(sample_rate_hz, opts);
  if (num_samples < len) return 0;
  return (num_samples - len) / shift + 1;
}

FeatureMatrix ComputeMfcc(const AudioSignal &signal, const MfccOptions &opts) {
  const int rate = signal.sample_rate_hz;
  const int len = FrameLength(rate, opts), shift = FrameShift(rate, opts);
  const int num_frames =
      NumFrames(static_cast<int>(signal.samples.size()), rate, opts);
  if (num_frames == 0)
    Fail(ErrorKind::kEmptyInput, "signal of ", signal.samples.size(),
         " samples is shorter than one ", opts.frame_length_ms, " ms frame");
  int fft_size = opts.fft_size > 0 ? opts.fft_size : (rate <= 8000 ? 512 : 1024);
  if (fft_size < len || (fft_size & (fft_size - 1)) != 0)
    Fail(ErrorKind::kUsage, "fft size ", fft_size,
         " must be a power of two no smaller than the frame length ", len);
  double high = opts.high_freq_hz > 0 ? opts.high_freq_hz : rate / 2.0;
  Matrix banks = MelBanks(opts.num_mel_bins, fft_size, rate, opts.low_freq_hz,
                          high);
  Matrix dct = DctMatrix(opts.num_ceps, opts.num_mel_bins);
  std::vector<double> window(len);
  for (int i = 0; i < len; i++)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (len - 1));

  FeatureMatrix out;
  out.frame_shift_ms = opts.frame_shift_ms;
  out.frames.resize(num_frames, opts.num_ceps);
  out.speech_mask.assign(num_frames, 1);
  std::vector<double> frame(len);
  std::vector<std::complex<double>> spectrum(fft_size);
  Vector power(fft_size / 2 + 1);
  for (int t = 0; t < num_frames; t++) {
    const double *src = signal.samples.data() + static_cast<size_t>(t) * shift;
    std::copy(src, src + len, frame.begin());
    for (int i = len - 1; i > 0; i--) frame[i] -= opts.preemph * frame[i - 1];
    frame[0] -= opts.preemph * frame[0];
    std::fill(spectrum.begin(), spectrum.end(), 0.0);
    for (int i = 0; i < len; i++) spectrum[i] = frame[i] * window[i];
    Fft(&spectrum);
    for (int i = 0; i <= fft_size / 2; i++) power(i) = std::norm(spectrum[i]);
    Vector energies = banks * power;
    for (int b = 0; b < energies.size(); b++)
      energies(b) = std::log(std::max(energies(b), opts.log_floor));
    out.frames.row(t) = (dct * energies).transpose();
  }
  return out;
}

FeatureMatrix AppendDeltas(const FeatureMatrix &features) {
  const int num_frames = features.NumFrames(), dim = features.Dim();
  if (num_frames < 5)
    Fail(ErrorKind::kInsufficientData, "deltas need at least 5 frames, got ",
         num_frames);
  auto delta = [num_frames](const Matrix &in) {
    Matrix d(in.rows(), in.cols());
    auto row = [&](int t) { return in.row(std::clamp(t, 0, num_frames - 1)); };
    for (int t = 0; t < num_frames; t++)
      d.row(t) = (row(t + 1) - row(t - 1) + 2.0 * (row(t + 2) - row(t - 2))) /
                 10.0;
    return d;
  };
  Matrix d1 = delta(features.frames);
  Matrix d2 = delta(d1);
  FeatureMatrix out;
  out.frame_shift_ms = features.frame_shift_ms;
  out.speech_mask = features.speech_mask;
  out.frames.resize(num_frames, 3 * dim);
  out.frames << features.frames, d1, d2;
  return out;
}

// ---------------------------------------------------------------- SAD

std::vector<uint8_t> DetectSpeech(const AudioSignal &signal,
                                  const MfccOptions &mfcc_opts,
                                  const SadOptions &sad) {
  const int rate = signal.sample_rate_hz;
  const int len = FrameLength(rate, mfcc_opts),
            shift = FrameShift(rate, mfcc_opts);
  const int num_frames =
      NumFrames(static_cast<int>(signal.samples.size()), rate, mfcc_opts);
  std::vector<uint8_t> mask(num_frames, 0);
  if (num_frames == 0) return mask;

  std::vector<double> energy_db(num_frames), zcr(num_frames);
  for (int t = 0; t < num_frames; t++) {
    const double *x = signal.samples.data() + static_cast<size_t>(t) * shift;
    double sumsq = 0.0;
    int crossings = 0;
    for (int i = 0; i < len; i++) {
      sumsq += x[i] * x[i];
      if (i > 0 && ((x[i] >= 0.0) != (x[i - 1] >= 0.0))) crossings++;
    }
    energy_db[t] = 10.0 * std::log10(sumsq / len + 1e-12);
    zcr[t] = static_cast<double>(crossings) / (len - 1);
  }
  std::vector<double> sorted = energy_db;
  std::sort(sorted.begin(), sorted.end());
  auto percentile = [&](double p) {
    size_t idx = static_cast<size_t>(std::floor(p / 100.0 * (num_frames - 1)));
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  double noise = percentile(sad.noise_percentile),
         speech = percentile(sad.speech_percentile);
  double threshold = std::min(noise + sad.threshold_fraction * (speech - noise),
                              speech - sad.speech_margin_db);
  threshold = std::max(threshold, sad.abs_floor_db);

  std::vector<uint8_t> raw(num_frames);
  for (int t = 0; t < num_frames; t++) {
    bool loud = energy_db[t] > threshold;
    bool voiced_like = zcr[t] <= sad.zcr_max ||
                       energy_db[t] > threshold + sad.zcr_energy_margin_db;
    raw[t] = loud && voiced_like;
  }
  // Majority vote over a centered window with edge replication.
  const int half = sad.smoothing_window / 2;
  for (int t = 0; t < num_frames; t++) {
    int votes = 0;
    for (int k = -half; k <= half; k++)
      votes += raw[std::clamp(t + k, 0, num_frames - 1)];
    mask[t] = 2 * votes > 2 * half + 1;
  }
  return mask;
}

// ---------------------------------------------------------------- CMS, fMLLR

FeatureMatrix ApplyCms(const FeatureMatrix &features) {
  int n = features.NumSpeechFrames();
  if (n == 0) Fail(ErrorKind::kNoSpeech, "no speech frames for CMS");
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features.Dim());
  for (int t = 0; t < features.NumFrames(); t++)
    if (features.speech_mask[t]) mean += features.frames.row(t);
  mean /= n;
  // Non-speech rows keep their values; they are dropped downstream.
  FeatureMatrix out = features;
  for (int t = 0; t < out.NumFrames(); t++)
    if (out.speech_mask[t]) out.frames.row(t) -= mean;
  return out;
}

FeatureMatrix ApplyFmllr(const FeatureMatrix &features,
                         const FmllrTransform &xf) {
  if (xf.a.rows() != features.Dim() || xf.a.cols() != features.Dim() ||
      xf.b.size() != features.Dim())
    Fail(ErrorKind::kShape, "fMLLR transform of dimension ", xf.a.rows(),
         " does not match feature dimension ", features.Dim());
  FeatureMatrix out = features;
  out.frames = (features.frames * xf.a.transpose()).rowwise() +
               xf.b.transpose();
  return out;
}

FmllrTransform ParseFmllr(const std::string &text, const std::string &what) {
  std::istringstream is(text);
  int dim = 0;
  if (!(is >> dim) || dim <= 0)
    Fail(ErrorKind::kFormat, what, ": expected a positive dimension");
  FmllrTransform xf;
  xf.a.resize(dim, dim);
  xf.b.resize(dim);
  for (int r = 0; r < dim; r++) {
    for (int c = 0; c <= dim; c++) {
      double v;
      if (!(is >> v))
        Fail(ErrorKind::kFormat, what, ": expected ", dim + 1,
             " values on row ", r + 1);
      if (c < dim) xf.a(r, c) = v; else xf.b(r) = v;
    }
  }
  std::string extra;
  if (is >> extra) Fail(ErrorKind::kFormat, what, ": trailing data");
  double det = xf.a.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12)
    Fail(ErrorKind::kNumeric, what, ": transform matrix is singular");
  return xf;
}

FmllrTransform ReadFmllr(const std::string &path) {
  return ParseFmllr(ReadFileText(path), path);
}

std::string FormatFmllr(const FmllrTransform &xf) {
  std::ostringstream os;
  os << xf.a.rows() << '\n';
  for (int r = 0; r < xf.a.rows(); r++) {
    for (int c = 0; c < xf.a.cols(); c++) os << FormatDouble(xf.a(r, c)) << ' ';
    os << FormatDouble(xf.b(r)) << '\n';
  }
  return os.str();
}

std::vector<uint8_t> ParseSadMask(const std::string &text, int num_frames,
                                  const MfccOptions &opts,
                                  const std::string &what) {
  std::vector<std::vector<std::string>> lines;
  std::istringstream is(text);
  std::string line;
  bool segments = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<std::string> toks;
    for (std::string tok; ls >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() > 2)
      Fail(ErrorKind::kFormat, what, ": malformed line '", line, "'");
    segments |= toks.size() == 2;
    lines.push_back(std::move(toks));
  }
  std::vector<uint8_t> mask;
  if (!segments) {
    for (const auto &toks : lines) {
      if (toks[0] != "0" && toks[0] != "1")
        Fail(ErrorKind::kFormat, what, ": expected 0 or 1, got '", toks[0],
             "'");
      mask.push_back(toks[0] == "1");
    }
    if (static_cast<int>(mask.size()) != num_frames)
      Fail(ErrorKind::kAlignment, what, ": mask has ", mask.size(),
           " frames, recording has ", num_frames);
    return mask;
  }
  mask.assign(num_frames, 0);
  const double shift_s = opts.frame_shift_ms / 1000.0,
               half_len_s = opts.frame_length_ms / 2000.0;
  for (const auto &toks : lines) {
    if (toks.size() != 2)
      Fail(ErrorKind::kFormat, what, ": mixed frame and segment lines");
    double start = -1.0, end = -1.0;
    try {
      start = std::stod(toks[0]);
      end = std::stod(toks[1]);
    } catch (const std::logic_error &) {
      Fail(ErrorKind::kFormat, what, ": bad segment ", toks[0], ' ', toks[1]);
    }
    if (!(end >= start) || start < 0)
      Fail(ErrorKind::kFormat, what, ": bad segment ", toks[0], ' ', toks[1]);
    for (int t = 0; t < num_frames; t++) {
      double center = t * shift_s + half_len_s;
      if (center >= start && center < end) mask[t] = 1;
    }
  }
  return mask;
}

std::vector<uint8_t> ReadSadMask(const std::string &path, int num_frames,
                                 const MfccOptions &opts) {
  return ParseSadMask(ReadFileText(path), num_frames, opts, path);
}

}  // namespace ivnda
