#include "tabsynth/audio.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

#include "sine_bank.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

using test::TempDir;

void put16(std::vector<std::uint8_t>& b, int v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xFF));
  b.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}
void put32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> header(int format, int channels, int rate, int bits, std::uint32_t data_bytes) {
  std::vector<std::uint8_t> b{'R', 'I', 'F', 'F'};
  put32(b, 36 + data_bytes);
  for (char c : std::string("WAVEfmt ")) b.push_back(static_cast<std::uint8_t>(c));
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, static_cast<std::uint32_t>(rate));
  put32(b, static_cast<std::uint32_t>(rate * channels * bits / 8));
  put16(b, channels * bits / 8);
  put16(b, bits);
  for (char c : std::string("data")) b.push_back(static_cast<std::uint8_t>(c));
  put32(b, data_bytes);
  return b;
}

TEST(Wav, RoundTripWithinQuantizationStep) {
  TempDir dir;
  const auto tone = test::sine(440.0, 1.0, 22050.0, 0.9);
  write_wav(tone, dir / "a.wav");
  const auto back = read_wav(dir / "a.wav");
  ASSERT_EQ(back.size(), tone.size());
  EXPECT_EQ(back.sample_rate, 22050.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < tone.size(); ++i) worst = std::max(worst, std::abs(double(back.samples[i]) - tone.samples[i]));
  EXPECT_LE(worst, std::ldexp(1.0, -15));

  // Second generation is sample-exact.
  write_wav(back, dir / "b.wav");
  EXPECT_EQ(read_wav(dir / "b.wav").samples, back.samples);
  EXPECT_EQ(test::read_file(dir / "a.wav"), test::read_file(dir / "b.wav"));
}

TEST(Wav, ClipsBeforeQuantization) {
  AudioBuffer a;
  a.samples = {2.0f, -3.0f, 1.0f, -1.0f, 0.5f};
  const auto back = decode_wav(encode_wav(a));
  EXPECT_FLOAT_EQ(back.samples[0], 32767.0f / 32768.0f);
  EXPECT_FLOAT_EQ(back.samples[1], -1.0f);
  EXPECT_FLOAT_EQ(back.samples[2], 32767.0f / 32768.0f);
  EXPECT_FLOAT_EQ(back.samples[3], -1.0f);
  EXPECT_FLOAT_EQ(back.samples[4], 0.5f);
}

TEST(Wav, TruncatedFileIsFormatError) {
  TempDir dir;
  auto bytes = encode_wav(test::sine(440.0, 0.1, 22050.0));
  bytes.resize(bytes.size() / 2);
  test::write_file(dir / "t.wav", std::string(bytes.begin(), bytes.end()));
  EXPECT_THROW(read_wav(dir / "t.wav"), FormatError);
  EXPECT_THROW(read_wav_info(dir / "t.wav"), FormatError);
  bytes.resize(20);
  EXPECT_THROW(decode_wav(bytes), FormatError);
  EXPECT_THROW(decode_wav({'R', 'I', 'F', 'X'}), FormatError);
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
}

TEST(Wav, StereoDownmixAndFloatAnd24Bit) {
  auto stereo = header(1, 2, 48000, 16, 8);
  put16(stereo, 16384);
  put16(stereo, 0);
  put16(stereo, -16384);
  put16(stereo, -16384);
  const auto a = decode_wav(stereo);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_FLOAT_EQ(a.samples[0], 0.25f);
  EXPECT_FLOAT_EQ(a.samples[1], -0.5f);
  EXPECT_EQ(a.sample_rate, 48000.0);

  auto fl = header(3, 1, 44100, 32, 8);
  for (float f : {0.75f, -0.125f}) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put32(fl, u);
  }
  const auto b = decode_wav(fl);
  EXPECT_FLOAT_EQ(b.samples[0], 0.75f);
  EXPECT_FLOAT_EQ(b.samples[1], -0.125f);

  auto p24 = header(1, 1, 48000, 24, 6);
  for (int v : {0x400000, -0x200000}) {
    p24.push_back(static_cast<std::uint8_t>(v & 0xFF));
    p24.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    p24.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  }
  const auto c = decode_wav(p24);
  EXPECT_FLOAT_EQ(c.samples[0], 0.5f);
  EXPECT_FLOAT_EQ(c.samples[1], -0.25f);

  EXPECT_THROW(decode_wav(header(2, 1, 48000, 16, 0)), FormatError);  // ADPCM
}

double snr_db(const AudioBuffer& out, double hz, double lo_frac, double hi_frac) {
  const auto lo = static_cast<std::size_t>(lo_frac * out.size());
  const auto hi = static_cast<std::size_t>(hi_frac * out.size());
  double sig = 0.0;
  double err = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double ref = 0.5 * std::sin(2.0 * std::numbers::pi * hz * i / out.sample_rate);
    sig += ref * ref;
    err += (out.samples[i] - ref) * (out.samples[i] - ref);
  }
  return 10.0 * std::log10(sig / err);
}

// Hann-windowed DTFT magnitude at an arbitrary frequency.
double dtft_mag(const AudioBuffer& a, double hz) {
  std::complex<double> acc;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    acc += w * a.samples[i] * std::polar(1.0, -2.0 * std::numbers::pi * hz * i / a.sample_rate);
  }
  return std::abs(acc);
}

TEST(Resample, SineDownsampleQuality) {
  const auto in = test::sine(1000.0, 1.0, 48000.0, 0.5);
  const auto out = resample(in, 22050.0);
  EXPECT_EQ(out.size(), 22050u);
  EXPECT_EQ(out.sample_rate, 22050.0);
  EXPECT_GT(snr_db(out, 1000.0, 0.1, 0.9), 60.0);

  double best_hz = 0.0;
  double best = 0.0;
  for (double hz = 100.0; hz < 11000.0; hz += 50.0) {
    if (const double m = dtft_mag(out, hz); m > best) best = m, best_hz = hz;
  }
  for (double hz = best_hz - 50.0; hz <= best_hz + 50.0; hz += 0.25) {
    if (const double m = dtft_mag(out, hz); m > best) best = m, best_hz = hz;
  }
  EXPECT_NEAR(best_hz, 1000.0, 1.0);
}

TEST(Resample, UpsampleAndNonIntegerRates) {
  const auto up = resample(test::sine(440.0, 0.5, 22050.0, 0.5), 48000.0);
  EXPECT_EQ(up.size(), 24000u);
  EXPECT_GT(snr_db(up, 440.0, 0.1, 0.9), 60.0);

  auto odd = test::sine(300.0, 0.5, 44100.5, 0.5);
  const auto o = resample(odd, 22050.0);
  EXPECT_EQ(o.size(), static_cast<std::size_t>(std::llround(odd.size() * 22050.0 / 44100.5)));
}

TEST(Resample, PreservesDcEverywhere) {
  AudioBuffer dc;
  dc.sample_rate = 48000.0;
  dc.samples.assign(10000, 0.5f);
  for (double rate : {22050.0, 44100.0, 96000.0, 16000.0}) {
    const auto out = resample(dc, rate);
    for (float v : out.samples) ASSERT_NEAR(v, 0.5, 1e-3) << rate;
  }
}

TEST(Resample, SameRateIsBitIdentical) {
  auto a = test::sine(123.0, 0.3, 22050.0);
  a.samples[7] = 0.123456789f;
  const auto b = resample(a, 22050.0);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.sample_rate, b.sample_rate);
  EXPECT_THROW(resample(a, 0.0), ValidationError);
  EXPECT_TRUE(resample(AudioBuffer{{}, 48000.0}, 22050.0).samples.empty());
}

}  // namespace
}  // namespace tabsynth
