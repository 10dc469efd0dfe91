#include "tabsynth/tone_bank.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "sine_bank.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

using test::TempDir;

constexpr const char* kHeader = "id,relpath,string,fret,effect,source,sample_rate\n";

void tone(const TempDir& dir, const std::string& rel, double hz = 440.0) {
  std::filesystem::create_directories((dir / rel).parent_path());
  write_wav(test::sine(hz, 0.5, 22050.0), dir / rel);
}

TEST(ScanBank, DelayExcludedBeforeFileChecks) {
  TempDir dir;
  tone(dir, "a.wav");
  tone(dir, "b.wav");
  // c.wav is never written: excluded rows must not be opened.
  const std::string csv = std::string(kHeader) +
                          "a,a.wav,1,5,clean,x,22050\n"
                          "b,b.wav,1,5,Distortion,x,22050\n"
                          "c,c.wav,1,5,Delay,x,22050\n";
  const auto bank = scan_bank(csv, dir.path());
  ASSERT_EQ(bank.samples().size(), 2u);
  EXPECT_EQ(bank.samples()[1].effect_tag, "distortion");
  EXPECT_EQ(bank.by_position().at({1, 5}).size(), 2u);
  EXPECT_EQ(bank.find("c"), nullptr);
  EXPECT_EQ(bank.samples()[0].n_samples, 11025u);
}

TEST(ScanBank, EmptyManifestLeavesEveryPositionMissing) {
  const auto bank = scan_bank(kHeader, ".");
  EXPECT_TRUE(bank.samples().empty());
  EXPECT_EQ(bank.missing_positions().size(), 120u);
}

TEST(ScanBank, RowErrors) {
  TempDir dir;
  tone(dir, "a.wav");
  try {
    scan_bank(std::string(kHeader) + "a,a.wav,1,30,clean,x,22050\n", dir.path());
    FAIL();
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("30"), std::string::npos);
  }
  EXPECT_THROW(scan_bank(std::string(kHeader) + "a,a.wav,0,3,clean,x,22050\n", dir.path()), BoundsError);
  EXPECT_THROW(scan_bank(std::string(kHeader) + "a,a.wav,1,3,clean,x,4000\n", dir.path()), BoundsError);
  try {
    scan_bank(std::string(kHeader) + "m,missing.wav,1,3,clean,x,22050\n", dir.path());
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.wav"), std::string::npos);
  }
  EXPECT_THROW(scan_bank(std::string(kHeader) + "a,a.wav,1,3,clean,x,44100\n", dir.path()), FormatError);
  EXPECT_THROW(scan_bank(std::string(kHeader) + "a,a.wav,1,3,clean,x,22050\na,a.wav,2,3,clean,x,22050\n", dir.path()),
               ValidationError);
  EXPECT_THROW(scan_bank("id,relpath,string\n", dir.path()), ParseError);
  EXPECT_THROW(scan_bank(std::string(kHeader) + "a,a.wav,one,3,clean,x,22050\n", dir.path()), ParseError);
}

TEST(ScanBank, QuotedFieldsAndColumnOrder) {
  TempDir dir;
  tone(dir, "with, comma.wav");
  const auto bank = scan_bank(
      "fret,string,id,relpath,effect,source,sample_rate\n"
      "7,2,\"q\",\"with, comma.wav\",clean,\"say \"\"hi\"\"\",22050\n",
      dir.path());
  ASSERT_EQ(bank.samples().size(), 1u);
  EXPECT_EQ(bank.samples()[0].string, 2);
  EXPECT_EQ(bank.samples()[0].fret, 7);
  EXPECT_EQ(bank.samples()[0].source_tag, "say \"hi\"");
}

BankIndex synthetic_index(int candidates) {
  std::vector<ToneSample> samples;
  for (int i = 0; i < candidates; ++i) samples.push_back({"c" + std::to_string(i), "", 3, 4, "clean", "", 22050, 1});
  return BankIndex(samples, {}, kDefaultMaxFret);
}

TEST(SelectSample, SingletonAlwaysChosen) {
  const auto bank = synthetic_index(1);
  Rng rng(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_sample(bank, 3, 4, rng).id, "c0");
  EXPECT_THROW(select_sample(bank, 3, 5, rng), CoverageError);
}

TEST(SelectSample, UniformOverFourCandidates) {
  const auto bank = synthetic_index(4);
  Rng rng(12345);
  std::map<std::string, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[select_sample(bank, 3, 4, rng).id];
  ASSERT_EQ(counts.size(), 4u);
  const double sigma = std::sqrt(10000 * 0.25 * 0.75);
  for (const auto& [id, n] : counts) EXPECT_NEAR(n, 2500.0, 4.0 * sigma) << id;
}

TEST(SelectSample, DeterministicForSeed) {
  const auto bank = synthetic_index(7);
  Rng a(track_seed(42, "song")), b(track_seed(42, "song"));
  for (int i = 0; i < 200; ++i) EXPECT_EQ(select_sample(bank, 3, 4, a).id, select_sample(bank, 3, 4, b).id);
  EXPECT_NE(track_seed(42, "song"), track_seed(43, "song"));
  EXPECT_NE(track_seed(42, "song"), track_seed(42, "songs"));
}

TEST(MidiToHz, Reference) {
  EXPECT_DOUBLE_EQ(midi_to_hz(69), 440.0);
  EXPECT_NEAR(midi_to_hz(40), 82.4069, 1e-4);
  for (int m = 21; m < 108; ++m) EXPECT_NEAR(midi_to_hz(m + 12) / midi_to_hz(m), 2.0, 1e-12);
}

TEST(EstimateF0, SineAccuracy) {
  const auto a = estimate_f0(test::sine(440.0, 1.0, 22050.0));
  EXPECT_NEAR(a.f0_hz, 440.0, 0.5);
  EXPECT_GT(a.confidence, 0.95);
  EXPECT_TRUE(a.reliable());
  const auto e = estimate_f0(test::sine(82.41, 1.0, 22050.0));
  EXPECT_NEAR(e.f0_hz, 82.41, 1.0);
  for (int m = 40; m <= 83; ++m) {
    const double hz = midi_to_hz(m);
    const auto p = estimate_f0(test::sine(hz, 1.0, 22050.0));
    EXPECT_LT(std::abs(1200.0 * std::log2(p.f0_hz / hz)), 5.0) << m;
  }
}

TEST(EstimateF0, HarmonicToneKeepsFundamental) {
  auto a = test::sine(110.0, 1.0, 22050.0, 0.3);
  const auto h2 = test::sine(220.0, 1.0, 22050.0, 0.4);
  const auto h3 = test::sine(330.0, 1.0, 22050.0, 0.2);
  for (std::size_t i = 0; i < a.size(); ++i) a.samples[i] += h2.samples[i] + h3.samples[i];
  EXPECT_NEAR(estimate_f0(a).f0_hz, 110.0, 0.5);
}

TEST(EstimateF0, NoiseIsUnreliable) {
  AudioBuffer noise;
  std::mt19937 g(5);
  std::normal_distribution<float> n(0.0f, 0.3f);
  for (int i = 0; i < 22050; ++i) noise.samples.push_back(n(g));
  EXPECT_LT(estimate_f0(noise).confidence, 0.5);
  EXPECT_THROW(estimate_f0(AudioBuffer{std::vector<float>(1000, 0.0f), 22050.0}), ValidationError);
  EXPECT_FALSE(estimate_f0(AudioBuffer{std::vector<float>(10000, 0.0f), 22050.0}).reliable());
}

TEST(ValidateBank, AllPassThenMislabelled) {
  TempDir dir;
  test::SineBankSpec spec;
  spec.positions = {{1, 0}, {6, 0}, {3, 7}, {2, 19}};
  spec.seconds = 0.6;
  const auto good = scan_bank_file(test::make_sine_bank(dir / "good", spec), dir / "good");
  const auto report = validate_bank(good, Tuning::standard(), 50.0);
  EXPECT_EQ(report.samples.size(), 4u);
  EXPECT_EQ(report.failures(), 0u);
  EXPECT_EQ(report.missing.size(), 116u);
  EXPECT_FALSE(report.ok());
  for (const auto& s : report.samples) EXPECT_LT(std::abs(s.cents), 5.0) << s.id;

  spec.semitone_offset = 1;
  const auto sharp = scan_bank_file(test::make_sine_bank(dir / "sharp", spec), dir / "sharp");
  const auto bad = validate_bank(sharp, Tuning::standard(), 50.0);
  EXPECT_EQ(bad.failures(), 4u);
  for (const auto& s : bad.samples) EXPECT_NEAR(s.cents, 100.0, 5.0) << s.id;
}

TEST(ValidateBank, FullCoverage) {
  TempDir dir;
  test::SineBankSpec spec;
  spec.seconds = 0.5;
  const auto bank = scan_bank_file(test::make_sine_bank(dir.path(), spec), dir.path());
  const auto report = validate_bank(bank, Tuning::standard(), 50.0);
  EXPECT_TRUE(report.ok()) << report.failures();
  EXPECT_TRUE(bank.missing_positions().empty());
}

TEST(SampleStore, ResamplesToTarget) {
  TempDir dir;
  test::SineBankSpec spec;
  spec.positions = {{1, 0}, {2, 0}};
  spec.sample_rate = 44100.0;
  spec.seconds = 0.5;
  const auto bank = scan_bank_file(test::make_sine_bank(dir.path(), spec), dir.path());
  const SampleStore all(bank, 22050.0, 2);
  EXPECT_EQ(all.at("s1_f00_clean_0").size(), 11025u);
  EXPECT_EQ(all.at("s1_f00_clean_0").sample_rate, 22050.0);
  const SampleStore some(bank, 22050.0, std::set<Position>{{2, 0}});
  EXPECT_NO_THROW(some.at("s2_f00_clean_0"));
  EXPECT_THROW(some.at("s1_f00_clean_0"), ValidationError);
}

}  // namespace
}  // namespace tabsynth
