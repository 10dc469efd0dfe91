#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tabsynth/audio.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/tab_core.hpp"

namespace tabsynth {

struct Position {
  int string = 1;
  int fret = 0;
  auto operator<=>(const Position&) const = default;
};

struct ToneSample {
  std::string id;
  std::filesystem::path path;  // resolved against the audio root
  int string = 1;
  int fret = 0;
  std::string effect_tag;  // lower-cased
  std::string source_tag;
  int sample_rate = 0;
  std::size_t n_samples = 0;
};

/// Catalog of single-note recordings. Immutable once built; samples are
/// sorted by id and every candidate list keeps that order.
class BankIndex {
 public:
  BankIndex() = default;
  BankIndex(std::vector<ToneSample> samples, std::set<std::string> excluded_effects, int max_fret);

  const std::vector<ToneSample>& samples() const noexcept { return samples_; }
  const std::map<Position, std::vector<std::size_t>>& by_position() const noexcept { return by_position_; }
  const std::set<std::string>& excluded_effects() const noexcept { return excluded_; }
  int max_fret() const noexcept { return max_fret_; }

  bool covers(Position p) const { return by_position_.count(p) != 0; }
  std::vector<Position> missing_positions() const;
  const ToneSample* find(std::string_view id) const;

 private:
  std::vector<ToneSample> samples_;
  std::map<Position, std::vector<std::size_t>> by_position_;
  std::set<std::string> excluded_;
  int max_fret_ = kDefaultMaxFret;
};

inline const std::set<std::string>& default_excluded_effects() {
  static const std::set<std::string> kDefault{"delay"};
  return kDefault;
}

/// Reads a bank manifest (CSV `id,relpath,string,fret,effect,source,sample_rate`)
/// and checks each non-excluded row's WAV header.
BankIndex scan_bank(std::string_view manifest_csv, const std::filesystem::path& audio_root,
                    const std::set<std::string>& excluded_effects = default_excluded_effects(),
                    int max_fret = kDefaultMaxFret);
BankIndex scan_bank_file(const std::filesystem::path& manifest_path, const std::filesystem::path& audio_root,
                         const std::set<std::string>& excluded_effects = default_excluded_effects(),
                         int max_fret = kDefaultMaxFret);

/// Uniform choice among the candidates at (string, fret). Consumes exactly
/// one draw-sequence from `rng` per call.
const ToneSample& select_sample(const BankIndex& index, int string, int fret, Rng& rng);

/// A440 equal temperament.
double midi_to_hz(double midi);

struct PitchEstimate {
  double f0_hz = 0.0;
  double confidence = 0.0;  // peak normalized autocorrelation, clamped to [0, 1]
  bool reliable() const noexcept { return confidence >= 0.5; }
};

struct F0Options {
  double min_hz = 50.0;
  double max_hz = 2000.0;
  std::size_t window = 8192;  // analysis length, centered in the buffer
};

/// Fundamental frequency of the dominant periodic component.
PitchEstimate estimate_f0(const AudioBuffer& audio, const F0Options& opts = {});

struct SampleCheck {
  std::string id;
  Position position;
  int expected_midi = 0;
  double f0_hz = 0.0;
  double confidence = 0.0;
  double cents = 0.0;
  bool pass = false;
  std::optional<std::string> error;
};

struct BankReport {
  std::vector<SampleCheck> samples;
  std::vector<Position> missing;
  std::size_t failures() const;
  bool ok() const { return failures() == 0 && missing.empty(); }
};

BankReport validate_bank(const BankIndex& index, const Tuning& tuning, double tolerance_cents);

/// Bank audio decoded and converted to one sample rate, keyed by sample id.
/// Immutable after construction, so one store can back concurrent renders.
class SampleStore {
 public:
  SampleStore(const BankIndex& index, double target_rate, unsigned jobs = 1);
  /// Only the samples that can be drawn for `positions`.
  SampleStore(const BankIndex& index, double target_rate, const std::set<Position>& positions, unsigned jobs = 1);

  const AudioBuffer& at(const std::string& id) const;
  double sample_rate() const noexcept { return rate_; }

 private:
  void load(const BankIndex& index, const std::vector<std::size_t>& which, unsigned jobs);

  double rate_;
  std::unordered_map<std::string, AudioBuffer> audio_;
};

}  // namespace tabsynth
