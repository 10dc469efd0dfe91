#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabsynth/audio.hpp"
#include "tabsynth/tab_core.hpp"
#include "tabsynth/tone_bank.hpp"

namespace tabsynth {

struct RenderConfig {
  double target_sample_rate = 22050.0;
  int hop = 512;
  double fade_out_ms = 10.0;
  double normalization_peak = 0.891;  // -1 dBFS
  int max_fret = kDefaultMaxFret;
  std::uint64_t master_seed = 0;

  void validate() const;
};

/// Frame-aligned per-string classes: 0 = silent, f + 1 = fret f sounding.
class LabelTensor {
 public:
  LabelTensor() = default;
  LabelTensor(std::size_t n_frames, int hop, double sample_rate, int max_fret = kDefaultMaxFret);

  std::size_t n_frames() const noexcept { return n_frames_; }
  int hop() const noexcept { return hop_; }
  double sample_rate() const noexcept { return sample_rate_; }
  int max_fret() const noexcept { return max_fret_; }

  /// string in 1..6
  int at(int string, std::size_t frame) const { return classes_[index(string, frame)]; }
  void set(int string, std::size_t frame, int cls);

  /// Start time of a frame in seconds.
  double frame_time(std::size_t frame) const {
    return static_cast<double>(frame * static_cast<std::size_t>(hop_)) / sample_rate_;
  }
  bool same_grid(const LabelTensor& other) const {
    return n_frames_ == other.n_frames_ && hop_ == other.hop_ && sample_rate_ == other.sample_rate_;
  }

  friend bool operator==(const LabelTensor&, const LabelTensor&) = default;

 private:
  std::size_t index(int string, std::size_t frame) const;

  std::size_t n_frames_ = 0;
  int hop_ = 512;
  double sample_rate_ = 22050.0;
  int max_fret_ = kDefaultMaxFret;
  std::vector<int> classes_;  // string-major
};

inline std::size_t frames_for_samples(std::size_t n_samples, int hop) {
  return (n_samples + static_cast<std::size_t>(hop) - 1) / static_cast<std::size_t>(hop);
}

/// Marks string s at frame k with fret + 1 iff onset <= k*hop/rate < onset + duration.
LabelTensor make_frame_labels(const Tablature& tab, std::size_t n_frames, const RenderConfig& cfg);

struct RenderRecord {
  std::size_t event_index = 0;
  std::string sample_id;
  std::size_t onset_sample = 0;
  std::size_t rendered_length = 0;
  friend bool operator==(const RenderRecord&, const RenderRecord&) = default;
};

struct RenderLog {
  std::vector<RenderRecord> records;
  std::vector<std::string> warnings;
  double gain = 1.0;  // applied by peak normalization
  friend bool operator==(const RenderLog&, const RenderLog&) = default;
};

struct Rendered {
  AudioBuffer audio;
  LabelTensor labels;
  RenderLog log;
};

/// Renders a tablature with randomly selected bank tones. With `store` null,
/// the chosen samples are read from disk as needed.
Rendered render_performance(const Tablature& tab, const BankIndex& bank, const RenderConfig& cfg,
                            std::uint64_t track_seed, const SampleStore* store = nullptr);

/// Label CSV: optional `# hop=<int> sr=<int> max_fret=<int>` line, then
/// `frame,string_1,...,string_6` and one row per frame.
std::string serialize_labels(const LabelTensor& labels, bool grid_header = true);

struct GridDefaults {
  int hop = 512;
  double sample_rate = 22050.0;
  int max_fret = kDefaultMaxFret;
};

struct ParsedLabels {
  LabelTensor labels;
  bool had_grid_header = false;
};

ParsedLabels parse_labels(std::string_view csv, const GridDefaults& defaults = {});
ParsedLabels read_labels(const std::filesystem::path& path, const GridDefaults& defaults = {});
void write_labels(const LabelTensor& labels, const std::filesystem::path& path, bool grid_header = true);

std::string serialize_render_log(const RenderLog& log);

}  // namespace tabsynth
