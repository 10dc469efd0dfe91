#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "tabsynth/renderer.hpp"
#include "tabsynth/tab_core.hpp"

namespace tabsynth {

using StringFret = std::pair<int, int>;

/// Per-frame multisets of sounding pitches and (string, fret) pairs, each
/// kept sorted.
struct FrameSet {
  std::vector<std::vector<int>> pitches;
  std::vector<std::vector<StringFret>> tabs;
  std::size_t n_frames = 0;
  int hop = 512;
  double sample_rate = 22050.0;
};

FrameSet frames_from_labels(const LabelTensor& labels, const Tuning& tuning = Tuning::standard());

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Zero denominators yield 0 for the affected rate.
PRF prf_from_counts(const MatchCounts& c);

MatchCounts multipitch_counts(const FrameSet& pred, const FrameSet& gt);
MatchCounts tablature_counts(const FrameSet& pred, const FrameSet& gt);

PRF multipitch_prf(const FrameSet& pred, const FrameSet& gt);
PRF tablature_prf(const FrameSet& pred, const FrameSet& gt);

/// Fraction of pitch matches that also match string and fret; empty when
/// there are no pitch matches.
std::optional<double> tdr(const FrameSet& pred, const FrameSet& gt);

struct MetricsReport {
  PRF multipitch;
  PRF tablature;
  std::optional<double> tdr;
  MatchCounts pitch_counts;
  MatchCounts tab_counts;
};

MetricsReport evaluate(const FrameSet& pred, const FrameSet& gt);
MetricsReport evaluate(const LabelTensor& pred, const LabelTensor& gt, const Tuning& tuning = Tuning::standard());

}  // namespace tabsynth
