#include "tabsynth/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

void check_aligned(const FrameSet& pred, const FrameSet& gt) {
  if (pred.n_frames != gt.n_frames || pred.hop != gt.hop || pred.sample_rate != gt.sample_rate) {
    throw AlignmentError("frame grids differ: pred " + std::to_string(pred.n_frames) + " frames (hop " +
                         std::to_string(pred.hop) + ", sr " + std::to_string(pred.sample_rate) + ") vs gt " +
                         std::to_string(gt.n_frames) + " frames (hop " + std::to_string(gt.hop) + ", sr " +
                         std::to_string(gt.sample_rate) + ")");
  }
}

// Multiset intersection size of two sorted ranges.
template <typename T>
std::size_t overlap(const std::vector<T>& a, const std::vector<T>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

template <typename T>
MatchCounts count(const std::vector<std::vector<T>>& pred, const std::vector<std::vector<T>>& gt) {
  MatchCounts c;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const std::size_t tp = overlap(pred[k], gt[k]);
    c.tp += tp;
    c.fp += pred[k].size() - tp;
    c.fn += gt[k].size() - tp;
  }
  return c;
}

}  // namespace

FrameSet frames_from_labels(const LabelTensor& labels, const Tuning& tuning) {
  FrameSet fs;
  fs.n_frames = labels.n_frames();
  fs.hop = labels.hop();
  fs.sample_rate = labels.sample_rate();
  fs.pitches.resize(fs.n_frames);
  fs.tabs.resize(fs.n_frames);
  for (std::size_t k = 0; k < fs.n_frames; ++k) {
    for (int s = 1; s <= kNumStrings; ++s) {
      const int cls = labels.at(s, k);
      if (cls == 0) continue;
      fs.pitches[k].push_back(tuning.open_midi(s) + cls - 1);
      fs.tabs[k].emplace_back(s, cls - 1);
    }
    std::sort(fs.pitches[k].begin(), fs.pitches[k].end());
    std::sort(fs.tabs[k].begin(), fs.tabs[k].end());
  }
  return fs;
}

PRF prf_from_counts(const MatchCounts& c) {
  PRF r;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) r.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) r.recall = tp / static_cast<double>(c.tp + c.fn);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MatchCounts multipitch_counts(const FrameSet& pred, const FrameSet& gt) {
  check_aligned(pred, gt);
  return count(pred.pitches, gt.pitches);
}

MatchCounts tablature_counts(const FrameSet& pred, const FrameSet& gt) {
  check_aligned(pred, gt);
  return count(pred.tabs, gt.tabs);
}

PRF multipitch_prf(const FrameSet& pred, const FrameSet& gt) { return prf_from_counts(multipitch_counts(pred, gt)); }

PRF tablature_prf(const FrameSet& pred, const FrameSet& gt) { return prf_from_counts(tablature_counts(pred, gt)); }

std::optional<double> tdr(const FrameSet& pred, const FrameSet& gt) {
  const auto pitch = multipitch_counts(pred, gt);
  if (pitch.tp == 0) return std::nullopt;
  return static_cast<double>(tablature_counts(pred, gt).tp) / static_cast<double>(pitch.tp);
}

MetricsReport evaluate(const FrameSet& pred, const FrameSet& gt) {
  MetricsReport r;
  r.pitch_counts = multipitch_counts(pred, gt);
  r.tab_counts = tablature_counts(pred, gt);
  r.multipitch = prf_from_counts(r.pitch_counts);
  r.tablature = prf_from_counts(r.tab_counts);
  if (r.pitch_counts.tp > 0) {
    r.tdr = static_cast<double>(r.tab_counts.tp) / static_cast<double>(r.pitch_counts.tp);
  }
  return r;
}

MetricsReport evaluate(const LabelTensor& pred, const LabelTensor& gt, const Tuning& tuning) {
  return evaluate(frames_from_labels(pred, tuning), frames_from_labels(gt, tuning));
}

}  // namespace tabsynth
