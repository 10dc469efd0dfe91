#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tabsynth/renderer.hpp"

namespace tabsynth {

struct NoteSegment {
  int string = 1;
  int fret = 0;
  double start = 0.0;  // seconds
  double end = 0.0;
  friend bool operator==(const NoteSegment&, const NoteSegment&) = default;
};

/// Maximal runs of one fret class on one string.
std::vector<NoteSegment> segments_from_labels(const LabelTensor& labels);

struct PlotOptions {
  double width = 960.0;  // fixed, independent of the window length
  double row_height = 22.0;
  std::string gt_title = "ground truth";
  std::string pred_title = "prediction";
};

/// Two-panel SVG 1.1 comparison over [t0, t1): ground truth on top,
/// prediction below, shared linear time axis. Each note is a bar on its
/// string row with its fret number circled at the onset.
std::string plot_comparison(const LabelTensor& pred, const LabelTensor& gt, double t0, double t1,
                            const std::vector<double>& beat_times = {}, const PlotOptions& opts = {});

}  // namespace tabsynth
