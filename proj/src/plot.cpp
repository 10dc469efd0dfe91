#include "tabsynth/plot.hpp"

#include <algorithm>
#include <cstdio>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Panel {
  double top;
  double left;
  double width;
  double row;
  double t0;
  double t1;

  double x(double t) const { return left + (t - t0) / (t1 - t0) * width; }
  double y(int string) const { return top + (string - 0.5) * row; }
  double height() const { return kNumStrings * row; }
};

void draw_panel(std::string& svg, const Panel& p, const std::string& title, const std::vector<NoteSegment>& notes,
                const std::vector<double>& beats) {
  svg += "  <g class=\"panel\">\n";
  svg += "    <text x=\"" + num(p.left) + "\" y=\"" + num(p.top - 6) + "\" font-size=\"12\">" + title + "</text>\n";
  for (int s = 1; s <= kNumStrings; ++s) {
    svg += "    <line class=\"string\" x1=\"" + num(p.left) + "\" y1=\"" + num(p.y(s)) + "\" x2=\"" +
           num(p.left + p.width) + "\" y2=\"" + num(p.y(s)) + "\" stroke=\"#bbb\" stroke-width=\"1\"/>\n";
  }
  for (double b : beats) {
    if (b < p.t0 || b > p.t1) continue;
    svg += "    <line class=\"beat\" x1=\"" + num(p.x(b)) + "\" y1=\"" + num(p.top) + "\" x2=\"" + num(p.x(b)) +
           "\" y2=\"" + num(p.top + p.height()) + "\" stroke=\"#888\" stroke-dasharray=\"3,3\"/>\n";
  }
  const double r = p.row * 0.42;
  for (const auto& n : notes) {
    const double start = std::max(n.start, p.t0);
    const double end = std::min(n.end, p.t1);
    if (end <= start) continue;
    const double y = p.y(n.string);
    svg += "    <rect class=\"note\" x=\"" + num(p.x(start)) + "\" y=\"" + num(y - p.row * 0.18) + "\" width=\"" +
           num(p.x(end) - p.x(start)) + "\" height=\"" + num(p.row * 0.36) + "\" fill=\"#6a9fd4\"/>\n";
    svg += "    <circle class=\"fret\" cx=\"" + num(p.x(start)) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) +
           "\" fill=\"white\" stroke=\"black\"/>\n";
    svg += "    <text x=\"" + num(p.x(start)) + "\" y=\"" + num(y + 4) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + std::to_string(n.fret) + "</text>\n";
  }
  svg += "  </g>\n";
}

}  // namespace

std::vector<NoteSegment> segments_from_labels(const LabelTensor& labels) {
  std::vector<NoteSegment> out;
  for (int s = 1; s <= kNumStrings; ++s) {
    std::size_t k = 0;
    while (k < labels.n_frames()) {
      const int cls = labels.at(s, k);
      std::size_t end = k + 1;
      while (end < labels.n_frames() && labels.at(s, end) == cls) ++end;
      if (cls > 0) out.push_back({s, cls - 1, labels.frame_time(k), labels.frame_time(end)});
      k = end;
    }
  }
  std::sort(out.begin(), out.end(), [](const NoteSegment& a, const NoteSegment& b) {
    return a.start != b.start ? a.start < b.start : a.string < b.string;
  });
  return out;
}

std::string plot_comparison(const LabelTensor& pred, const LabelTensor& gt, double t0, double t1,
                            const std::vector<double>& beat_times, const PlotOptions& opts) {
  if (!(t1 > t0)) throw ValidationError("empty plot window");
  if (t0 < 0.0 || t1 > gt.frame_time(gt.n_frames()) + 1e-9) {
    throw ValidationError("plot window outside the track");
  }
  const double margin = 40.0;
  const double panel_h = kNumStrings * opts.row_height;
  const double height = margin + panel_h + margin + panel_h + margin;
  Panel top{margin, margin, opts.width - 2 * margin, opts.row_height, t0, t1};
  Panel bottom = top;
  bottom.top = margin + panel_h + margin;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(opts.width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(opts.width) + " " + num(height) + "\">\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(opts.width) + "\" height=\"" + num(height) + "\" fill=\"white\"/>\n";
  draw_panel(svg, top, opts.gt_title, segments_from_labels(gt), beat_times);
  draw_panel(svg, bottom, opts.pred_title, segments_from_labels(pred), beat_times);
  svg += "  <text x=\"" + num(top.left) + "\" y=\"" + num(height - 12) + "\" font-size=\"11\">" + num(t0) +
         " s</text>\n";
  svg += "  <text x=\"" + num(top.left + top.width) + "\" y=\"" + num(height - 12) +
         "\" font-size=\"11\" text-anchor=\"end\">" + num(t1) + " s</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace tabsynth
