#include "tabsynth/plot.hpp"

#include <gtest/gtest.h>

#include <regex>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

std::vector<std::string> panels(const std::string& svg) {
  std::vector<std::string> out;
  for (auto p = svg.find("<g class=\"panel\">"); p != std::string::npos;) {
    const auto end = svg.find("</g>", p);
    out.push_back(svg.substr(p, end - p));
    p = svg.find("<g class=\"panel\">", end);
  }
  return out;
}

std::vector<double> circle_x(const std::string& panel) {
  std::vector<double> xs;
  const std::regex re("<circle class=\"fret\" cx=\"([0-9.]+)\"");
  for (std::sregex_iterator it(panel.begin(), panel.end(), re), end; it != end; ++it) xs.push_back(std::stod((*it)[1]));
  return xs;
}

// 0.5 s per 22050 / 441 = 50 frames per second.
LabelTensor grid(std::size_t frames = 200) { return LabelTensor(frames, 441, 22050.0); }

TEST(SegmentsFromLabels, RunsPerString) {
  auto t = grid(10);
  for (std::size_t k = 2; k < 5; ++k) t.set(3, k, 8);
  t.set(3, 5, 9);
  t.set(1, 9, 1);
  const auto segs = segments_from_labels(t);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0], (NoteSegment{3, 7, 0.04, 0.1}));
  EXPECT_EQ(segs[1].fret, 8);
  EXPECT_EQ(segs[2].string, 1);
  EXPECT_DOUBLE_EQ(segs[2].end, 0.2);
}

TEST(PlotComparison, EmptyPredictionTwoGroundTruthNotes) {
  auto gt = grid();
  for (std::size_t k = 10; k < 30; ++k) gt.set(6, k, 4);
  for (std::size_t k = 40; k < 60; ++k) gt.set(2, k, 13);
  const auto svg = plot_comparison(grid(), gt, 0.0, 2.0);
  const auto p = panels(svg);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(count(p[0], "<circle"), 2u);
  EXPECT_EQ(count(p[1], "<circle"), 0u);
  EXPECT_NE(p[0].find(">3</text>"), std::string::npos);
  EXPECT_NE(p[0].find(">12</text>"), std::string::npos);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
}

TEST(PlotComparison, IdenticalInputsGiveMatchingPanels) {
  auto t = grid();
  for (std::size_t k = 0; k < 200; k += 7) t.set(1 + static_cast<int>(k % 6), k, 1 + static_cast<int>(k % 20));
  const auto p = panels(plot_comparison(t, t, 0.5, 3.5, {1.0, 2.0, 3.0}));
  for (const char* tag : {"<rect", "<circle", "<text", "<line"}) EXPECT_EQ(count(p[0], tag), count(p[1], tag)) << tag;
  EXPECT_EQ(count(p[0], "class=\"beat\""), 3u);
  EXPECT_EQ(circle_x(p[0]), circle_x(p[1]));
}

TEST(PlotComparison, FixedWidthLinearTime) {
  auto t = grid();
  // Onsets at 1.0, 1.5 and 2.0 s.
  t.set(1, 50, 1);
  t.set(2, 75, 1);
  t.set(3, 100, 1);
  for (double len : {2.0, 3.0}) {
    const auto svg = plot_comparison(t, t, 0.5, 0.5 + len);
    EXPECT_NE(svg.find("width=\"960.00\""), std::string::npos);
    const auto xs = circle_x(panels(svg)[0]);
    ASSERT_EQ(xs.size(), 3u);
    const double per_second = 880.0 / len;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(xs[i], 40.0 + (0.5 + 0.5 * i) * per_second, 0.01);
    EXPECT_NEAR(xs[1] - xs[0], xs[2] - xs[1], 0.02);  // coordinates carry 2 decimals
  }
}

TEST(PlotComparison, WindowErrors) {
  const auto t = grid();
  EXPECT_THROW(plot_comparison(t, t, 1.0, 1.0), ValidationError);
  EXPECT_THROW(plot_comparison(t, t, 2.0, 1.0), ValidationError);
  EXPECT_THROW(plot_comparison(t, t, 0.0, 5.0), ValidationError);
  EXPECT_THROW(plot_comparison(t, t, -1.0, 1.0), ValidationError);
  EXPECT_NO_THROW(plot_comparison(t, t, 0.0, 4.0));
}

}  // namespace
}  // namespace tabsynth
