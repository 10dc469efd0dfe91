#include "tabsynth/metrics.hpp"

#include <gtest/gtest.h>

#include "metrics_oracle.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

FrameSet pitch_frames(std::vector<std::vector<int>> frames) {
  FrameSet f;
  f.n_frames = frames.size();
  for (auto& v : frames) std::sort(v.begin(), v.end());
  f.pitches = std::move(frames);
  f.tabs.resize(f.n_frames);
  return f;
}

FrameSet tab_frames(std::vector<std::vector<StringFret>> frames) {
  const auto tuning = Tuning::standard();
  FrameSet f;
  f.n_frames = frames.size();
  for (auto& v : frames) {
    std::sort(v.begin(), v.end());
    std::vector<int> p;
    for (auto [s, fr] : v) p.push_back(tuning.open_midi(s) + fr);
    std::sort(p.begin(), p.end());
    f.pitches.push_back(p);
  }
  f.tabs = std::move(frames);
  return f;
}

TEST(FramesFromLabels, Mapping) {
  LabelTensor t(3, 512, 22050.0);
  t.set(6, 0, 6);
  t.set(5, 0, 1);
  t.set(1, 2, 20);
  const auto f = frames_from_labels(t);
  EXPECT_EQ(f.pitches[0], (std::vector<int>{45, 45}));
  EXPECT_EQ(f.tabs[0], (std::vector<StringFret>{{5, 0}, {6, 5}}));
  EXPECT_TRUE(f.pitches[1].empty());
  EXPECT_TRUE(f.tabs[1].empty());
  EXPECT_EQ(f.pitches[2], std::vector<int>{83});
}

TEST(MultipitchPrf, Examples) {
  const auto gt = pitch_frames({{40, 45}, {47}});
  const auto pr = pitch_frames({{40}, {47, 50}});
  const auto c = multipitch_counts(pr, gt);
  EXPECT_EQ(c.tp, 2u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  const auto m = multipitch_prf(pr, gt);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2.0 / 3.0);

  const auto id = multipitch_prf(gt, gt);
  EXPECT_EQ(id.precision, 1.0);
  EXPECT_EQ(id.recall, 1.0);
  EXPECT_EQ(id.f1, 1.0);

  const auto none = multipitch_prf(pitch_frames({{}, {}}), gt);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);

  // Unisons count as a multiset.
  EXPECT_EQ(multipitch_counts(pitch_frames({{45, 45}}), pitch_frames({{45}})).tp, 1u);
  EXPECT_EQ(multipitch_counts(pitch_frames({{45, 45}}), pitch_frames({{45, 45}})).tp, 2u);
}

TEST(TablaturePrf, Examples) {
  const auto wrong = tablature_prf(tab_frames({{{5, 0}}}), tab_frames({{{6, 5}}}));
  EXPECT_EQ(wrong.f1, 0.0);
  const auto half = tablature_prf(tab_frames({{{6, 5}}}), tab_frames({{{6, 5}, {1, 0}}}));
  EXPECT_EQ(half.precision, 1.0);
  EXPECT_EQ(half.recall, 0.5);
  EXPECT_DOUBLE_EQ(half.f1, 2.0 / 3.0);
}

TEST(Tdr, Examples) {
  const auto gt = tab_frames({{{6, 5}}, {{2, 1}}});
  EXPECT_EQ(tdr(gt, gt), 1.0);
  EXPECT_EQ(tdr(tab_frames({{{5, 0}}}), tab_frames({{{6, 5}}})), 0.0);
  // One position-correct match, one pitch-only match (B3=59: string 2 fret 0 vs string 3 fret 4).
  const auto mixed = tab_frames({{{6, 5}}, {{3, 4}}});
  const auto g2 = tab_frames({{{6, 5}}, {{2, 0}}});
  EXPECT_EQ(tdr(mixed, g2), 0.5);
  EXPECT_FALSE(tdr(tab_frames({{}, {}}), g2).has_value());
}

TEST(Metrics, GridMismatchIsAlignmentError) {
  const auto a = pitch_frames({{40}});
  const auto b = pitch_frames({{40}, {41}});
  EXPECT_THROW(multipitch_prf(a, b), AlignmentError);
  EXPECT_THROW(tablature_prf(a, b), AlignmentError);
  EXPECT_THROW(tdr(a, b), AlignmentError);
  auto c = a;
  c.hop = 256;
  EXPECT_THROW(evaluate(c, a), AlignmentError);
  EXPECT_THROW(evaluate(LabelTensor(4, 512, 22050.0), LabelTensor(4, 512, 44100.0)), AlignmentError);
}

TEST(Metrics, MatchesBruteForceOracle) {
  test::SplitMix64 g(2024);
  const auto tuning = Tuning::standard();
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(g.below(10));
    const auto pred = test::random_labels(g, n, 1 + g.below(4));
    const auto gt = test::random_labels(g, n, 1 + g.below(4));
    const auto r = evaluate(pred, gt, tuning);
    const auto o = test::oracle_counts(pred, gt, tuning);
    ASSERT_EQ(static_cast<long>(r.pitch_counts.tp), o.tp_pitch);
    ASSERT_EQ(static_cast<long>(r.pitch_counts.tp + r.pitch_counts.fp), o.n_pred_pitch);
    ASSERT_EQ(static_cast<long>(r.pitch_counts.tp + r.pitch_counts.fn), o.n_gt_pitch);
    ASSERT_EQ(static_cast<long>(r.tab_counts.tp), o.tp_tab);
    const auto mp = test::oracle_rates(o.tp_pitch, o.n_pred_pitch, o.n_gt_pitch);
    EXPECT_NEAR(r.multipitch.f1, mp.f1, 1e-12);
    ASSERT_LE(r.tab_counts.tp, r.pitch_counts.tp);
    if (o.tp_pitch == 0) {
      EXPECT_FALSE(r.tdr);
    } else {
      EXPECT_NEAR(*r.tdr, static_cast<double>(o.tp_tab) / o.tp_pitch, 1e-12);
    }
    for (double v : {r.multipitch.precision, r.multipitch.recall, r.multipitch.f1, r.tablature.precision,
                     r.tablature.recall, r.tablature.f1}) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
}

TEST(Metrics, SwapDualityAndPermutationInvariance) {
  test::SplitMix64 g(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = test::random_labels(g, 8, 4);
    const auto b = test::random_labels(g, 8, 4);
    const auto fa = frames_from_labels(a);
    const auto fb = frames_from_labels(b);
    EXPECT_EQ(multipitch_prf(fa, fb).precision, multipitch_prf(fb, fa).recall);
    EXPECT_EQ(tablature_prf(fa, fb).precision, tablature_prf(fb, fa).recall);

    // Reordering frames consistently in both inputs leaves every score unchanged.
    auto pa = fa, pb = fb;
    std::reverse(pa.pitches.begin(), pa.pitches.end());
    std::reverse(pa.tabs.begin(), pa.tabs.end());
    std::reverse(pb.pitches.begin(), pb.pitches.end());
    std::reverse(pb.tabs.begin(), pb.tabs.end());
    EXPECT_EQ(multipitch_prf(pa, pb).f1, multipitch_prf(fa, fb).f1);
    EXPECT_EQ(tdr(pa, pb), tdr(fa, fb));
  }
}

}  // namespace
}  // namespace tabsynth
