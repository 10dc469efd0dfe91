#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabsynth/metrics.hpp"
#include "tabsynth/renderer.hpp"
#include "tabsynth/stats.hpp"

namespace tabsynth {

/// The seven report columns, in table order.
enum class Column { kPitchF1, kPitchP, kPitchR, kTabF1, kTabP, kTabR, kTdr };
inline constexpr std::size_t kNumColumns = 7;
std::string_view column_key(Column c);
std::string_view column_title(Column c);
std::optional<double> column_value(const MetricsReport& m, Column c);

struct TrackScore {
  std::string track;
  std::optional<MetricsReport> metrics;
  std::string error;
};

struct ScoreRun {
  std::string label;
  std::vector<TrackScore> tracks;
  std::vector<std::string> unmatched;  // present on only one side
  std::vector<double> values(Column c) const;
  std::vector<std::optional<double>> values_by_track(Column c) const;
};

/// Scores every `<track>.csv` in pred_dir against the same name in gt_dir.
/// Prediction files must carry a `# hop= sr= max_fret=` line that matches
/// the ground-truth grid.
ScoreRun score_predictions(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                           const Tuning& tuning = Tuning::standard(), const GridDefaults& gt_defaults = {});

struct ColumnSummary {
  std::optional<MeanStd> aggregate;
  std::optional<TTest> versus_baseline;
  std::string marker;
  std::optional<NormalityTest> normality;
  std::string note;
};

struct ScoreTable {
  std::vector<ScoreRun> runs;  // runs[0] is the baseline
  std::vector<std::array<ColumnSummary, kNumColumns>> summary;
  bool paired = false;
};

/// Aggregates each run and compares later runs against the first one.
ScoreTable summarize_runs(std::vector<ScoreRun> runs, bool paired = false);

ScoreTable score_command(const std::filesystem::path& gt_dir, const std::vector<std::filesystem::path>& pred_dirs,
                         bool paired = false, const Tuning& tuning = Tuning::standard(),
                         const GridDefaults& gt_defaults = {});

std::string render_table_text(const ScoreTable& table);
nlohmann::json table_to_json(const ScoreTable& table);

}  // namespace tabsynth
