#include "tabsynth/score.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace fs = std::filesystem;

namespace {

constexpr std::array<Column, kNumColumns> kColumns{Column::kPitchF1, Column::kPitchP, Column::kPitchR, Column::kTabF1,
                                                   Column::kTabP,    Column::kTabR,   Column::kTdr};

std::map<std::string, fs::path> csv_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file() && de.path().extension() == ".csv") out[de.path().stem().string()] = de.path();
  }
  return out;
}

std::string fixed(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // Display width: count UTF-8 lead bytes only.
  std::size_t shown = 0;
  for (unsigned char c : s) shown += (c & 0xC0) != 0x80;
  return s + std::string(width > shown ? width - shown : 0, ' ');
}

}  // namespace

std::string_view column_key(Column c) {
  switch (c) {
    case Column::kPitchF1: return "multipitch_f1";
    case Column::kPitchP: return "multipitch_p";
    case Column::kPitchR: return "multipitch_r";
    case Column::kTabF1: return "tablature_f1";
    case Column::kTabP: return "tablature_p";
    case Column::kTabR: return "tablature_r";
    case Column::kTdr: return "tdr";
  }
  return {};
}

std::string_view column_title(Column c) {
  switch (c) {
    case Column::kPitchF1:
    case Column::kTabF1: return "F1";
    case Column::kPitchP:
    case Column::kTabP: return "P";
    case Column::kPitchR:
    case Column::kTabR: return "R";
    case Column::kTdr: return "TDR";
  }
  return {};
}

std::optional<double> column_value(const MetricsReport& m, Column c) {
  switch (c) {
    case Column::kPitchF1: return m.multipitch.f1;
    case Column::kPitchP: return m.multipitch.precision;
    case Column::kPitchR: return m.multipitch.recall;
    case Column::kTabF1: return m.tablature.f1;
    case Column::kTabP: return m.tablature.precision;
    case Column::kTabR: return m.tablature.recall;
    case Column::kTdr: return m.tdr;
  }
  return std::nullopt;
}

std::vector<std::optional<double>> ScoreRun::values_by_track(Column c) const {
  std::vector<std::optional<double>> out;
  for (const auto& t : tracks) out.push_back(t.metrics ? column_value(*t.metrics, c) : std::nullopt);
  return out;
}

std::vector<double> ScoreRun::values(Column c) const {
  std::vector<double> out;
  for (const auto& v : values_by_track(c)) {
    if (v) out.push_back(*v);
  }
  return out;
}

ScoreRun score_predictions(const fs::path& pred_dir, const fs::path& gt_dir, const Tuning& tuning,
                           const GridDefaults& gt_defaults) {
  const auto preds = csv_files(pred_dir);
  const auto gts = csv_files(gt_dir);
  ScoreRun run;
  run.label = pred_dir.filename().string();
  if (run.label.empty()) run.label = pred_dir.parent_path().filename().string();
  for (const auto& [name, path] : preds) {
    if (!gts.count(name)) run.unmatched.push_back(name + " (no ground truth)");
  }
  for (const auto& [name, gt_path] : gts) {
    const auto it = preds.find(name);
    if (it == preds.end()) {
      run.unmatched.push_back(name + " (no prediction)");
      continue;
    }
    TrackScore ts;
    ts.track = name;
    try {
      const auto gt = read_labels(gt_path, gt_defaults).labels;
      const auto pred = read_labels(it->second, gt_defaults);
      if (!pred.had_grid_header) throw FormatError("prediction lacks the '# hop= sr= max_fret=' line");
      const auto& p = pred.labels;
      if (p.hop() != gt.hop() || p.sample_rate() != gt.sample_rate() || p.max_fret() != gt.max_fret()) {
        throw AlignmentError("prediction grid (hop " + std::to_string(p.hop()) + ", sr " + fixed(p.sample_rate(), 0) +
                             ", max_fret " + std::to_string(p.max_fret()) + ") differs from ground truth (hop " +
                             std::to_string(gt.hop()) + ", sr " + fixed(gt.sample_rate(), 0) + ", max_fret " +
                             std::to_string(gt.max_fret()) + ")");
      }
      if (p.n_frames() != gt.n_frames()) {
        throw AlignmentError("prediction has " + std::to_string(p.n_frames()) + " frames, ground truth " +
                             std::to_string(gt.n_frames()));
      }
      ts.metrics = evaluate(p, gt, tuning);
    } catch (const Error& e) {
      ts.error = e.what();
    }
    run.tracks.push_back(std::move(ts));
  }
  return run;
}

ScoreTable summarize_runs(std::vector<ScoreRun> runs, bool paired) {
  ScoreTable table;
  table.paired = paired;
  table.runs = std::move(runs);
  for (std::size_t r = 0; r < table.runs.size(); ++r) {
    std::array<ColumnSummary, kNumColumns> row;
    for (std::size_t c = 0; c < kNumColumns; ++c) {
      const Column col = kColumns[c];
      auto& cell = row[c];
      const auto values = table.runs[r].values(col);
      try {
        cell.aggregate = aggregate(std::span<const double>(values));
      } catch (const InsufficientDataError&) {
        if (values.size() == 1) cell.aggregate = MeanStd{values[0], 0.0, 1};
        cell.note = "fewer than 2 tracks";
      }
      if (values.size() >= 8) {
        try {
          cell.normality = dagostino_pearson(values);
        } catch (const DegenerateDataError&) {
        }
      }
      if (r == 0) continue;
      try {
        if (paired) {
          // Pair tracks by name; tracks missing a value on either side drop out.
          std::map<std::string, double> base;
          for (const auto& t : table.runs[0].tracks) {
            if (t.metrics) {
              if (const auto v = column_value(*t.metrics, col)) base[t.track] = *v;
            }
          }
          std::vector<double> a;
          std::vector<double> b;
          for (const auto& t : table.runs[r].tracks) {
            if (!t.metrics) continue;
            const auto v = column_value(*t.metrics, col);
            const auto it = base.find(t.track);
            if (v && it != base.end()) {
              a.push_back(*v);
              b.push_back(it->second);
            }
          }
          cell.versus_baseline = ttest_paired(a, b);
        } else {
          const auto base = table.runs[0].values(col);
          cell.versus_baseline = ttest_two_sample(values, base);
        }
        cell.marker = significance_marker(cell.versus_baseline->p);
      } catch (const ValidationError& e) {
        if (!cell.note.empty()) cell.note += "; ";
        cell.note += std::string("no test: ") + e.what();
      }
    }
    table.summary.push_back(row);
  }
  return table;
}

ScoreTable score_command(const fs::path& gt_dir, const std::vector<fs::path>& pred_dirs, bool paired,
                         const Tuning& tuning, const GridDefaults& gt_defaults) {
  if (pred_dirs.empty()) throw ValidationError("no prediction directories given");
  std::vector<ScoreRun> runs;
  for (const auto& d : pred_dirs) runs.push_back(score_predictions(d, gt_dir, tuning, gt_defaults));
  return summarize_runs(std::move(runs), paired);
}

std::string render_table_text(const ScoreTable& table) {
  constexpr std::size_t kCell = 15;
  std::size_t label_w = 8;
  for (const auto& r : table.runs) {
    label_w = std::max(label_w, r.label.size() + 2);
    for (const auto& t : r.tracks) label_w = std::max(label_w, t.track.size() + 4);
  }
  std::string out;
  out += pad("", label_w) + pad("Multi-pitch estimation", 3 * kCell) + pad("Tablature estimation", 3 * kCell) + "\n";
  out += pad("", label_w);
  for (auto c : kColumns) out += pad(std::string(column_title(c)), kCell);
  out += "\n";

  for (std::size_t r = 0; r < table.runs.size(); ++r) {
    const auto& run = table.runs[r];
    out += pad(run.label, label_w);
    for (std::size_t c = 0; c < kNumColumns; ++c) {
      const auto& cell = table.summary[r][c];
      std::string text = cell.aggregate ? format_mean_std(*cell.aggregate) + cell.marker : "n/a";
      out += pad(text, kCell);
    }
    out += "\n";
  }
  out += "\n";
  if (table.runs.size() > 1) {
    out += std::string(table.paired ? "paired" : "two-sample pooled") +
           " t-test against the first row: * p<0.05, ◇ 0.05<=p<0.1\n\n";
  }

  for (const auto& run : table.runs) {
    out += "[" + run.label + "] per track\n";
    for (const auto& t : run.tracks) {
      out += pad("  " + t.track, label_w);
      if (!t.metrics) {
        out += "error: " + t.error + "\n";
        continue;
      }
      for (auto c : kColumns) {
        const auto v = column_value(*t.metrics, c);
        out += pad(v ? fixed(*v) : "n/a", kCell);
      }
      out += "\n";
    }
    for (const auto& u : run.unmatched) out += "  warning: unmatched track " + u + "\n";
  }
  return out;
}

nlohmann::json table_to_json(const ScoreTable& table) {
  using nlohmann::json;
  json doc;
  doc["test"] = table.paired ? "paired" : "two_sample_pooled";
  auto& runs = doc["runs"] = json::array();
  for (std::size_t r = 0; r < table.runs.size(); ++r) {
    const auto& run = table.runs[r];
    json jr;
    jr["label"] = run.label;
    jr["unmatched"] = run.unmatched;
    auto& tracks = jr["tracks"] = json::array();
    for (const auto& t : run.tracks) {
      json jt;
      jt["track"] = t.track;
      if (t.metrics) {
        for (auto c : kColumns) {
          const auto v = column_value(*t.metrics, c);
          jt[std::string(column_key(c))] = v ? json(*v) : json(nullptr);
        }
        jt["counts"] = {{"tp_pitch", t.metrics->pitch_counts.tp},
                        {"fp_pitch", t.metrics->pitch_counts.fp},
                        {"fn_pitch", t.metrics->pitch_counts.fn},
                        {"tp_tab", t.metrics->tab_counts.tp},
                        {"fp_tab", t.metrics->tab_counts.fp},
                        {"fn_tab", t.metrics->tab_counts.fn}};
      } else {
        jt["error"] = t.error;
      }
      tracks.push_back(std::move(jt));
    }
    auto& agg = jr["aggregate"] = json::object();
    for (std::size_t c = 0; c < kNumColumns; ++c) {
      const auto& cell = table.summary[r][c];
      json jc;
      if (cell.aggregate) {
        jc["mean"] = cell.aggregate->mean;
        jc["std"] = cell.aggregate->std;
        jc["n"] = cell.aggregate->n;
        jc["text"] = format_mean_std(*cell.aggregate) + cell.marker;
      }
      if (cell.versus_baseline) {
        jc["t"] = cell.versus_baseline->t;
        jc["df"] = cell.versus_baseline->df;
        jc["p"] = cell.versus_baseline->p;
        jc["marker"] = cell.marker;
      }
      if (cell.normality) jc["normality"] = {{"k2", cell.normality->k2}, {"p", cell.normality->p}};
      if (!cell.note.empty()) jc["note"] = cell.note;
      agg[std::string(column_key(kColumns[c]))] = std::move(jc);
    }
    runs.push_back(std::move(jr));
  }
  return doc;
}

}  // namespace tabsynth
