// tabsynth: synthetic guitar-tablature datasets and transcription scoring.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O or format error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabsynth/dataset.hpp"
#include "tabsynth/detail/text.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/plot.hpp"
#include "tabsynth/renderer.hpp"
#include "tabsynth/score.hpp"
#include "tabsynth/stats.hpp"
#include "tabsynth/tone_bank.hpp"

namespace fs = std::filesystem;
using namespace tabsynth;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void dump(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::set<std::string> effect_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Whitespace-separated numbers, or one column of a `score --json` report.
std::vector<double> load_values(const fs::path& path, const std::string& column) {
  const auto text = slurp(path);
  if (path.extension() == ".json") {
    const auto doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.contains("runs") || doc["runs"].empty()) {
      throw FormatError(path.string() + ": not a score report");
    }
    std::vector<double> out;
    for (const auto& t : doc["runs"][0]["tracks"]) {
      if (t.contains(column) && t[column].is_number()) out.push_back(t[column].get<double>());
    }
    return out;
  }
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto v = detail::to_double(tok);
    if (!v) throw FormatError(path.string() + ": not a number '" + tok + "'");
    out.push_back(*v);
  }
  return out;
}

int cmd_validate_bank(const fs::path& manifest, fs::path root, const std::vector<std::string>& exclude,
                      double tolerance, bool allow_gaps, const fs::path& out) {
  if (root.empty()) root = manifest.parent_path();
  const auto bank = scan_bank_file(manifest, root, effect_set(exclude));
  const auto report = validate_bank(bank, Tuning::standard(), tolerance);
  json doc;
  doc["tolerance_cents"] = tolerance;
  auto& samples = doc["samples"] = json::array();
  for (const auto& c : report.samples) {
    json j{{"id", c.id},       {"string", c.position.string}, {"fret", c.position.fret}, {"expected_midi", c.expected_midi},
           {"f0_hz", c.f0_hz}, {"confidence", c.confidence},  {"cents", c.cents},        {"pass", c.pass}};
    if (c.error) j["error"] = *c.error;
    samples.push_back(std::move(j));
    if (!c.pass) {
      std::printf("FAIL %-24s s%d f%-2d f0=%.2f Hz conf=%.3f cents=%+.1f%s%s\n", c.id.c_str(), c.position.string,
                  c.position.fret, c.f0_hz, c.confidence, c.cents, c.error ? "  " : "", c.error ? c.error->c_str() : "");
    }
  }
  auto& missing = doc["missing"] = json::array();
  for (const auto& p : report.missing) missing.push_back({p.string, p.fret});
  std::printf("%zu samples, %zu failed, %zu positions uncovered\n", report.samples.size(), report.failures(),
              report.missing.size());
  if (!report.missing.empty()) {
    std::printf("uncovered:");
    for (const auto& p : report.missing) std::printf(" (%d,%d)", p.string, p.fret);
    std::printf("\n");
  }
  if (!out.empty()) dump(out, doc.dump(2) + "\n");
  return report.failures() > 0 || (!allow_gaps && !report.missing.empty()) ? kExitValidation : 0;
}

int cmd_render(const fs::path& tab_path, const fs::path& manifest, fs::path root, const std::vector<std::string>& exclude,
               const RenderConfig& cfg, const fs::path& out_dir, bool truncate) {
  if (root.empty()) root = manifest.parent_path();
  ParseOptions opts;
  opts.max_fret = cfg.max_fret;
  opts.overlap = truncate ? OverlapPolicy::kTruncate : OverlapPolicy::kReject;
  const auto tab = load_tablature(tab_path.string(), opts);
  const auto bank = scan_bank_file(manifest, root, effect_set(exclude), cfg.max_fret);
  const auto r = render_performance(tab, bank, cfg, track_seed(cfg.master_seed, tab.source_id));
  fs::create_directories(out_dir);
  write_wav(r.audio, out_dir / (tab.source_id + ".wav"));
  write_labels(r.labels, out_dir / (tab.source_id + ".csv"));
  dump(out_dir / (tab.source_id + ".render.json"), serialize_render_log(r.log));
  for (const auto& w : r.log.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("rendered %s: %zu events, %.3f s, %zu frames\n", tab.source_id.c_str(), tab.events.size(),
              r.audio.duration(), r.labels.n_frames());
  return 0;
}

int cmd_build(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<unsigned> jobs,
              const fs::path& out) {
  auto cfg = parse_dataset_config(slurp(config_path), config_path.parent_path());
  if (seed) cfg.render.master_seed = *seed;
  if (jobs) cfg.jobs = *jobs;
  if (!out.empty()) cfg.out_dir = out;
  const auto m = build_dataset(cfg);
  std::size_t synth = 0;
  for (const auto& e : m.entries) synth += e.origin != Origin::kReal;
  std::printf("%s mode: %zu entries (%zu synthetic) written to %s\n", m.mode.c_str(), m.entries.size(), synth,
              cfg.out_dir.string().c_str());
  for (const auto& s : m.skipped_sources) std::printf("skipped %s\n", s.c_str());
  return 0;
}

int cmd_score(const fs::path& gt, const std::vector<fs::path>& preds, bool paired, const GridDefaults& grid,
              const fs::path& json_out) {
  const auto table = score_command(gt, preds, paired, Tuning::standard(), grid);
  std::fputs(render_table_text(table).c_str(), stdout);
  if (!json_out.empty()) dump(json_out, table_to_json(table).dump(2) + "\n");
  for (const auto& run : table.runs) {
    for (const auto& t : run.tracks) {
      if (!t.metrics) return kExitValidation;
    }
  }
  return 0;
}

int cmd_stats(const fs::path& a_path, const fs::path& b_path, const std::string& column, bool paired,
              const fs::path& json_out) {
  const auto a = load_values(a_path, column);
  json doc;
  auto describe = [&](const char* name, const std::vector<double>& v) {
    json j;
    j["n"] = v.size();
    if (v.size() >= 2) {
      const auto m = aggregate(std::span<const double>(v));
      j["mean"] = m.mean;
      j["std"] = m.std;
      std::printf("%s: n=%zu %s\n", name, v.size(), format_mean_std(m).c_str());
    }
    if (v.size() >= 8) {
      const auto nt = dagostino_pearson(v);
      j["normality"] = {{"k2", nt.k2}, {"p", nt.p}};
      std::printf("  D'Agostino-Pearson K2=%.6f p=%.6g\n", nt.k2, nt.p);
    } else {
      std::printf("  normality test needs n >= 8\n");
    }
    doc[name] = j;
  };
  describe("a", a);
  if (!b_path.empty()) {
    const auto b = load_values(b_path, column);
    describe("b", b);
    const auto t = paired ? ttest_paired(a, b) : ttest_two_sample(a, b);
    std::printf("%s t-test: t=%.6f df=%g p=%.6g %s\n", paired ? "paired" : "two-sample pooled", t.t, t.df, t.p,
                significance_marker(t.p).c_str());
    doc["ttest"] = {{"t", t.t}, {"df", t.df}, {"p", t.p}, {"paired", paired}, {"marker", significance_marker(t.p)}};
  }
  if (!json_out.empty()) dump(json_out, doc.dump(2) + "\n");
  return 0;
}

int cmd_plot(const fs::path& gt_path, const fs::path& pred_path, double t0, double t1, const fs::path& beats_path,
             const fs::path& out) {
  const auto gt = read_labels(gt_path).labels;
  const auto pred = read_labels(pred_path).labels;
  std::vector<double> beats;
  if (!beats_path.empty()) beats = load_values(beats_path, {});
  const auto svg = plot_comparison(pred, gt, t0, t1, beats);
  if (out.empty()) {
    std::fputs(svg.c_str(), stdout);
  } else {
    dump(out, svg);
  }
  return 0;
}

int cmd_validate_manifest(const fs::path& manifest) {
  const auto check = validate_manifest(manifest);
  for (const auto& p : check.problems) std::printf("problem: %s\n", p.c_str());
  std::printf("%zu tracks, %zu with audio, %.2f s audio total", check.n_tracks, check.n_audio, check.total_seconds);
  if (check.n_audio > 0) std::printf(", %.2f s mean", check.total_seconds / static_cast<double>(check.n_audio));
  std::printf("\n");
  return check.ok() ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic guitar tablature datasets and transcription scoring"};
  app.require_subcommand(1);

  fs::path bank_manifest, bank_root, out, config, tab_path, gt, pred, beats, json_out, a_path, b_path, manifest;
  std::vector<std::string> exclude{"delay"};
  double tolerance = 50.0;
  bool allow_gaps = false;
  bool truncate = false;
  bool paired = false;
  std::uint64_t seed = 0;
  RenderConfig rcfg;
  GridDefaults grid;
  double t0 = 0.0;
  double t1 = 2.0;
  std::vector<fs::path> preds;
  std::string column = "multipitch_f1";

  auto* vb = app.add_subcommand("validate-bank", "Check bank pitch labels and (string, fret) coverage");
  vb->add_option("--bank-manifest", bank_manifest, "Bank manifest CSV")->required();
  vb->add_option("--bank-root", bank_root, "Directory the manifest paths are relative to");
  vb->add_option("--exclude", exclude, "Effect tags to leave out")->capture_default_str();
  vb->add_option("--tolerance", tolerance, "Pitch tolerance in cents")->capture_default_str();
  vb->add_flag("--allow-gaps", allow_gaps, "Do not fail on uncovered positions");
  vb->add_option("--out", out, "Write the JSON report here");

  auto* rd = app.add_subcommand("render", "Render one tablature file to WAV + labels");
  rd->add_option("--tab", tab_path, "Tablature (.json annotations or simple tab)")->required();
  rd->add_option("--bank-manifest", bank_manifest, "Bank manifest CSV")->required();
  rd->add_option("--bank-root", bank_root, "Directory the manifest paths are relative to");
  rd->add_option("--exclude", exclude, "Effect tags to leave out")->capture_default_str();
  rd->add_option("--seed", seed, "Master seed")->capture_default_str();
  rd->add_option("--sr", rcfg.target_sample_rate, "Target sample rate")->capture_default_str();
  rd->add_option("--hop", rcfg.hop, "Label hop in samples")->capture_default_str();
  rd->add_option("--fade-ms", rcfg.fade_out_ms, "Fade-out length")->capture_default_str();
  rd->add_option("--peak", rcfg.normalization_peak, "Normalization peak")->capture_default_str();
  rd->add_flag("--truncate-overlaps", truncate, "Clip overlapping same-string notes instead of failing");
  rd->add_option("--out", out, "Output directory")->required();

  std::optional<std::uint64_t> build_seed;
  std::optional<unsigned> build_jobs;
  auto* bd = app.add_subcommand("build-dataset", "Render a synthetic dataset from a JSON config");
  bd->add_option("--config", config, "Build config (JSON)")->required();
  bd->add_option("--seed", build_seed, "Override the config seed");
  bd->add_option("--jobs", build_jobs, "Worker threads");
  bd->add_option("--out", out, "Output directory (overrides out_dir)");

  auto* sc = app.add_subcommand("score", "Frame-level multi-pitch / tablature metrics");
  sc->add_option("--gt", gt, "Ground-truth label directory")->required();
  sc->add_option("--pred", preds, "Prediction directory; repeat to compare, first is the baseline")->required();
  sc->add_flag("--paired", paired, "Paired t-test instead of two-sample pooled");
  sc->add_option("--hop", grid.hop, "Ground-truth hop when its files have no grid line")->capture_default_str();
  sc->add_option("--sr", grid.sample_rate, "Ground-truth rate when its files have no grid line")->capture_default_str();
  sc->add_option("--json", json_out, "Write the structured report here");

  auto* st = app.add_subcommand("stats", "t-test and D'Agostino-Pearson normality test");
  st->add_option("--a", a_path, "Values (text) or score report (.json)")->required();
  st->add_option("--b", b_path, "Second sample for the t-test");
  st->add_option("--column", column, "Column to read from score reports")->capture_default_str();
  st->add_flag("--paired", paired, "Paired t-test");
  st->add_option("--json", json_out, "Write the structured report here");

  auto* pl = app.add_subcommand("plot", "SVG comparison of ground truth and prediction");
  pl->add_option("--gt", gt, "Ground-truth labels CSV")->required();
  pl->add_option("--pred", pred, "Prediction labels CSV")->required();
  pl->add_option("--t0", t0, "Window start (s)")->capture_default_str();
  pl->add_option("--t1", t1, "Window end (s)")->capture_default_str();
  pl->add_option("--beats", beats, "Beat times file (seconds, whitespace separated)");
  pl->add_option("--out", out, "SVG output (stdout when omitted)");

  auto* vm = app.add_subcommand("validate-manifest", "Check a dataset manifest against the files on disk");
  vm->add_option("--manifest", manifest, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitIo;
  }

  try {
    if (*vb) return cmd_validate_bank(bank_manifest, bank_root, exclude, tolerance, allow_gaps, out);
    if (*rd) {
      rcfg.master_seed = seed;
      return cmd_render(tab_path, bank_manifest, bank_root, exclude, rcfg, out, truncate);
    }
    if (*bd) return cmd_build(config, build_seed, build_jobs, out);
    if (*sc) return cmd_score(gt, preds, paired, grid, json_out);
    if (*st) return cmd_stats(a_path, b_path, column, paired, json_out);
    if (*pl) return cmd_plot(gt, pred, t0, t1, beats, out);
    if (*vm) return cmd_validate_manifest(manifest);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return 0;
}
