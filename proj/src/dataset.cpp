#include "tabsynth/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "tabsynth/audio.hpp"
#include "tabsynth/error.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/tone_bank.hpp"

namespace tabsynth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

json render_config_json(const RenderConfig& r) {
  return {{"target_sample_rate", r.target_sample_rate},
          {"hop", r.hop},
          {"fade_out_ms", r.fade_out_ms},
          {"normalization_peak", r.normalization_peak},
          {"max_fret", r.max_fret}};
}

// Typed field access that reports the offending key path.
class Fields {
 public:
  Fields(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ParseError("expected an object", 0, where_.empty() ? "<root>" : where_);
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : obj_.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ParseError("unknown key", 0, path(k));
    }
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!obj_.contains(key)) return fallback;
    return get<T>(key);
  }

  template <typename T>
  T get(const std::string& key) const {
    const auto it = obj_.find(key);
    if (it == obj_.end()) throw ParseError("missing required key", 0, path(key));
    if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ParseError("expected a string", 0, path(key));
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ParseError("expected a boolean", 0, path(key));
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ParseError("expected an integer", 0, path(key));
      if (std::is_unsigned_v<T> && it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0) {
        throw ParseError("expected a non-negative integer", 0, path(key));
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ParseError("expected a number", 0, path(key));
    } else {
      try {
        return it->get<T>();
      } catch (const json::exception&) {
        throw ParseError("wrong type", 0, path(key));
      }
    }
    return it->get<T>();
  }

  Fields child(const std::string& key) const {
    if (!obj_.contains(key)) throw ParseError("missing required key", 0, path(key));
    return Fields(obj_.at(key), path(key));
  }

  std::string path(std::string_view key) const { return where_.empty() ? std::string(key) : where_ + "." + std::string(key); }

 private:
  const json& obj_;
  std::string where_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

struct SourceTrack {
  fs::path path;
  Tablature tab;
};

std::vector<SourceTrack> load_sources(const DatasetConfig& cfg, std::vector<std::string>& skipped) {
  if (!fs::is_directory(cfg.source_dir)) throw IoError("source directory not found: " + cfg.source_dir.string());
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(cfg.source_dir)) {
    if (!de.is_regular_file()) continue;
    const auto ext = de.path().extension().string();
    if (ext == ".json" || ext == ".tab" || ext == ".txt") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  ParseOptions opts;
  opts.max_fret = cfg.render.max_fret;
  opts.overlap = cfg.overlap;
  std::vector<SourceTrack> out;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto tab = load_tablature(f.string(), opts);
    if (!tab.tuning.is_standard()) {
      skipped.push_back(f.filename().string() + ": non-standard tuning");
      continue;
    }
    if (!ids.insert(tab.source_id).second) throw ValidationError("duplicate source id '" + tab.source_id + "'");
    out.push_back({f, std::move(tab)});
  }
  return out;
}

std::map<std::string, int> read_fold_file(const fs::path& path) {
  const auto doc = json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError(path.string() + ": expected a JSON object of id -> fold");
  std::map<std::string, int> folds;
  for (const auto& [id, v] : doc.items()) {
    if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() >= kNumFolds) {
      throw ParseError(path.string() + ": fold must be an integer in 0..5", 0, id);
    }
    folds[id] = v.get<int>();
  }
  return folds;
}

struct Job {
  const Tablature* tab = nullptr;
  std::string track_id;
  bool synthetic = true;
  fs::path original_audio;  // real entries only
};

}  // namespace

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::kReal:
      return "real";
    case Origin::kSynthReproduced:
      return "synth_reproduced";
    case Origin::kSynthExternal:
      return "synth_external";
  }
  return "real";
}

Origin origin_from_string(std::string_view s) {
  if (s == "real") return Origin::kReal;
  if (s == "synth_reproduced") return Origin::kSynthReproduced;
  if (s == "synth_external") return Origin::kSynthExternal;
  throw ParseError("unknown origin '" + std::string(s) + "'", 0, "origin");
}

std::string serialize_manifest(const DatasetManifest& m) {
  json doc;
  doc["mode"] = m.mode;
  doc["master_seed"] = m.master_seed;
  doc["cfg_snapshot"] = render_config_json(m.cfg_snapshot);
  doc["skipped_sources"] = m.skipped_sources;
  doc["sampling"] = m.sampling;
  auto& entries = doc["entries"] = json::array();
  for (const auto& e : m.entries) {
    json j{{"track_id", e.track_id},   {"source_path", e.source_path}, {"audio_path", e.audio_path},
           {"labels_path", e.labels_path}, {"origin", to_string(e.origin)}};
    j["fold"] = e.fold ? json(*e.fold) : json(nullptr);
    j["render_log_path"] = e.render_log_path.empty() ? json(nullptr) : json(e.render_log_path);
    entries.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

DatasetManifest parse_manifest(std::string_view text) {
  const auto doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded()) throw ParseError("manifest is not valid JSON");
  const Fields root(doc, "");
  DatasetManifest m;
  m.mode = root.get<std::string>("mode");
  m.master_seed = root.get<std::uint64_t>("master_seed");
  m.sampling = root.get<std::string>("sampling", "");
  m.skipped_sources = root.get<std::vector<std::string>>("skipped_sources", {});
  const auto snap = root.child("cfg_snapshot");
  m.cfg_snapshot.target_sample_rate = snap.get<double>("target_sample_rate");
  m.cfg_snapshot.hop = snap.get<int>("hop");
  m.cfg_snapshot.fade_out_ms = snap.get<double>("fade_out_ms");
  m.cfg_snapshot.normalization_peak = snap.get<double>("normalization_peak");
  m.cfg_snapshot.max_fret = snap.get<int>("max_fret");
  m.cfg_snapshot.master_seed = m.master_seed;
  const auto& entries = doc.at("entries");
  if (!entries.is_array()) throw ParseError("expected an array", 0, "entries");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Fields f(entries[i], "entries[" + std::to_string(i) + "]");
    ManifestEntry e;
    e.track_id = f.get<std::string>("track_id");
    e.source_path = f.get<std::string>("source_path");
    e.audio_path = f.get<std::string>("audio_path");
    e.labels_path = f.get<std::string>("labels_path");
    e.origin = origin_from_string(f.get<std::string>("origin"));
    if (entries[i].contains("fold") && !entries[i]["fold"].is_null()) e.fold = f.get<int>("fold");
    if (entries[i].contains("render_log_path") && !entries[i]["render_log_path"].is_null()) {
      e.render_log_path = f.get<std::string>("render_log_path");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetConfig parse_dataset_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  const Fields root(doc, "");
  root.allow_only({"mode", "source_dir", "bank", "render", "seed", "external_count", "folds", "original_audio_dir",
                   "overlap", "out_dir", "jobs"});
  DatasetConfig cfg;
  const auto mode = root.get<std::string>("mode");
  if (mode == "reproduce") {
    cfg.mode = BuildMode::kReproduce;
  } else if (mode == "external") {
    cfg.mode = BuildMode::kExternal;
  } else {
    throw ParseError("expected 'reproduce' or 'external'", 0, "mode");
  }
  cfg.source_dir = resolve(base_dir, root.get<std::string>("source_dir"));

  const auto bank = root.child("bank");
  bank.allow_only({"manifest", "root", "excluded_effects"});
  cfg.bank_manifest = resolve(base_dir, bank.get<std::string>("manifest"));
  cfg.bank_root = bank.has("root") ? resolve(base_dir, bank.get<std::string>("root")) : cfg.bank_manifest.parent_path();
  if (bank.has("excluded_effects")) {
    const auto list = bank.get<std::vector<std::string>>("excluded_effects");
    cfg.excluded_effects = {list.begin(), list.end()};
  }

  if (root.has("render")) {
    const auto r = root.child("render");
    r.allow_only({"target_sample_rate", "hop", "fade_out_ms", "normalization_peak", "max_fret"});
    cfg.render.target_sample_rate = r.get<double>("target_sample_rate", cfg.render.target_sample_rate);
    cfg.render.hop = r.get<int>("hop", cfg.render.hop);
    cfg.render.fade_out_ms = r.get<double>("fade_out_ms", cfg.render.fade_out_ms);
    cfg.render.normalization_peak = r.get<double>("normalization_peak", cfg.render.normalization_peak);
    cfg.render.max_fret = r.get<int>("max_fret", cfg.render.max_fret);
  }
  try {
    cfg.render.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0, "render");
  }
  cfg.render.master_seed = root.get<std::uint64_t>("seed", 0);
  cfg.external_count = root.get<std::size_t>("external_count", cfg.external_count);

  if (root.has("folds")) {
    const auto f = root.child("folds");
    f.allow_only({"scheme", "file", "delimiter"});
    const auto scheme = f.get<std::string>("scheme", "player_prefix");
    if (scheme == "player_prefix") {
      cfg.fold_scheme = FoldScheme::kPlayerPrefix;
    } else if (scheme == "file") {
      cfg.fold_scheme = FoldScheme::kFile;
      cfg.fold_file = resolve(base_dir, f.get<std::string>("file"));
    } else if (scheme == "none") {
      cfg.fold_scheme = FoldScheme::kNone;
    } else {
      throw ParseError("expected 'player_prefix', 'file' or 'none'", 0, "folds.scheme");
    }
    const auto delim = f.get<std::string>("delimiter", "_");
    if (delim.size() != 1) throw ParseError("expected a single character", 0, "folds.delimiter");
    cfg.group_delimiter = delim[0];
  }
  if (root.has("original_audio_dir")) cfg.original_audio_dir = resolve(base_dir, root.get<std::string>("original_audio_dir"));
  const auto overlap = root.get<std::string>("overlap", "reject");
  if (overlap == "reject") {
    cfg.overlap = OverlapPolicy::kReject;
  } else if (overlap == "truncate") {
    cfg.overlap = OverlapPolicy::kTruncate;
  } else {
    throw ParseError("expected 'reject' or 'truncate'", 0, "overlap");
  }
  if (root.has("out_dir")) cfg.out_dir = resolve(base_dir, root.get<std::string>("out_dir"));
  cfg.jobs = root.get<unsigned>("jobs", 1u);
  return cfg;
}

json resolved_config(const DatasetConfig& cfg) {
  json doc;
  doc["mode"] = cfg.mode == BuildMode::kReproduce ? "reproduce" : "external";
  doc["source_dir"] = cfg.source_dir.generic_string();
  doc["bank"] = {{"manifest", cfg.bank_manifest.generic_string()},
                 {"root", cfg.bank_root.generic_string()},
                 {"excluded_effects", cfg.excluded_effects}};
  doc["render"] = render_config_json(cfg.render);
  doc["seed"] = cfg.render.master_seed;
  doc["external_count"] = cfg.external_count;
  json folds;
  switch (cfg.fold_scheme) {
    case FoldScheme::kPlayerPrefix:
      folds["scheme"] = "player_prefix";
      break;
    case FoldScheme::kFile:
      folds["scheme"] = "file";
      folds["file"] = cfg.fold_file.generic_string();
      break;
    case FoldScheme::kNone:
      folds["scheme"] = "none";
      break;
  }
  folds["delimiter"] = std::string(1, cfg.group_delimiter);
  doc["folds"] = folds;
  doc["original_audio_dir"] = cfg.original_audio_dir.generic_string();
  doc["overlap"] = cfg.overlap == OverlapPolicy::kReject ? "reject" : "truncate";
  return doc;
}

std::string player_prefix(const std::string& track_id, char delimiter) {
  return track_id.substr(0, track_id.find(delimiter));
}

std::map<std::string, int> make_folds(const std::vector<std::string>& track_ids,
                                      const std::function<std::string(const std::string&)>& group_key) {
  std::set<std::string> groups;
  for (const auto& id : track_ids) groups.insert(group_key(id));
  if (groups.size() != kNumFolds) {
    throw GroupingError("expected " + std::to_string(kNumFolds) + " groups, found " + std::to_string(groups.size()));
  }
  std::map<std::string, int> group_fold;
  int next = 0;
  for (const auto& g : groups) group_fold[g] = next++;
  std::map<std::string, int> out;
  for (const auto& id : track_ids) {
    if (!out.emplace(id, group_fold[group_key(id)]).second) throw GroupingError("duplicate track id '" + id + "'");
  }
  return out;
}

DatasetManifest build_dataset(const DatasetConfig& cfg) {
  if (cfg.out_dir.empty()) throw ValidationError("no output directory configured");
  cfg.render.validate();

  DatasetManifest manifest;
  manifest.mode = cfg.mode == BuildMode::kReproduce ? "reproduce" : "external";
  manifest.master_seed = cfg.render.master_seed;
  manifest.cfg_snapshot = cfg.render;

  auto sources = load_sources(cfg, manifest.skipped_sources);

  std::vector<const SourceTrack*> chosen;
  if (cfg.mode == BuildMode::kExternal) {
    if (sources.size() < cfg.external_count) {
      throw ValidationError("external mode needs " + std::to_string(cfg.external_count) + " standard-tuning sources, found " +
                            std::to_string(sources.size()));
    }
    // Partial Fisher-Yates over the id-sorted pool.
    std::vector<std::size_t> pool(sources.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    Rng rng(stable_hash(cfg.render.master_seed, "external-selection"));
    for (std::size_t i = 0; i < cfg.external_count; ++i) {
      const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(cfg.external_count);
    std::sort(pool.begin(), pool.end());
    for (auto i : pool) chosen.push_back(&sources[i]);
    manifest.sampling = "uniform without replacement: " + std::to_string(cfg.external_count) + " of " +
                        std::to_string(sources.size()) + " standard-tuning sources";
  } else {
    for (const auto& s : sources) chosen.push_back(&s);
    manifest.sampling = "all standard-tuning sources";
  }

  std::map<std::string, int> folds;
  if (cfg.mode == BuildMode::kReproduce) {
    std::vector<std::string> ids;
    for (const auto* s : chosen) ids.push_back(s->tab.source_id);
    if (cfg.fold_scheme == FoldScheme::kPlayerPrefix) {
      const char delim = cfg.group_delimiter;
      folds = make_folds(ids, [delim](const std::string& id) { return player_prefix(id, delim); });
    } else if (cfg.fold_scheme == FoldScheme::kFile) {
      folds = read_fold_file(cfg.fold_file);
      for (const auto& id : ids) {
        if (!folds.count(id)) throw GroupingError("fold file has no entry for '" + id + "'");
      }
    }
  }

  // Coverage check before any audio is produced.
  const auto bank = scan_bank_file(cfg.bank_manifest, cfg.bank_root, cfg.excluded_effects, cfg.render.max_fret);
  std::set<Position> used;
  for (const auto* s : chosen) {
    for (const auto& e : s->tab.events) used.insert({e.string, e.fret});
  }
  std::string gaps;
  for (const auto& p : used) {
    if (!bank.covers(p)) gaps += " (" + std::to_string(p.string) + "," + std::to_string(p.fret) + ")";
  }
  if (!gaps.empty()) throw CoverageError("bank does not cover:" + gaps);

  const unsigned jobs = std::max(1u, cfg.jobs);
  const SampleStore store(bank, cfg.render.target_sample_rate, used, jobs);

  const fs::path out = cfg.out_dir;
  fs::create_directories(out / "audio");
  fs::create_directories(out / "labels");
  fs::create_directories(out / "logs");

  std::vector<Job> work;
  for (const auto* s : chosen) {
    const auto& id = s->tab.source_id;
    const std::optional<int> fold = folds.count(id) ? std::optional<int>(folds.at(id)) : std::nullopt;
    if (cfg.mode == BuildMode::kReproduce) {
      ManifestEntry real;
      real.track_id = id;
      real.source_path = s->path.generic_string();
      real.labels_path = "labels/" + id + ".csv";
      real.fold = fold;
      real.origin = Origin::kReal;
      Job job{&s->tab, id, false, {}};
      if (!cfg.original_audio_dir.empty()) {
        job.original_audio = cfg.original_audio_dir / (id + ".wav");
        if (!fs::is_regular_file(job.original_audio)) {
          throw IoError("original audio not found: " + job.original_audio.string());
        }
        real.audio_path = "audio/" + id + ".wav";
      }
      manifest.entries.push_back(real);
      work.push_back(job);
    }
    const std::string synth_id = id + "_fx";
    ManifestEntry synth;
    synth.track_id = synth_id;
    synth.source_path = s->path.generic_string();
    synth.audio_path = "audio/" + synth_id + ".wav";
    synth.labels_path = "labels/" + synth_id + ".csv";
    synth.render_log_path = "logs/" + synth_id + ".json";
    synth.fold = fold;
    synth.origin = cfg.mode == BuildMode::kReproduce ? Origin::kSynthReproduced : Origin::kSynthExternal;
    manifest.entries.push_back(synth);
    work.push_back({&s->tab, synth_id, true, {}});
  }
  {
    std::set<std::string> ids;
    for (const auto& e : manifest.entries) {
      if (!ids.insert(e.track_id).second) throw ValidationError("duplicate track id '" + e.track_id + "'");
    }
  }

  std::vector<std::string> errors(work.size());
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t k = next++; k < work.size(); k = next++) {
      const Job& job = work[k];
      try {
        if (job.synthetic) {
          const auto seed = track_seed(cfg.render.master_seed, job.tab->source_id);
          const auto r = render_performance(*job.tab, bank, cfg.render, seed, &store);
          write_wav(r.audio, out / "audio" / (job.track_id + ".wav"));
          write_labels(r.labels, out / "labels" / (job.track_id + ".csv"));
          write_text(out / "logs" / (job.track_id + ".json"), serialize_render_log(r.log));
        } else {
          std::size_t n_samples =
              static_cast<std::size_t>(std::llround(job.tab->total_duration * cfg.render.target_sample_rate));
          if (!job.original_audio.empty()) {
            const auto audio = resample(read_wav(job.original_audio), cfg.render.target_sample_rate);
            write_wav(audio, out / "audio" / (job.track_id + ".wav"));
            n_samples = audio.size();
          }
          const auto labels = make_frame_labels(*job.tab, frames_for_samples(n_samples, cfg.render.hop), cfg.render);
          write_labels(labels, out / "labels" / (job.track_id + ".csv"));
        }
      } catch (const std::exception& e) {
        errors[k] = job.track_id + ": " + e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(run);
    run();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("rendering failed for " + e);
  }

  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.track_id < b.track_id; });
  write_text(out / "manifest.json", serialize_manifest(manifest));
  write_text(out / "config.resolved.json", resolved_config(cfg).dump(2) + "\n");
  return manifest;
}

ManifestCheck validate_manifest(const fs::path& manifest_path) {
  const auto m = parse_manifest(read_text(manifest_path));
  const fs::path base = manifest_path.parent_path();
  ManifestCheck check;
  check.n_tracks = m.entries.size();
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    const std::string tag = "'" + e.track_id + "': ";
    if (!ids.insert(e.track_id).second) check.problems.push_back(tag + "duplicate track id");
    if (e.fold && (*e.fold < 0 || *e.fold >= kNumFolds)) check.problems.push_back(tag + "fold outside 0..5");
    if (e.origin != Origin::kReal && e.render_log_path.empty()) {
      check.problems.push_back(tag + "synthetic entry without a render log");
    }
    if (!e.render_log_path.empty() && !fs::is_regular_file(base / e.render_log_path)) {
      check.problems.push_back(tag + "render log missing");
    }
    std::optional<std::size_t> frames;
    if (!e.audio_path.empty()) {
      try {
        const auto info = read_wav_info(base / e.audio_path);
        if (info.sample_rate != std::lround(m.cfg_snapshot.target_sample_rate)) {
          check.problems.push_back(tag + "audio at " + std::to_string(info.sample_rate) + " Hz");
        }
        ++check.n_audio;
        check.total_seconds += static_cast<double>(info.n_frames) / info.sample_rate;
        frames = frames_for_samples(info.n_frames, m.cfg_snapshot.hop);
      } catch (const Error& err) {
        check.problems.push_back(tag + err.what());
      }
    }
    try {
      const GridDefaults grid{m.cfg_snapshot.hop, m.cfg_snapshot.target_sample_rate, m.cfg_snapshot.max_fret};
      const auto labels = read_labels(base / e.labels_path, grid).labels;
      if (labels.hop() != grid.hop || labels.sample_rate() != grid.sample_rate) {
        check.problems.push_back(tag + "label grid differs from the manifest config");
      }
      if (frames && labels.n_frames() != *frames) {
        check.problems.push_back(tag + "label frames " + std::to_string(labels.n_frames()) + " != audio frames " +
                                 std::to_string(*frames));
      }
    } catch (const Error& err) {
      check.problems.push_back(tag + err.what());
    }
  }
  return check;
}

DurationSummary summarize_audio_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  DurationSummary s;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (!de.is_regular_file() || de.path().extension() != ".wav") continue;
    const auto info = read_wav_info(de.path());
    ++s.n_tracks;
    s.total_seconds += static_cast<double>(info.n_frames) / info.sample_rate;
  }
  if (s.n_tracks > 0) s.mean_seconds = s.total_seconds / static_cast<double>(s.n_tracks);
  return s;
}

}  // namespace tabsynth
