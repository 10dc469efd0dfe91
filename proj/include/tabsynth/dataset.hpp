#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tabsynth/renderer.hpp"
#include "tabsynth/tab_core.hpp"

namespace tabsynth {

inline constexpr int kNumFolds = 6;

enum class Origin { kReal, kSynthReproduced, kSynthExternal };
std::string_view to_string(Origin o);
Origin origin_from_string(std::string_view s);

struct ManifestEntry {
  std::string track_id;
  std::string source_path;
  std::string audio_path;       // relative to the manifest; empty when no audio
  std::string labels_path;      // relative to the manifest
  std::string render_log_path;  // synthetic entries only
  std::optional<int> fold;      // empty: training side of every fold
  Origin origin = Origin::kReal;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::string mode;
  std::uint64_t master_seed = 0;
  RenderConfig cfg_snapshot;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> skipped_sources;
  std::string sampling;  // how external sources were chosen
};

std::string serialize_manifest(const DatasetManifest& m);
DatasetManifest parse_manifest(std::string_view text);

enum class BuildMode { kReproduce, kExternal };
enum class FoldScheme { kPlayerPrefix, kFile, kNone };

struct DatasetConfig {
  BuildMode mode = BuildMode::kReproduce;
  std::filesystem::path source_dir;
  std::filesystem::path bank_manifest;
  std::filesystem::path bank_root;
  std::set<std::string> excluded_effects{"delay"};
  RenderConfig render;
  std::size_t external_count = 360;
  FoldScheme fold_scheme = FoldScheme::kPlayerPrefix;
  std::filesystem::path fold_file;
  char group_delimiter = '_';
  std::filesystem::path original_audio_dir;
  OverlapPolicy overlap = OverlapPolicy::kReject;
  // Not part of the resolved config: neither affects the written files.
  std::filesystem::path out_dir;
  unsigned jobs = 1;
};

/// Parses and checks a JSON build config. Unknown keys are rejected and
/// relative paths resolve against `base_dir`.
DatasetConfig parse_dataset_config(std::string_view text, const std::filesystem::path& base_dir = {});
nlohmann::json resolved_config(const DatasetConfig& cfg);

/// Fold i holds the tracks of the i-th group in sorted group order.
std::map<std::string, int> make_folds(const std::vector<std::string>& track_ids,
                                      const std::function<std::string(const std::string&)>& group_key);
/// Group key used for GuitarSet ids such as "00_BN1-129-Eb_comp": the text
/// before the first delimiter.
std::string player_prefix(const std::string& track_id, char delimiter = '_');

/// Renders the dataset into cfg.out_dir and writes manifest.json plus
/// config.resolved.json beside it.
DatasetManifest build_dataset(const DatasetConfig& cfg);

struct ManifestCheck {
  std::vector<std::string> problems;
  std::size_t n_tracks = 0;
  std::size_t n_audio = 0;
  double total_seconds = 0.0;
  bool ok() const { return problems.empty(); }
};

/// Checks manifest invariants against the files on disk.
ManifestCheck validate_manifest(const std::filesystem::path& manifest_path);

struct DurationSummary {
  std::size_t n_tracks = 0;
  double total_seconds = 0.0;
  double mean_seconds = 0.0;
};

/// Durations of every .wav file directly inside `dir`.
DurationSummary summarize_audio_dir(const std::filesystem::path& dir);

}  // namespace tabsynth
