#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabsynth {

inline constexpr int kNumStrings = 6;
inline constexpr int kDefaultMaxFret = 19;

/// Open-string MIDI pitches, string 1 (highest) first.
class Tuning {
 public:
  Tuning(std::array<int, kNumStrings> open_midi, std::string name = "custom");

  static Tuning standard();

  int open_midi(int string) const;  // string in 1..6
  const std::array<int, kNumStrings>& open_midi() const noexcept { return open_; }
  const std::string& name() const noexcept { return name_; }
  bool is_standard() const noexcept;

  friend bool operator==(const Tuning& a, const Tuning& b) { return a.open_ == b.open_; }

 private:
  std::array<int, kNumStrings> open_;
  std::string name_;
};

struct NoteEvent {
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds
  int string = 1;         // 1..6
  int fret = 0;
  std::optional<std::string> velocity_tag;

  double offset() const noexcept { return onset + duration; }
  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct Tablature {
  std::vector<NoteEvent> events;
  Tuning tuning = Tuning::standard();
  double total_duration = 0.0;
  std::string source_id;

  friend bool operator==(const Tablature&, const Tablature&) = default;
};

enum class OverlapPolicy { kReject, kTruncate };

struct ParseOptions {
  int max_fret = kDefaultMaxFret;
  OverlapPolicy overlap = OverlapPolicy::kReject;
};

int note_to_midi(int string, int fret, const Tuning& tuning, int max_fret = kDefaultMaxFret);

/// Parses the JSON note-annotation document: a header with `source_id`,
/// `total_duration` and `tuning`, plus arrays `string_1`..`string_6` of
/// `{time, duration, midi}` records.
Tablature parse_note_annotations(std::string_view text, const ParseOptions& opts = {});

/// Parses the line-based tab format: `#` comments, `tuning:` and `duration:`
/// header lines, and `<onset> <duration> <string> <fret>` event lines.
Tablature parse_simple_tab(std::string_view text, std::string source_id = {},
                           const ParseOptions& opts = {});

std::string serialize_note_annotations(const Tablature& tab);
std::string serialize_simple_tab(const Tablature& tab);

/// Dispatches on extension: `.json` annotations, anything else simple tab.
/// The source id defaults to the file stem when the document has none.
Tablature load_tablature(const std::string& path, const ParseOptions& opts = {});

struct Violation {
  std::string rule;  // e.g. "fret-out-of-range"
  std::vector<std::size_t> events;
  std::string detail;
};

std::vector<Violation> validate_tablature(const Tablature& tab, int max_fret = kDefaultMaxFret);

/// Sorts events by (onset, string, fret); this satisfies the per-string
/// ordering invariant and gives every Tablature one canonical order.
void canonicalize(Tablature& tab);

}  // namespace tabsynth
