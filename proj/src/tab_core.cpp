#include "tabsynth/tab_core.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tabsynth/detail/text.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

using nlohmann::json;

// Float noise tolerated when comparing note boundaries (seconds).
constexpr double kTimeEpsilon = 1e-9;

std::string string_key(int s) { return "string_" + std::to_string(s); }

void check_string(int string) {
  if (string < 1 || string > kNumStrings) {
    throw BoundsError("string " + std::to_string(string) + " outside 1..6");
  }
}

int line_of_byte(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Enforces per-string monophony after canonical ordering.
void resolve_overlaps(Tablature& tab, OverlapPolicy policy) {
  canonicalize(tab);
  std::vector<bool> drop(tab.events.size(), false);
  for (int s = 1; s <= kNumStrings; ++s) {
    std::size_t prev = tab.events.size();
    for (std::size_t i = 0; i < tab.events.size(); ++i) {
      if (tab.events[i].string != s) continue;
      if (prev != tab.events.size()) {
        NoteEvent& p = tab.events[prev];
        const NoteEvent& cur = tab.events[i];
        if (cur.onset < p.offset() - kTimeEpsilon) {
          if (policy == OverlapPolicy::kReject) {
            std::ostringstream msg;
            msg << "notes overlap on string " << s << ": [" << p.onset << ", " << p.offset()
                << ") and [" << cur.onset << ", " << cur.offset() << ")";
            throw ValidationError(msg.str());
          }
          p.duration = cur.onset - p.onset;
          if (p.duration <= 0.0) drop[prev] = true;
        }
      }
      prev = i;
    }
  }
  std::vector<NoteEvent> kept;
  kept.reserve(tab.events.size());
  for (std::size_t i = 0; i < tab.events.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(tab.events[i]));
  }
  tab.events = std::move(kept);
}

void finish_parse(Tablature& tab, const ParseOptions& opts) {
  resolve_overlaps(tab, opts.overlap);
  for (const auto& e : tab.events) tab.total_duration = std::max(tab.total_duration, e.offset());
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field", 0, where + key);
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("wrong type (") + it->type_name() + ")", 0, where + key);
  }
}

}  // namespace

Tuning::Tuning(std::array<int, kNumStrings> open_midi, std::string name)
    : open_(open_midi), name_(std::move(name)) {
  for (int m : open_) {
    if (m < 21 || m > 108) {
      throw BoundsError("tuning pitch " + std::to_string(m) + " outside 21..108");
    }
  }
}

Tuning Tuning::standard() { return Tuning({64, 59, 55, 50, 45, 40}, "standard"); }

int Tuning::open_midi(int string) const {
  check_string(string);
  return open_[static_cast<std::size_t>(string - 1)];
}

bool Tuning::is_standard() const noexcept { return open_ == standard().open_; }

int note_to_midi(int string, int fret, const Tuning& tuning, int max_fret) {
  check_string(string);
  if (fret < 0 || fret > max_fret) {
    throw BoundsError("fret " + std::to_string(fret) + " outside 0.." + std::to_string(max_fret));
  }
  return tuning.open_midi(string) + fret;
}

void canonicalize(Tablature& tab) {
  std::stable_sort(tab.events.begin(), tab.events.end(), [](const NoteEvent& a, const NoteEvent& b) {
    if (a.onset != b.onset) return a.onset < b.onset;
    if (a.string != b.string) return a.string < b.string;
    return a.fret < b.fret;
  });
}

Tablature parse_note_annotations(std::string_view text, const ParseOptions& opts) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of_byte(text, e.byte), {});
  }
  if (!doc.is_object()) throw ParseError("annotation document must be a JSON object", 1);

  Tablature tab;
  if (doc.contains("source_id")) tab.source_id = require<std::string>(doc, "source_id", "");
  if (doc.contains("total_duration")) {
    tab.total_duration = require<double>(doc, "total_duration", "");
    if (!(tab.total_duration >= 0.0)) throw ParseError("must be >= 0", 0, "total_duration");
  }
  if (doc.contains("tuning")) {
    const auto t = require<std::vector<int>>(doc, "tuning", "");
    if (t.size() != kNumStrings) throw ParseError("expected 6 pitches", 0, "tuning");
    std::array<int, kNumStrings> open{};
    std::copy(t.begin(), t.end(), open.begin());
    try {
      tab.tuning = Tuning(open);
    } catch (const BoundsError& e) {
      throw ParseError(e.what(), 0, "tuning");
    }
    if (tab.tuning.is_standard()) tab.tuning = Tuning::standard();
  }

  for (int s = 1; s <= kNumStrings; ++s) {
    const auto key = string_key(s);
    const auto it = doc.find(key);
    if (it == doc.end()) continue;
    if (!it->is_array()) throw ParseError("expected an array", 0, key);
    const int open = tab.tuning.open_midi(s);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& rec = (*it)[i];
      const std::string where = key + "[" + std::to_string(i) + "].";
      if (!rec.is_object()) throw ParseError("expected an object", 0, key + "[" + std::to_string(i) + "]");
      NoteEvent ev;
      ev.string = s;
      ev.onset = require<double>(rec, "time", where);
      ev.duration = require<double>(rec, "duration", where);
      const int midi = require<int>(rec, "midi", where);
      if (!(ev.onset >= 0.0)) throw ParseError("onset must be >= 0", 0, where + "time");
      if (!(ev.duration > 0.0)) throw ParseError("duration must be > 0", 0, where + "duration");
      ev.fret = midi - open;
      if (ev.fret < 0 || ev.fret > opts.max_fret) {
        throw ValidationError("note " + key + "[" + std::to_string(i) + "] (midi " + std::to_string(midi) +
                              ", t=" + detail::format_double(ev.onset) + ") needs fret " +
                              std::to_string(ev.fret) + ", outside 0.." + std::to_string(opts.max_fret));
      }
      if (rec.contains("velocity_tag") && rec["velocity_tag"].is_string()) {
        ev.velocity_tag = rec["velocity_tag"].get<std::string>();
      }
      tab.events.push_back(std::move(ev));
    }
  }
  finish_parse(tab, opts);
  return tab;
}

Tablature parse_simple_tab(std::string_view text, std::string source_id, const ParseOptions& opts) {
  Tablature tab;
  tab.source_id = std::move(source_id);
  int line_no = 0;
  for (std::string_view raw : detail::lines(text)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const auto line = detail::trim(raw);
    if (line.empty()) continue;

    if (const auto colon = line.find(':'); colon != std::string_view::npos) {
      const auto key = detail::trim(line.substr(0, colon));
      const auto value = detail::trim(line.substr(colon + 1));
      if (key == "tuning") {
        const auto fields = detail::split_ws(value);
        if (fields.size() != kNumStrings) throw ParseError("tuning needs 6 pitches", line_no, "tuning");
        std::array<int, kNumStrings> open{};
        for (std::size_t i = 0; i < fields.size(); ++i) {
          const auto v = detail::to_int<int>(fields[i]);
          if (!v) throw ParseError("bad pitch '" + std::string(fields[i]) + "'", line_no, "tuning");
          open[i] = *v;
        }
        try {
          tab.tuning = Tuning(open);
        } catch (const BoundsError& e) {
          throw ParseError(e.what(), line_no, "tuning");
        }
        if (tab.tuning.is_standard()) tab.tuning = Tuning::standard();
      } else if (key == "duration") {
        const auto v = detail::to_double(value);
        if (!v || *v < 0.0) throw ParseError("bad duration '" + std::string(value) + "'", line_no, "duration");
        tab.total_duration = *v;
      } else {
        throw ParseError("unknown header '" + std::string(key) + "'", line_no);
      }
      continue;
    }

    const auto fields = detail::split_ws(line);
    if (fields.size() != 4) {
      throw ParseError("expected '<onset> <duration> <string> <fret>'", line_no);
    }
    NoteEvent ev;
    const auto onset = detail::to_double(fields[0]);
    const auto dur = detail::to_double(fields[1]);
    const auto string = detail::to_int<int>(fields[2]);
    const auto fret = detail::to_int<int>(fields[3]);
    if (!onset || *onset < 0.0) throw ParseError("bad onset '" + std::string(fields[0]) + "'", line_no, "onset");
    if (!dur || *dur <= 0.0) throw ParseError("bad duration '" + std::string(fields[1]) + "'", line_no, "duration");
    if (!string || *string < 1 || *string > kNumStrings) {
      throw ParseError("string '" + std::string(fields[2]) + "' outside 1..6", line_no, "string");
    }
    if (!fret || *fret < 0 || *fret > opts.max_fret) {
      throw ParseError("fret '" + std::string(fields[3]) + "' outside 0.." + std::to_string(opts.max_fret),
                       line_no, "fret");
    }
    ev.onset = *onset;
    ev.duration = *dur;
    ev.string = *string;
    ev.fret = *fret;
    tab.events.push_back(std::move(ev));
  }
  finish_parse(tab, opts);
  return tab;
}

std::string serialize_note_annotations(const Tablature& tab) {
  json doc;
  doc["source_id"] = tab.source_id;
  doc["total_duration"] = tab.total_duration;
  doc["tuning"] = tab.tuning.open_midi();
  for (int s = 1; s <= kNumStrings; ++s) {
    json notes = json::array();
    for (const auto& e : tab.events) {
      if (e.string != s) continue;
      json rec{{"time", e.onset}, {"duration", e.duration}, {"midi", tab.tuning.open_midi(s) + e.fret}};
      if (e.velocity_tag) rec["velocity_tag"] = *e.velocity_tag;
      notes.push_back(std::move(rec));
    }
    doc[string_key(s)] = std::move(notes);
  }
  return doc.dump(2) + "\n";
}

std::string serialize_simple_tab(const Tablature& tab) {
  std::string out;
  if (!tab.source_id.empty()) out += "# source: " + tab.source_id + "\n";
  out += "tuning:";
  for (int m : tab.tuning.open_midi()) out += " " + std::to_string(m);
  out += "\nduration: " + detail::format_double(tab.total_duration) + "\n";
  for (const auto& e : tab.events) {
    out += detail::format_double(e.onset) + " " + detail::format_double(e.duration) + " " +
           std::to_string(e.string) + " " + std::to_string(e.fret) + "\n";
  }
  return out;
}

Tablature load_tablature(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::filesystem::path p(path);
  try {
    if (p.extension() == ".json") {
      auto tab = parse_note_annotations(buf.str(), opts);
      if (tab.source_id.empty()) tab.source_id = p.stem().string();
      return tab;
    }
    return parse_simple_tab(buf.str(), p.stem().string(), opts);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<Violation> validate_tablature(const Tablature& tab, int max_fret) {
  std::vector<Violation> out;
  double max_end = 0.0;
  for (std::size_t i = 0; i < tab.events.size(); ++i) {
    const auto& e = tab.events[i];
    if (!(e.onset >= 0.0)) out.push_back({"onset-negative", {i}, "onset " + detail::format_double(e.onset)});
    if (!(e.duration > 0.0)) {
      out.push_back({"duration-nonpositive", {i}, "duration " + detail::format_double(e.duration)});
    }
    if (e.string < 1 || e.string > kNumStrings) {
      out.push_back({"string-out-of-range", {i}, "string " + std::to_string(e.string)});
    }
    if (e.fret < 0 || e.fret > max_fret) {
      out.push_back({"fret-out-of-range", {i}, "fret " + std::to_string(e.fret)});
    }
    max_end = std::max(max_end, e.offset());
  }
  if (max_end > tab.total_duration + kTimeEpsilon) {
    out.push_back({"exceeds-total-duration", {}, "last offset " + detail::format_double(max_end) +
                                                     " > total_duration " + detail::format_double(tab.total_duration)});
  }
  for (int s = 1; s <= kNumStrings; ++s) {
    std::size_t prev = tab.events.size();
    for (std::size_t i = 0; i < tab.events.size(); ++i) {
      if (tab.events[i].string != s) continue;
      if (prev != tab.events.size()) {
        const auto& p = tab.events[prev];
        const auto& c = tab.events[i];
        if (c.onset < p.onset) {
          out.push_back({"string-unsorted", {prev, i}, "string " + std::to_string(s)});
        } else if (c.onset < p.offset() - kTimeEpsilon) {
          out.push_back({"string-overlap", {prev, i}, "string " + std::to_string(s)});
        }
      }
      prev = i;
    }
  }
  return out;
}

}  // namespace tabsynth
