#include "tabsynth/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tabsynth/detail/text.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {

void RenderConfig::validate() const {
  if (!(target_sample_rate > 0.0)) throw ValidationError("target_sample_rate must be > 0");
  if (hop < 1) throw ValidationError("hop must be >= 1");
  if (!(fade_out_ms >= 0.0)) throw ValidationError("fade_out_ms must be >= 0");
  if (!(normalization_peak > 0.0 && normalization_peak <= 1.0)) {
    throw ValidationError("normalization_peak must be in (0, 1]");
  }
  if (max_fret < 0) throw ValidationError("max_fret must be >= 0");
}

LabelTensor::LabelTensor(std::size_t n_frames, int hop, double sample_rate, int max_fret)
    : n_frames_(n_frames), hop_(hop), sample_rate_(sample_rate), max_fret_(max_fret),
      classes_(n_frames * kNumStrings, 0) {
  if (hop < 1) throw ValidationError("hop must be >= 1");
  if (!(sample_rate > 0.0)) throw ValidationError("sample rate must be > 0");
}

std::size_t LabelTensor::index(int string, std::size_t frame) const {
  if (string < 1 || string > kNumStrings) throw BoundsError("string " + std::to_string(string) + " outside 1..6");
  if (frame >= n_frames_) throw BoundsError("frame " + std::to_string(frame) + " outside grid");
  return static_cast<std::size_t>(string - 1) * n_frames_ + frame;
}

void LabelTensor::set(int string, std::size_t frame, int cls) {
  if (cls < 0 || cls > max_fret_ + 1) {
    throw BoundsError("class " + std::to_string(cls) + " outside 0.." + std::to_string(max_fret_ + 1));
  }
  classes_[index(string, frame)] = cls;
}

LabelTensor make_frame_labels(const Tablature& tab, std::size_t n_frames, const RenderConfig& cfg) {
  LabelTensor labels(n_frames, cfg.hop, cfg.target_sample_rate, cfg.max_fret);
  const double grid_end = labels.frame_time(n_frames);
  const double frames_per_second = cfg.target_sample_rate / cfg.hop;
  for (std::size_t i = 0; i < tab.events.size(); ++i) {
    const auto& e = tab.events[i];
    if (e.string < 1 || e.string > kNumStrings || e.fret < 0 || e.fret > cfg.max_fret) {
      throw BoundsError("event " + std::to_string(i) + " has string " + std::to_string(e.string) + " fret " +
                        std::to_string(e.fret));
    }
    if (e.onset >= grid_end) {
      throw BoundsError("event " + std::to_string(i) + " starts at " + detail::format_double(e.onset) +
                        " s, past the label grid end " + detail::format_double(grid_end) + " s");
    }
    // Estimate the first frame, then settle it against the exact predicate.
    auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(e.onset * frames_per_second)));
    while (k > 0 && labels.frame_time(k - 1) >= e.onset) --k;
    while (k < n_frames && labels.frame_time(k) < e.onset) ++k;
    for (; k < n_frames && labels.frame_time(k) < e.offset(); ++k) labels.set(e.string, k, e.fret + 1);
  }
  return labels;
}

Rendered render_performance(const Tablature& tab, const BankIndex& bank, const RenderConfig& cfg,
                            std::uint64_t track_seed, const SampleStore* store) {
  cfg.validate();
  for (const auto& v : validate_tablature(tab, cfg.max_fret)) {
    if (v.rule == "exceeds-total-duration") continue;  // handled by growing the buffer
    throw ValidationError("tablature '" + tab.source_id + "': " + v.rule + " (" + v.detail + ")");
  }
  std::set<Position> missing;
  for (const auto& e : tab.events) {
    if (!bank.covers({e.string, e.fret})) missing.insert({e.string, e.fret});
  }
  if (!missing.empty()) {
    std::string msg = "bank does not cover:";
    for (const auto& p : missing) msg += " (" + std::to_string(p.string) + "," + std::to_string(p.fret) + ")";
    throw CoverageError(msg);
  }
  if (store && store->sample_rate() != cfg.target_sample_rate) {
    throw ValidationError("sample store rate differs from target rate");
  }

  const double rate = cfg.target_sample_rate;
  const auto fade = static_cast<std::size_t>(std::llround(cfg.fade_out_ms / 1000.0 * rate));
  std::map<std::string, AudioBuffer> local;
  auto audio_for = [&](const ToneSample& s) -> const AudioBuffer& {
    if (store) return store->at(s.id);
    auto it = local.find(s.id);
    if (it == local.end()) it = local.emplace(s.id, resample(read_wav(s.path), rate)).first;
    return it->second;
  };

  Rendered out;
  Rng rng(track_seed);
  std::vector<double> mix(static_cast<std::size_t>(std::llround(tab.total_duration * rate)), 0.0);
  const std::size_t nominal = mix.size();
  for (std::size_t i = 0; i < tab.events.size(); ++i) {
    const auto& e = tab.events[i];
    const ToneSample& chosen = select_sample(bank, e.string, e.fret, rng);
    const AudioBuffer& tone = audio_for(chosen);
    const auto onset = static_cast<std::size_t>(std::llround(e.onset * rate));
    const auto wanted = static_cast<std::size_t>(std::llround((e.duration + cfg.fade_out_ms / 1000.0) * rate));
    const std::size_t length = std::min(tone.size(), wanted);
    if (onset + length > mix.size()) mix.resize(onset + length, 0.0);
    const std::size_t fade_len = std::min(fade, length);
    const std::size_t fade_start = length - fade_len;
    for (std::size_t j = 0; j < length; ++j) {
      double g = 1.0;
      if (j >= fade_start) g = 1.0 - static_cast<double>(j - fade_start + 1) / static_cast<double>(fade_len);
      mix[onset + j] += g * tone.samples[j];
    }
    out.log.records.push_back({i, chosen.id, onset, length});
  }
  if (mix.size() > nominal) {
    out.log.warnings.push_back("events extend past total_duration; buffer grown from " + std::to_string(nominal) +
                               " to " + std::to_string(mix.size()) + " samples");
  }

  double peak = 0.0;
  for (double v : mix) peak = std::max(peak, std::abs(v));
  if (peak > cfg.normalization_peak) out.log.gain = cfg.normalization_peak / peak;

  out.audio.sample_rate = rate;
  out.audio.samples.resize(mix.size());
  for (std::size_t j = 0; j < mix.size(); ++j) out.audio.samples[j] = static_cast<float>(mix[j] * out.log.gain);
  out.labels = make_frame_labels(tab, frames_for_samples(mix.size(), cfg.hop), cfg);
  return out;
}

std::string serialize_labels(const LabelTensor& labels, bool grid_header) {
  std::string out;
  if (grid_header) {
    out += "# hop=" + std::to_string(labels.hop()) + " sr=" + std::to_string(std::llround(labels.sample_rate())) +
           " max_fret=" + std::to_string(labels.max_fret()) + "\n";
  }
  out += "frame";
  for (int s = 1; s <= kNumStrings; ++s) out += ",string_" + std::to_string(s);
  out += "\n";
  for (std::size_t k = 0; k < labels.n_frames(); ++k) {
    out += std::to_string(k);
    for (int s = 1; s <= kNumStrings; ++s) out += "," + std::to_string(labels.at(s, k));
    out += "\n";
  }
  return out;
}

ParsedLabels parse_labels(std::string_view csv, const GridDefaults& defaults) {
  int hop = defaults.hop;
  double sr = defaults.sample_rate;
  int max_fret = defaults.max_fret;
  bool had_header = false;
  bool have_columns = false;
  std::vector<std::array<int, kNumStrings>> rows;
  int line_no = 0;
  for (const auto raw : detail::lines(csv)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (const auto tok : detail::split_ws(line.substr(1))) {
        const auto eq = tok.find('=');
        if (eq == std::string_view::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto value = detail::to_int<int>(tok.substr(eq + 1));
        if (key != "hop" && key != "sr" && key != "max_fret") continue;
        if (!value || *value < (key == "max_fret" ? 0 : 1)) {
          throw ParseError("bad grid value '" + std::string(tok) + "'", line_no, std::string(key));
        }
        if (key == "hop") hop = *value;
        if (key == "sr") sr = *value;
        if (key == "max_fret") max_fret = *value;
        had_header = true;
      }
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (!have_columns) {
      bool ok = fields.size() == kNumStrings + 1 && detail::trim(fields[0]) == "frame";
      for (int s = 1; ok && s <= kNumStrings; ++s) {
        ok = detail::trim(fields[static_cast<std::size_t>(s)]) == "string_" + std::to_string(s);
      }
      if (!ok) throw ParseError("expected header 'frame,string_1,...,string_6'", line_no);
      have_columns = true;
      continue;
    }
    if (fields.size() != kNumStrings + 1) throw ParseError("expected 7 fields", line_no);
    const auto frame = detail::to_int<long long>(fields[0]);
    if (!frame || *frame != static_cast<long long>(rows.size())) {
      throw ParseError("frame index out of sequence", line_no, "frame");
    }
    std::array<int, kNumStrings> row{};
    for (int s = 1; s <= kNumStrings; ++s) {
      const auto v = detail::to_int<int>(fields[static_cast<std::size_t>(s)]);
      if (!v || *v < 0 || *v > max_fret + 1) {
        throw ParseError("class outside 0.." + std::to_string(max_fret + 1), line_no, "string_" + std::to_string(s));
      }
      row[static_cast<std::size_t>(s - 1)] = *v;
    }
    rows.push_back(row);
  }
  if (!have_columns) throw ParseError("missing column header");
  ParsedLabels out{LabelTensor(rows.size(), hop, sr, max_fret), had_header};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int s = 1; s <= kNumStrings; ++s) out.labels.set(s, k, rows[k][static_cast<std::size_t>(s - 1)]);
  }
  return out;
}

ParsedLabels read_labels(const std::filesystem::path& path, const GridDefaults& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_labels(buf.str(), defaults);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_labels(const LabelTensor& labels, const std::filesystem::path& path, bool grid_header) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_labels(labels, grid_header);
}

std::string serialize_render_log(const RenderLog& log) {
  nlohmann::json doc;
  doc["gain"] = log.gain;
  doc["warnings"] = log.warnings;
  auto& recs = doc["records"] = nlohmann::json::array();
  for (const auto& r : log.records) {
    recs.push_back({{"event_index", r.event_index},
                    {"sample_id", r.sample_id},
                    {"onset_sample", r.onset_sample},
                    {"rendered_length", r.rendered_length}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace tabsynth
