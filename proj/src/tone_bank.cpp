#include "tabsynth/tone_bank.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "tabsynth/detail/text.hpp"
#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// One CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> parse_csv_row(std::string_view line, int line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? field : std::string(detail::trim(field)));
      field.clear();
      was_quoted = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  out.push_back(was_quoted ? field : std::string(detail::trim(field)));
  return out;
}

constexpr std::array<std::string_view, 7> kColumns{"id", "relpath", "string", "fret", "effect", "source",
                                                   "sample_rate"};

}  // namespace

BankIndex::BankIndex(std::vector<ToneSample> samples, std::set<std::string> excluded_effects, int max_fret)
    : samples_(std::move(samples)), excluded_(std::move(excluded_effects)), max_fret_(max_fret) {
  std::sort(samples_.begin(), samples_.end(), [](const ToneSample& a, const ToneSample& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (samples_[i - 1].id == samples_[i].id) throw ValidationError("duplicate sample id '" + samples_[i].id + "'");
  }
  std::erase_if(samples_, [&](const ToneSample& s) { return excluded_.count(s.effect_tag) != 0; });
  for (std::size_t i = 0; i < samples_.size(); ++i) by_position_[{samples_[i].string, samples_[i].fret}].push_back(i);
}

std::vector<Position> BankIndex::missing_positions() const {
  std::vector<Position> out;
  for (int s = 1; s <= kNumStrings; ++s) {
    for (int f = 0; f <= max_fret_; ++f) {
      if (!covers({s, f})) out.push_back({s, f});
    }
  }
  return out;
}

const ToneSample* BankIndex::find(std::string_view id) const {
  const auto it = std::lower_bound(samples_.begin(), samples_.end(), id,
                                   [](const ToneSample& s, std::string_view v) { return s.id < v; });
  return it != samples_.end() && it->id == id ? &*it : nullptr;
}

BankIndex scan_bank(std::string_view manifest_csv, const std::filesystem::path& audio_root,
                    const std::set<std::string>& excluded_effects, int max_fret) {
  std::set<std::string> excluded;
  for (const auto& e : excluded_effects) excluded.insert(lower(e));

  const auto rows = detail::lines(manifest_csv);
  std::vector<ToneSample> samples;
  std::set<std::string> seen;
  std::array<std::size_t, kColumns.size()> col{};
  bool have_header = false;
  int line_no = 0;
  for (const auto raw : rows) {
    ++line_no;
    if (detail::trim(raw).empty()) continue;
    const auto fields = parse_csv_row(raw, line_no);
    if (!have_header) {
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) throw ParseError("missing column '" + std::string(kColumns[c]) + "'", line_no);
        col[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }
    auto get = [&](std::size_t c) -> const std::string& {
      if (col[c] >= fields.size()) throw ParseError("too few fields", line_no, std::string(kColumns[c]));
      return fields[col[c]];
    };
    ToneSample s;
    s.id = get(0);
    if (s.id.empty()) throw ParseError("empty id", line_no, "id");
    const auto string = detail::to_int<int>(get(2));
    const auto fret = detail::to_int<int>(get(3));
    const auto rate = detail::to_int<int>(get(6));
    if (!string) throw ParseError("not an integer", line_no, "string");
    if (!fret) throw ParseError("not an integer", line_no, "fret");
    if (!rate) throw ParseError("not an integer", line_no, "sample_rate");
    s.string = *string;
    s.fret = *fret;
    s.sample_rate = *rate;
    s.effect_tag = lower(get(4));
    s.source_tag = get(5);
    s.path = audio_root / get(1);
    const std::string row = "row " + std::to_string(line_no) + " ('" + s.id + "')";
    if (!seen.insert(s.id).second) throw ValidationError(row + ": duplicate sample id");
    if (s.string < 1 || s.string > kNumStrings) {
      throw BoundsError(row + ": string " + std::to_string(s.string) + " outside 1..6");
    }
    if (s.fret < 0 || s.fret > max_fret) {
      throw BoundsError(row + ": fret " + std::to_string(s.fret) + " outside 0.." + std::to_string(max_fret));
    }
    if (s.sample_rate < 8000 || s.sample_rate > 192000) {
      throw BoundsError(row + ": sample rate " + std::to_string(s.sample_rate) + " outside 8000..192000");
    }
    if (excluded.count(s.effect_tag)) continue;
    if (!std::filesystem::is_regular_file(s.path)) {
      throw IoError(row + ": missing audio file " + s.path.string());
    }
    WavInfo info;
    try {
      info = read_wav_info(s.path);
    } catch (const IoError& e) {
      throw FormatError(row + ": " + e.what());
    }
    if (info.sample_rate != s.sample_rate) {
      throw FormatError(row + ": manifest says " + std::to_string(s.sample_rate) + " Hz, file has " +
                        std::to_string(info.sample_rate) + " Hz");
    }
    if (info.n_frames == 0) throw FormatError(row + ": empty audio");
    s.n_samples = info.n_frames;
    samples.push_back(std::move(s));
  }
  return BankIndex(std::move(samples), std::move(excluded), max_fret);
}

BankIndex scan_bank_file(const std::filesystem::path& manifest_path, const std::filesystem::path& audio_root,
                         const std::set<std::string>& excluded_effects, int max_fret) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scan_bank(buf.str(), audio_root, excluded_effects, max_fret);
}

const ToneSample& select_sample(const BankIndex& index, int string, int fret, Rng& rng) {
  const auto it = index.by_position().find({string, fret});
  if (it == index.by_position().end() || it->second.empty()) {
    throw CoverageError("no bank sample for string " + std::to_string(string) + " fret " + std::to_string(fret));
  }
  const auto& candidates = it->second;
  return index.samples()[candidates[uniform_index(rng, candidates.size())]];
}

double midi_to_hz(double midi) { return 440.0 * std::exp2((midi - 69.0) / 12.0); }

PitchEstimate estimate_f0(const AudioBuffer& audio, const F0Options& opts) {
  if (audio.size() < 4096) throw ValidationError("estimate_f0 needs at least 4096 samples");
  const std::size_t w = std::min(audio.size(), opts.window);
  const std::size_t start = (audio.size() - w) / 2;
  std::vector<double> x(w);
  double mean = 0.0;
  for (std::size_t i = 0; i < w; ++i) mean += x[i] = audio.samples[start + i];
  mean /= static_cast<double>(w);
  for (auto& v : x) v -= mean;

  std::vector<double> energy(w + 1, 0.0);  // prefix sums of x^2
  for (std::size_t i = 0; i < w; ++i) energy[i + 1] = energy[i] + x[i] * x[i];

  const double fs = audio.sample_rate;
  const auto min_lag = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(fs / opts.max_hz)));
  const auto max_lag = std::min(static_cast<std::size_t>(std::ceil(fs / opts.min_hz)), w / 2);
  if (min_lag + 1 >= max_lag) return {};

  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t lag = min_lag - 1; lag <= max_lag + 1; ++lag) {
    double acc = 0.0;
    const std::size_t n = w - lag;
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * x[t + lag];
    const double norm = std::sqrt(energy[n] * (energy[w] - energy[lag]));
    r[lag] = norm > 0.0 ? acc / norm : 0.0;
  }

  double best = 0.0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best = std::max(best, r[lag]);
  if (best <= 0.0) return {};

  // The first local maximum close to the global one avoids sub-octave picks.
  std::size_t peak = 0;
  for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
    if (r[lag] >= 0.9 * best && r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) {
      peak = lag;
      break;
    }
  }
  if (peak == 0) return {};

  const double a = r[peak - 1];
  const double b = r[peak];
  const double c = r[peak + 1];
  const double denom = a - 2.0 * b + c;
  const double shift = denom != 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
  const double peak_value = b - 0.25 * (a - c) * shift;
  return {fs / (static_cast<double>(peak) + shift), std::clamp(peak_value, 0.0, 1.0)};
}

std::size_t BankReport::failures() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const SampleCheck& c) { return !c.pass; }));
}

BankReport validate_bank(const BankIndex& index, const Tuning& tuning, double tolerance_cents) {
  BankReport report;
  for (const auto& s : index.samples()) {
    SampleCheck check;
    check.id = s.id;
    check.position = {s.string, s.fret};
    check.expected_midi = tuning.open_midi(s.string) + s.fret;
    try {
      const auto audio = read_wav(s.path);
      const auto est = estimate_f0(audio);
      check.f0_hz = est.f0_hz;
      check.confidence = est.confidence;
      if (est.f0_hz > 0.0) {
        check.cents = 1200.0 * std::log2(est.f0_hz / midi_to_hz(check.expected_midi));
        check.pass = std::abs(check.cents) <= tolerance_cents && est.reliable();
      }
      if (!est.reliable()) check.error = "unreliable pitch estimate";
    } catch (const Error& e) {
      check.error = e.what();
    }
    report.samples.push_back(std::move(check));
  }
  report.missing = index.missing_positions();
  return report;
}

SampleStore::SampleStore(const BankIndex& index, double target_rate, unsigned jobs) : rate_(target_rate) {
  std::vector<std::size_t> all(index.samples().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  load(index, all, jobs);
}

SampleStore::SampleStore(const BankIndex& index, double target_rate, const std::set<Position>& positions,
                         unsigned jobs)
    : rate_(target_rate) {
  std::vector<std::size_t> which;
  for (const auto& p : positions) {
    const auto it = index.by_position().find(p);
    if (it != index.by_position().end()) which.insert(which.end(), it->second.begin(), it->second.end());
  }
  std::sort(which.begin(), which.end());
  load(index, which, jobs);
}

void SampleStore::load(const BankIndex& index, const std::vector<std::size_t>& which, unsigned jobs) {
  std::vector<AudioBuffer> decoded(which.size());
  std::vector<std::string> errors(which.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < which.size(); k = next++) {
      try {
        decoded[k] = resample(read_wav(index.samples()[which[k]].path), rate_);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < std::max(1u, jobs); ++t) pool.emplace_back(work);
    work();
  }
  for (std::size_t k = 0; k < which.size(); ++k) {
    if (!errors[k].empty()) throw IoError("sample '" + index.samples()[which[k]].id + "': " + errors[k]);
    audio_.emplace(index.samples()[which[k]].id, std::move(decoded[k]));
  }
}

const AudioBuffer& SampleStore::at(const std::string& id) const {
  const auto it = audio_.find(id);
  if (it == audio_.end()) throw CoverageError("sample '" + id + "' not loaded");
  return it->second;
}

}  // namespace tabsynth
