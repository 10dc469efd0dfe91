#include "tabsynth/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "tabsynth/error.hpp"

namespace tabsynth {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct Layout {
  WavInfo info;
  std::uint16_t format = 0;
  std::size_t data_offset = 0;
};

Layout parse_header(const std::uint8_t* data, std::size_t size, bool need_data) {
  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  Layout lay;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk = le32(data + pos + 4);
    const std::uint8_t* body = data + pos + 8;
    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk < 16 || pos + 8 + chunk > size) throw FormatError("truncated fmt chunk");
      lay.format = le16(body);
      lay.info.channels = le16(body + 2);
      lay.info.sample_rate = static_cast<int>(le32(body + 4));
      lay.info.bits_per_sample = le16(body + 14);
      if (lay.format == kFormatExtensible) {
        if (chunk < 26) throw FormatError("truncated WAVE_FORMAT_EXTENSIBLE header");
        lay.format = le16(body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      std::size_t bytes = chunk;
      if (pos + 8 + bytes > size) {
        if (need_data) throw FormatError("truncated data chunk");
        bytes = size - pos - 8;
      }
      lay.data_offset = pos + 8;
      const std::size_t frame_bytes =
          static_cast<std::size_t>(lay.info.channels) * static_cast<std::size_t>(lay.info.bits_per_sample / 8);
      if (frame_bytes == 0) throw FormatError("invalid frame size");
      lay.info.n_frames = bytes / frame_bytes;
      break;
    }
    pos += 8 + chunk + (chunk & 1u);
  }
  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (lay.data_offset == 0) throw FormatError("missing data chunk");
  if (lay.info.channels < 1) throw FormatError("no channels");
  if (lay.info.sample_rate <= 0) throw FormatError("invalid sample rate");
  lay.info.is_float = lay.format == kFormatFloat;
  const int bits = lay.info.bits_per_sample;
  if (lay.format == kFormatPcm) {
    if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
      throw FormatError("unsupported PCM bit depth " + std::to_string(bits));
    }
  } else if (lay.format == kFormatFloat) {
    if (bits != 32 && bits != 64) throw FormatError("unsupported float bit depth " + std::to_string(bits));
  } else {
    throw FormatError("unsupported WAV format tag " + std::to_string(lay.format));
  }
  return lay;
}

double decode_sample(const std::uint8_t* p, const WavInfo& info) {
  if (info.is_float) {
    if (info.bits_per_sample == 32) {
      float f;
      std::uint32_t u = le32(p);
      std::memcpy(&f, &u, 4);
      return f;
    }
    std::uint64_t u = static_cast<std::uint64_t>(le32(p)) | static_cast<std::uint64_t>(le32(p + 4)) << 32;
    double d;
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (info.bits_per_sample) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | p[1] << 8 | p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  if (limit > 0) {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  } else {
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  return bytes;
}

double kaiser(double r, double beta) {
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Taps for an output located `frac` input samples after input index `base`;
// tap j weighs input base - half + 1 + j. Normalized to unit DC gain.
void fill_taps(std::vector<double>& taps, double frac, int half, double cutoff, const ResamplerSpec& spec) {
  const double width = spec.zero_crossings / cutoff;
  taps.resize(static_cast<std::size_t>(2 * half));
  double sum = 0.0;
  for (int j = 0; j < 2 * half; ++j) {
    const double d = static_cast<double>(j - half + 1) - frac;
    const double h = cutoff * sinc(cutoff * d) * kaiser(d / width, spec.kaiser_beta);
    taps[static_cast<std::size_t>(j)] = h;
    sum += h;
  }
  for (auto& t : taps) t /= sum;
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  auto bytes = read_bytes(path, 1 << 16);
  const auto size = std::filesystem::file_size(path);
  // Header scan only: derive the frame count from the declared data size.
  Layout lay = parse_header(bytes.data(), bytes.size(), false);
  const std::uint32_t declared = le32(bytes.data() + lay.data_offset - 4);
  const std::size_t frame_bytes =
      static_cast<std::size_t>(lay.info.channels) * static_cast<std::size_t>(lay.info.bits_per_sample / 8);
  if (lay.data_offset + declared > size) throw FormatError(path.string() + ": truncated data chunk");
  lay.info.n_frames = declared / frame_bytes;
  return lay.info;
}

AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes) {
  const Layout lay = parse_header(bytes.data(), bytes.size(), true);
  const auto& info = lay.info;
  const std::size_t width = static_cast<std::size_t>(info.bits_per_sample / 8);
  const std::size_t channels = static_cast<std::size_t>(info.channels);
  AudioBuffer out;
  out.sample_rate = info.sample_rate;
  out.samples.resize(info.n_frames);
  const std::uint8_t* p = bytes.data() + lay.data_offset;
  for (std::size_t i = 0; i < info.n_frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += decode_sample(p, info);
      p += width;
    }
    out.samples[i] = static_cast<float>(acc / static_cast<double>(channels));
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio) {
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, rate);
  put32(out, rate * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (float x : audio.samples) {
    const double clipped = std::clamp(static_cast<double>(x), -1.0, 1.0);
    const long q = std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const AudioBuffer& audio, const std::filesystem::path& path) {
  const auto bytes = encode_wav(audio);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

AudioBuffer resample(const AudioBuffer& audio, double target_rate, const ResamplerSpec& spec) {
  if (!(target_rate > 0.0) || !(audio.sample_rate > 0.0)) throw ValidationError("sample rates must be positive");
  if (target_rate == audio.sample_rate) return audio;

  const double ratio = target_rate / audio.sample_rate;
  const auto n_in = static_cast<long>(audio.samples.size());
  const auto n_out = static_cast<long>(std::llround(static_cast<double>(n_in) * ratio));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(std::max(0L, n_out)));
  if (n_in == 0 || n_out <= 0) return out;

  const double cutoff = std::min(1.0, ratio);
  const int half = static_cast<int>(std::ceil(spec.zero_crossings / cutoff)) + 1;
  const auto& x = audio.samples;
  auto at = [&](long i) { return static_cast<double>(x[static_cast<std::size_t>(std::clamp(i, 0L, n_in - 1))]); };

  // Integer rates share a finite set of fractional phases: tabulate them.
  const bool integral = std::floor(target_rate) == target_rate && std::floor(audio.sample_rate) == audio.sample_rate;
  long up = 0;
  long down = 0;
  if (integral) {
    const auto src = static_cast<long>(audio.sample_rate);
    const auto dst = static_cast<long>(target_rate);
    const long g = std::gcd(src, dst);
    up = dst / g;
    down = src / g;
  }
  const bool tabulate = integral && up <= 4096;

  std::vector<std::vector<double>> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up));
    for (long p = 0; p < up; ++p) {
      fill_taps(table[static_cast<std::size_t>(p)], static_cast<double>(p) / static_cast<double>(up), half, cutoff,
                spec);
    }
  }
  std::vector<double> scratch;
  for (long n = 0; n < n_out; ++n) {
    long base = 0;
    const std::vector<double>* taps = nullptr;
    if (tabulate) {
      const long num = n * down;
      base = num / up;
      taps = &table[static_cast<std::size_t>(num % up)];
    } else {
      const double pos = static_cast<double>(n) / ratio;
      base = static_cast<long>(std::floor(pos));
      fill_taps(scratch, pos - static_cast<double>(base), half, cutoff, spec);
      taps = &scratch;
    }
    double acc = 0.0;
    const long first = base - half + 1;
    for (std::size_t j = 0; j < taps->size(); ++j) acc += (*taps)[j] * at(first + static_cast<long>(j));
    out.samples[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace tabsynth
