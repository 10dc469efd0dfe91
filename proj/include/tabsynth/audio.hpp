#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tabsynth {

/// Mono audio. Samples are nominally in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  double sample_rate = 22050.0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
};

struct WavInfo {
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::size_t n_frames = 0;
};

/// Reads the RIFF header only.
WavInfo read_wav_info(const std::filesystem::path& path);

/// Reads PCM (8/16/24/32-bit integer) or IEEE float WAV. Multichannel files
/// are downmixed by averaging channels.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes);

/// Writes 16-bit PCM mono. Input is clipped to [-1, 1] and quantized as
/// round(x * 32768), saturating at 32767.
void write_wav(const AudioBuffer& audio, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio);

struct ResamplerSpec {
  int zero_crossings = 64;  // per side of the sinc kernel
  double kaiser_beta = 8.6;
};

/// Band-limited rate conversion by polyphase windowed-sinc interpolation.
/// Output length is round(n * target / source); the input is extended with
/// its edge values so a constant signal stays constant. Equal rates return
/// an exact copy.
AudioBuffer resample(const AudioBuffer& audio, double target_rate, const ResamplerSpec& spec = {});

}  // namespace tabsynth
