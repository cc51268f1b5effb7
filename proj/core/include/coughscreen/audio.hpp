// Copyright 2026 The coughscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COUGHSCREEN_AUDIO_HPP_
#define COUGHSCREEN_AUDIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace coughscreen {

/// Mono recording with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  std::uint32_t sample_rate = 0;
  /// Channel count of the source before mixdown. Informational only; the
  /// samples are always mono.
  std::uint32_t source_channels = 1;
  /// Sample rate of the decoded file, preserved across resampling.
  std::uint32_t original_sample_rate = 0;

  double duration_seconds() const {
    return sample_rate == 0 ? 0.0
                            : static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Interleaved PCM as stored in a container, before mixdown.
struct DecodedPcm {
  std::uint32_t sample_rate = 0;
  std::uint32_t channels = 0;
  std::uint32_t bits_per_sample = 0;
  /// Interleaved samples normalized to [-1, 1].
  std::vector<float> interleaved;

  std::size_t frames() const {
    return channels == 0 ? 0 : interleaved.size() / channels;
  }
};

DecodedPcm decode_wav_bytes(std::span<const std::uint8_t> bytes);
DecodedPcm decode_flac_bytes(std::span<const std::uint8_t> bytes);

/// Averages channels per frame and validates the result.
/// Throws kEmptyAudio when there are no samples.
AudioClip mixdown(const DecodedPcm& pcm);

/// Decodes a FLAC or WAV file (sniffed by magic bytes, not extension) into a
/// mono clip. Throws kUnreadableFile for missing, corrupt or unsupported
/// files and kEmptyAudio for files without samples.
AudioClip decode_audio(const std::filesystem::path& path);

/// Number of filter taps at the lower of the two rates.
inline constexpr int kResampleTaps = 32;

/// Band-limited windowed-sinc (Kaiser) sample rate conversion. The output has
/// round(n * target / source) samples, so durations agree within half a
/// sample. Same-rate input is returned unchanged.
AudioClip resample(const AudioClip& clip, std::uint32_t target_rate);

/// Zero-pads symmetrically to at least `min_seconds`; longer clips are
/// returned as is. Any odd leftover sample goes to the end.
AudioClip pad_to_duration(const AudioClip& clip, double min_seconds);

}  // namespace coughscreen

#endif  // COUGHSCREEN_AUDIO_HPP_
