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

#include "coughscreen/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {
namespace {

constexpr double kKaiserBeta = 8.0;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

AudioClip mixdown(const DecodedPcm& pcm) {
  const std::size_t frames = pcm.frames();
  if (frames == 0) throw Error(ErrorCode::kEmptyAudio, "no samples decoded");
  AudioClip clip;
  clip.sample_rate = pcm.sample_rate;
  clip.original_sample_rate = pcm.sample_rate;
  clip.source_channels = pcm.channels;
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::uint32_t c = 0; c < pcm.channels; ++c) {
      acc += pcm.interleaved[f * pcm.channels + c];
    }
    clip.samples[f] =
        std::clamp(static_cast<float>(acc / pcm.channels), -1.0f, 1.0f);
  }
  return clip;
}

AudioClip decode_audio(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kUnreadableFile, e.what());
  }
  if (bytes.size() >= 4 && bytes[0] == 'f' && bytes[1] == 'L' &&
      bytes[2] == 'a' && bytes[3] == 'C') {
    return mixdown(decode_flac_bytes(bytes));
  }
  if (bytes.size() >= 12 && std::equal(bytes.begin(), bytes.begin() + 4,
                                       "RIFF")) {
    return mixdown(decode_wav_bytes(bytes));
  }
  throw Error(ErrorCode::kUnreadableFile,
              "unsupported container: " + path.string());
}

AudioClip resample(const AudioClip& clip, std::uint32_t target_rate) {
  if (target_rate == 0) {
    throw Error(ErrorCode::kInvalidArgument, "target sample rate must be > 0");
  }
  if (clip.sample_rate == 0) {
    throw Error(ErrorCode::kInvalidArgument, "clip has no sample rate");
  }
  if (clip.sample_rate == target_rate) return clip;

  const std::uint64_t in_len = clip.samples.size();
  const std::uint64_t out_len =
      (in_len * target_rate + clip.sample_rate / 2) / clip.sample_rate;
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  // Cutoff relative to the input Nyquist; the kernel is widened when
  // downsampling so that it keeps kResampleTaps taps at the output rate.
  const double cutoff = std::min(1.0, ratio);
  const double half_width = (kResampleTaps / 2) / cutoff;
  const double window_norm = std::cyl_bessel_i(0.0, kKaiserBeta);

  AudioClip out = clip;
  out.sample_rate = target_rate;
  out.samples.assign(out_len, 0.0f);
  const auto n_in = static_cast<std::int64_t>(in_len);
  for (std::uint64_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const auto lo = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::int64_t>(
        n_in - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double d = t - static_cast<double>(k);
      const double x = d / half_width;
      const double w =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - x * x))) /
          window_norm;
      acc += clip.samples[static_cast<std::size_t>(k)] * cutoff *
             sinc(cutoff * d) * w;
    }
    out.samples[n] = std::clamp(static_cast<float>(acc), -1.0f, 1.0f);
  }
  return out;
}

AudioClip pad_to_duration(const AudioClip& clip, double min_seconds) {
  const auto needed =
      static_cast<std::size_t>(std::ceil(min_seconds * clip.sample_rate));
  if (clip.samples.size() >= needed) return clip;
  const std::size_t total_pad = needed - clip.samples.size();
  const std::size_t front = total_pad / 2;
  AudioClip out = clip;
  out.samples.assign(needed, 0.0f);
  std::copy(clip.samples.begin(), clip.samples.end(),
            out.samples.begin() + static_cast<std::ptrdiff_t>(front));
  return out;
}

}  // namespace coughscreen
