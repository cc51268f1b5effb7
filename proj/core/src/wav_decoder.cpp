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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "coughscreen/audio.hpp"
#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::kUnreadableFile, "WAV: " + what);
}

bool tag_is(const std::uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

float decode_sample(const std::uint8_t* p, std::uint16_t format,
                    std::uint16_t bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      float f;
      const std::uint32_t u = load_u32_le(p);
      std::memcpy(&f, &u, sizeof f);
      return f;
    }
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = (u << 8) | p[i];
    double d;
    std::memcpy(&d, &u, sizeof d);
    return static_cast<float>(d);
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0f;
    case 16:
      return static_cast<std::int16_t>(load_u16_le(p)) / 32768.0f;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<float>(v / 8388608.0);
    }
    case 32:
      return static_cast<float>(static_cast<std::int32_t>(load_u32_le(p)) /
                                2147483648.0);
    default:
      fail("unsupported PCM bit depth " + std::to_string(bits));
  }
}

}  // namespace

DecodedPcm decode_wav_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") ||
      !tag_is(bytes.data() + 8, "WAVE")) {
    fail("missing RIFF/WAVE header");
  }
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = load_u32_le(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (tag_is(chunk, "fmt ")) {
      if (size < 16 || size > available) fail("bad fmt chunk");
      format = load_u16_le(chunk + 8);
      channels = load_u16_le(chunk + 10);
      rate = load_u32_le(chunk + 12);
      bits = load_u16_le(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) fail("short extensible fmt chunk");
        format = load_u16_le(chunk + 32);
      }
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      // Streaming writers leave the size unset; clamp to what is present.
      data = bytes.subspan(body, std::min<std::size_t>(size, available));
      have_data = true;
      break;
    }
    if (size > available) fail("chunk overruns file");
    pos = body + size + (size & 1);
  }
  if (!have_fmt) fail("missing fmt chunk");
  if (!have_data) fail("missing data chunk");
  if (format != kFormatPcm && format != kFormatFloat) {
    fail("unsupported format tag " + std::to_string(format));
  }
  if (format == kFormatFloat && bits != 32 && bits != 64) {
    fail("unsupported float width");
  }
  if (channels == 0 || rate == 0) fail("zero channels or sample rate");
  if (bits % 8 != 0 || bits == 0) fail("unsupported bit depth");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bits / 8;
  const std::size_t frames = data.size() / frame_bytes;

  DecodedPcm pcm;
  pcm.sample_rate = rate;
  pcm.channels = channels;
  pcm.bits_per_sample = bits;
  pcm.interleaved.resize(frames * channels);
  const std::size_t step = bits / 8;
  for (std::size_t i = 0; i < frames * channels; ++i) {
    float v = decode_sample(data.data() + i * step, format, bits);
    if (!std::isfinite(v)) fail("non-finite float sample");
    pcm.interleaved[i] = std::clamp(v, -1.0f, 1.0f);
  }
  return pcm;
}

}  // namespace coughscreen
