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

// Native FLAC stream decoder: STREAMINFO, fixed-block and variable-block
// frames, CONSTANT / VERBATIM / FIXED / LPC subframes, wasted bits, Rice and
// escaped residual partitions, and all four channel assignments. Frame CRCs
// are verified; MD5 is not.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coughscreen/audio.hpp"
#include "coughscreen/error.hpp"

namespace coughscreen {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw Error(ErrorCode::kUnreadableFile, "FLAC: " + what);
}

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t bit_pos() const { return bit_pos_; }
  std::size_t byte_pos() const { return bit_pos_ >> 3; }
  bool at_end() const { return bit_pos_ >= bytes_.size() * 8; }
  bool byte_aligned() const { return (bit_pos_ & 7) == 0; }

  std::uint32_t bits(unsigned n) {
    return static_cast<std::uint32_t>(bits64(n));
  }

  // n <= 64.
  std::uint64_t bits64(unsigned n) {
    if (n == 0) return 0;
    if (bit_pos_ + n > bytes_.size() * 8) fail("truncated stream");
    std::uint64_t v = 0;
    while (n > 0) {
      const unsigned offset = bit_pos_ & 7;
      const unsigned take = std::min(n, 8u - offset);
      const unsigned byte = bytes_[bit_pos_ >> 3];
      const unsigned chunk = (byte >> (8 - offset - take)) & ((1u << take) - 1);
      v = (v << take) | chunk;
      bit_pos_ += take;
      n -= take;
    }
    return v;
  }

  std::int64_t signed_bits(unsigned n) {
    if (n == 0) return 0;
    const std::uint64_t raw = bits64(n);
    const std::uint64_t sign = std::uint64_t{1} << (n - 1);
    return static_cast<std::int64_t>(raw ^ sign) - static_cast<std::int64_t>(sign);
  }

  std::uint32_t unary() {
    std::uint32_t zeros = 0;
    while (bits(1) == 0) ++zeros;
    return zeros;
  }

  void align() { bit_pos_ = (bit_pos_ + 7) & ~std::size_t{7}; }
  void skip_bytes(std::size_t n) {
    if (byte_pos() + n > bytes_.size()) fail("truncated stream");
    bit_pos_ += n * 8;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_pos_ = 0;
};

std::uint8_t crc8(std::span<const std::uint8_t> data) {
  std::uint8_t crc = 0;
  for (std::uint8_t b : data) {
    crc ^= b;
    for (int i = 0; i < 8; ++i) {
      crc = static_cast<std::uint8_t>((crc & 0x80) ? (crc << 1) ^ 0x07 : crc << 1);
    }
  }
  return crc;
}

std::uint16_t crc16(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0;
  for (std::uint8_t b : data) {
    crc ^= static_cast<std::uint16_t>(b << 8);
    for (int i = 0; i < 8; ++i) {
      crc = static_cast<std::uint16_t>((crc & 0x8000) ? (crc << 1) ^ 0x8005
                                                       : crc << 1);
    }
  }
  return crc;
}

struct StreamInfo {
  std::uint32_t min_block = 0;
  std::uint32_t max_block = 0;
  std::uint32_t sample_rate = 0;
  std::uint32_t channels = 0;
  std::uint32_t bits_per_sample = 0;
  std::uint64_t total_samples = 0;
};

enum class ChannelMode { kIndependent, kLeftSide, kSideRight, kMidSide };

struct FrameHeader {
  std::uint32_t block_size = 0;
  std::uint32_t sample_rate = 0;
  std::uint32_t channels = 0;
  std::uint32_t bits_per_sample = 0;
  ChannelMode mode = ChannelMode::kIndependent;
};

StreamInfo read_metadata(BitReader& br) {
  StreamInfo info;
  bool have_streaminfo = false;
  bool last = false;
  while (!last) {
    last = br.bits(1) != 0;
    const std::uint32_t type = br.bits(7);
    const std::uint32_t length = br.bits(24);
    if (type == 0) {
      if (length < 34) fail("short STREAMINFO block");
      info.min_block = br.bits(16);
      info.max_block = br.bits(16);
      br.bits(24);  // min frame size
      br.bits(24);  // max frame size
      info.sample_rate = br.bits(20);
      info.channels = br.bits(3) + 1;
      info.bits_per_sample = br.bits(5) + 1;
      info.total_samples = br.bits64(36);
      br.skip_bytes(16);  // MD5
      br.skip_bytes(length - 34);
      have_streaminfo = true;
    } else if (type == 127) {
      fail("invalid metadata block type");
    } else {
      br.skip_bytes(length);
    }
  }
  if (!have_streaminfo) fail("missing STREAMINFO");
  if (info.sample_rate == 0) fail("STREAMINFO sample rate is zero");
  if (info.bits_per_sample < 4) fail("unsupported bits per sample");
  return info;
}

std::uint64_t read_coded_number(BitReader& br) {
  const std::uint32_t first = br.bits(8);
  if ((first & 0x80) == 0) return first;
  int extra = 0;
  std::uint32_t mask = 0x40;
  while (first & mask) {
    ++extra;
    mask >>= 1;
  }
  if (extra == 0 || extra > 6) fail("bad coded frame number");
  std::uint64_t v = first & (mask - 1);
  for (int i = 0; i < extra; ++i) {
    const std::uint32_t b = br.bits(8);
    if ((b & 0xC0) != 0x80) fail("bad coded frame number continuation");
    v = (v << 6) | (b & 0x3F);
  }
  return v;
}

FrameHeader read_frame_header(BitReader& br,
                              std::span<const std::uint8_t> bytes,
                              const StreamInfo& info) {
  const std::size_t start = br.byte_pos();
  if (br.bits(14) != 0x3FFE) fail("lost frame sync");
  if (br.bits(1) != 0) fail("reserved header bit set");
  br.bits(1);  // blocking strategy; the coded number is not needed here
  const std::uint32_t bs_code = br.bits(4);
  const std::uint32_t sr_code = br.bits(4);
  const std::uint32_t ch_code = br.bits(4);
  const std::uint32_t ss_code = br.bits(3);
  if (br.bits(1) != 0) fail("reserved header bit set");
  read_coded_number(br);

  FrameHeader h;
  if (bs_code == 0) {
    fail("reserved block size code");
  } else if (bs_code == 1) {
    h.block_size = 192;
  } else if (bs_code <= 5) {
    h.block_size = 576u << (bs_code - 2);
  } else if (bs_code == 6) {
    h.block_size = br.bits(8) + 1;
  } else if (bs_code == 7) {
    h.block_size = br.bits(16) + 1;
  } else {
    h.block_size = 256u << (bs_code - 8);
  }

  static constexpr std::array<std::uint32_t, 12> kRates = {
      0, 88200, 176400, 192000, 8000, 16000, 22050, 24000, 32000, 44100,
      48000, 96000};
  if (sr_code == 0) {
    h.sample_rate = info.sample_rate;
  } else if (sr_code < 12) {
    h.sample_rate = kRates[sr_code];
  } else if (sr_code == 12) {
    h.sample_rate = br.bits(8) * 1000;
  } else if (sr_code == 13) {
    h.sample_rate = br.bits(16);
  } else if (sr_code == 14) {
    h.sample_rate = br.bits(16) * 10;
  } else {
    fail("invalid sample rate code");
  }

  if (ch_code < 8) {
    h.channels = ch_code + 1;
    h.mode = ChannelMode::kIndependent;
  } else if (ch_code <= 10) {
    h.channels = 2;
    h.mode = ch_code == 8   ? ChannelMode::kLeftSide
             : ch_code == 9 ? ChannelMode::kSideRight
                            : ChannelMode::kMidSide;
  } else {
    fail("reserved channel assignment");
  }

  static constexpr std::array<std::uint32_t, 8> kSizes = {0, 8, 12, 0,
                                                          16, 20, 24, 32};
  if (ss_code == 0) {
    h.bits_per_sample = info.bits_per_sample;
  } else if (ss_code == 3) {
    fail("reserved sample size code");
  } else {
    h.bits_per_sample = kSizes[ss_code];
  }

  const std::size_t end = br.byte_pos();
  const std::uint32_t crc = br.bits(8);
  if (crc8(bytes.subspan(start, end - start)) != crc) {
    fail("frame header CRC mismatch");
  }
  if (h.channels != info.channels) fail("channel count changed mid-stream");
  if (h.bits_per_sample != info.bits_per_sample) {
    fail("bit depth changed mid-stream");
  }
  return h;
}

void read_residual(BitReader& br, std::uint32_t block_size,
                   std::uint32_t order, std::int64_t* out) {
  const std::uint32_t method = br.bits(2);
  if (method > 1) fail("reserved residual coding method");
  const unsigned param_bits = method == 0 ? 4 : 5;
  const std::uint32_t escape = method == 0 ? 15 : 31;
  const std::uint32_t partition_order = br.bits(4);
  const std::uint32_t partitions = 1u << partition_order;
  if (block_size % partitions != 0) fail("block not divisible by partitions");
  const std::uint32_t per_partition = block_size >> partition_order;
  if (per_partition < order) fail("residual partition smaller than order");

  std::uint32_t i = 0;
  for (std::uint32_t p = 0; p < partitions; ++p) {
    const std::uint32_t count = p == 0 ? per_partition - order : per_partition;
    const std::uint32_t param = br.bits(param_bits);
    if (param == escape) {
      const unsigned raw_bits = br.bits(5);
      for (std::uint32_t k = 0; k < count; ++k) {
        out[i++] = br.signed_bits(raw_bits);
      }
    } else {
      for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint64_t q = br.unary();
        const std::uint64_t v = (q << param) | br.bits(param);
        out[i++] = static_cast<std::int64_t>(v >> 1) ^
                   -static_cast<std::int64_t>(v & 1);
      }
    }
  }
}

void read_subframe(BitReader& br, std::uint32_t block_size, unsigned bps,
                   std::vector<std::int64_t>& out) {
  out.assign(block_size, 0);
  if (br.bits(1) != 0) fail("subframe padding bit set");
  const std::uint32_t type = br.bits(6);
  unsigned wasted = 0;
  if (br.bits(1) != 0) wasted = br.unary() + 1;
  if (wasted >= bps) fail("wasted bits exceed sample size");
  if (bps > 33) fail("unsupported sample size");
  bps -= wasted;

  if (type == 0) {
    const std::int64_t v = br.signed_bits(bps);
    for (auto& s : out) s = v;
  } else if (type == 1) {
    for (auto& s : out) s = br.signed_bits(bps);
  } else if (type >= 8 && type <= 12) {
    const std::uint32_t order = type - 8;
    if (order > block_size) fail("fixed predictor order exceeds block");
    for (std::uint32_t i = 0; i < order; ++i) out[i] = br.signed_bits(bps);
    read_residual(br, block_size, order, out.data() + order);
    for (std::uint32_t i = order; i < block_size; ++i) {
      std::int64_t pred = 0;
      switch (order) {
        case 1: pred = out[i - 1]; break;
        case 2: pred = 2 * out[i - 1] - out[i - 2]; break;
        case 3: pred = 3 * out[i - 1] - 3 * out[i - 2] + out[i - 3]; break;
        case 4:
          pred = 4 * out[i - 1] - 6 * out[i - 2] + 4 * out[i - 3] - out[i - 4];
          break;
        default: break;
      }
      out[i] += pred;
    }
  } else if (type >= 32) {
    const std::uint32_t order = (type & 31) + 1;
    if (order > block_size) fail("LPC order exceeds block");
    for (std::uint32_t i = 0; i < order; ++i) out[i] = br.signed_bits(bps);
    const std::uint32_t precision = br.bits(4) + 1;
    if (precision == 16) fail("invalid LPC coefficient precision");
    const std::int32_t shift = br.signed_bits(5);
    if (shift < 0) fail("negative LPC shift");
    std::array<std::int64_t, 32> coefs{};
    if (precision > 32) fail("invalid LPC coefficient precision");
    for (std::uint32_t j = 0; j < order; ++j) coefs[j] = br.signed_bits(precision);
    read_residual(br, block_size, order, out.data() + order);
    for (std::uint32_t i = order; i < block_size; ++i) {
      std::int64_t acc = 0;
      for (std::uint32_t j = 0; j < order; ++j) acc += coefs[j] * out[i - 1 - j];
      out[i] += acc >> shift;
    }
  } else {
    fail("reserved subframe type");
  }

  if (wasted > 0) {
    for (auto& s : out) s *= (std::int64_t{1} << wasted);
  }
}

}  // namespace

DecodedPcm decode_flac_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'f' || bytes[1] != 'L' ||
      bytes[2] != 'a' || bytes[3] != 'C') {
    fail("missing fLaC marker");
  }
  BitReader br(bytes.subspan(0));
  br.skip_bytes(4);
  const StreamInfo info = read_metadata(br);

  DecodedPcm pcm;
  pcm.sample_rate = info.sample_rate;
  pcm.channels = info.channels;
  pcm.bits_per_sample = info.bits_per_sample;
  if (info.total_samples > 0) {
    pcm.interleaved.reserve(info.total_samples * info.channels);
  }

  const double scale = 1.0 / static_cast<double>(
                                 std::int64_t{1} << (info.bits_per_sample - 1));
  std::vector<std::vector<std::int64_t>> chans(info.channels);
  std::uint64_t decoded = 0;

  while (!br.at_end()) {
    if (info.total_samples > 0 && decoded >= info.total_samples) break;
    const std::size_t frame_start = br.byte_pos();
    const FrameHeader h = read_frame_header(br, bytes, info);
    for (std::uint32_t c = 0; c < h.channels; ++c) {
      unsigned bps = h.bits_per_sample;
      const bool is_side =
          (h.mode == ChannelMode::kLeftSide && c == 1) ||
          (h.mode == ChannelMode::kSideRight && c == 0) ||
          (h.mode == ChannelMode::kMidSide && c == 1);
      if (is_side) ++bps;
      read_subframe(br, h.block_size, bps, chans[c]);
    }
    br.align();
    const std::size_t crc_pos = br.byte_pos();
    const std::uint32_t crc = br.bits(16);
    if (crc16(bytes.subspan(frame_start, crc_pos - frame_start)) != crc) {
      fail("frame CRC mismatch");
    }

    if (h.mode != ChannelMode::kIndependent) {
      auto& a = chans[0];
      auto& b = chans[1];
      for (std::uint32_t i = 0; i < h.block_size; ++i) {
        switch (h.mode) {
          case ChannelMode::kLeftSide: b[i] = a[i] - b[i]; break;
          case ChannelMode::kSideRight: a[i] = a[i] + b[i]; break;
          case ChannelMode::kMidSide: {
            const std::int64_t side = b[i];
            const std::int64_t mid = (a[i] * 2) | (side & 1);
            a[i] = (mid + side) >> 1;
            b[i] = (mid - side) >> 1;
            break;
          }
          default: break;
        }
      }
    }
    for (std::uint32_t i = 0; i < h.block_size; ++i) {
      for (std::uint32_t c = 0; c < h.channels; ++c) {
        pcm.interleaved.push_back(static_cast<float>(chans[c][i] * scale));
      }
    }
    decoded += h.block_size;
  }

  if (info.total_samples > 0 && decoded < info.total_samples) {
    fail("stream ends after " + std::to_string(decoded) + " of " +
         std::to_string(info.total_samples) + " samples");
  }
  if (info.total_samples > 0 && decoded > info.total_samples) {
    pcm.interleaved.resize(info.total_samples * info.channels);
  }
  return pcm;
}

}  // namespace coughscreen
