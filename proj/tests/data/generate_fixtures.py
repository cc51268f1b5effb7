# Copyright 2026 The coughscreen Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the committed audio fixtures.

Each FLAC file has a WAV twin holding the same integer samples, so decoder
tests can compare the two bit for bit. Requires numpy and soundfile.
"""

import pathlib

import numpy as np
import soundfile as sf

HERE = pathlib.Path(__file__).resolve().parent


def quantize(x, bits):
    """Rounds to signed `bits`-bit integers, left-aligned in the dtype that
    libsndfile expects, so both containers receive identical samples."""
    full = 2 ** (bits - 1)
    q = np.clip(np.round(x * full), -full, full - 1).astype(np.int64)
    if bits == 16:
        return q.astype(np.int16)
    return (q << (32 - bits)).astype(np.int32)


def write_pair(stem, data, rate, subtype, **flac_kwargs):
    data = quantize(data, 24 if subtype == "PCM_24" else 16)
    sf.write(HERE / f"{stem}.wav", data, rate, subtype=subtype)
    sf.write(HERE / f"{stem}.flac", data, rate, subtype=subtype, format="FLAC",
             **flac_kwargs)


def main():
    rng = np.random.default_rng(20260101)

    # 3 s mono at 44.1 kHz: quarter second of silence, then a 440 Hz tone
    # with a little noise.
    rate = 44100
    t = np.arange(3 * rate) / rate
    tone = 0.5 * np.sin(2 * np.pi * 440.0 * t) + 0.01 * rng.standard_normal(t.size)
    tone[: rate // 4] = 0.0
    write_pair("tone440_mono16", tone, rate, "PCM_16")
    write_pair("tone440_mono16_fast", tone[: rate // 2], rate, "PCM_16",
               compression_level=0.0)

    # Short stereo clip at 48 kHz, 24 bit, correlated channels so the
    # encoder picks a joint-stereo mode.
    rate = 48000
    t = np.arange(rate // 2) / rate
    left = 0.4 * np.sin(2 * np.pi * 300.0 * t)
    right = 0.9 * left + 0.05 * rng.standard_normal(t.size)
    write_pair("stereo24", np.stack([left, right], axis=1), rate, "PCM_24")

    # 0.3 s of 16 kHz noise, for short-clip padding paths.
    write_pair("noise16k", 0.2 * rng.standard_normal(4800), 16000, "PCM_16")


if __name__ == "__main__":
    main()
