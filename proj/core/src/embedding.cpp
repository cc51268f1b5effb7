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

#include "coughscreen/embedding.hpp"

#include <cstring>

#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"

namespace coughscreen {

std::vector<std::uint8_t> encode_emb1(const Matrix<float>& m) {
  std::vector<std::uint8_t> out(12 + m.data().size() * 4);
  std::memcpy(out.data(), "EMB1", 4);
  store_u32_le(out.data() + 4, static_cast<std::uint32_t>(m.rows()));
  store_u32_le(out.data() + 8, static_cast<std::uint32_t>(m.cols()));
  std::uint8_t* p = out.data() + 12;
  for (float v : m.data()) {
    std::uint32_t u;
    std::memcpy(&u, &v, sizeof u);
    store_u32_le(p, u);
    p += 4;
  }
  return out;
}

Matrix<float> decode_emb1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "EMB1", 4) != 0) {
    throw Error(ErrorCode::kUnreadableFile, "EMB1: bad magic");
  }
  const std::uint64_t rows = load_u32_le(bytes.data() + 4);
  const std::uint64_t cols = load_u32_le(bytes.data() + 8);
  const std::uint64_t expected = 12 + rows * cols * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kUnreadableFile,
                "EMB1: payload is " + std::to_string(bytes.size()) +
                    " bytes, header implies " + std::to_string(expected));
  }
  std::vector<float> values(rows * cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t u = load_u32_le(bytes.data() + 12 + 4 * i);
    std::memcpy(&values[i], &u, sizeof u);
  }
  return Matrix<float>(rows, cols, std::move(values));
}

void write_emb1(const std::filesystem::path& path, const Matrix<float>& m) {
  write_file_bytes(path, encode_emb1(m));
}

Matrix<float> read_emb1(const std::filesystem::path& path) {
  try {
    return decode_emb1(read_file_bytes(path));
  } catch (const Error& e) {
    throw Error(e.code() == ErrorCode::kIoError ? ErrorCode::kIoError
                                                : ErrorCode::kUnreadableFile,
                path.string() + ": " + e.what());
  }
}

FeatureVector pool_and_concat(std::span<const EmbeddingMatrix> mats,
                              std::string file_id) {
  if (mats.empty()) {
    throw Error(ErrorCode::kEmptyMatrix, "no embedding matrices to pool");
  }
  FeatureVector out;
  out.file_id = std::move(file_id);
  std::size_t total = 0;
  for (const auto& m : mats) total += m.values.cols();
  out.values.reserve(total);
  for (const auto& m : mats) {
    const std::size_t rows = m.values.rows();
    if (rows == 0) {
      throw Error(ErrorCode::kEmptyMatrix,
                  "backend '" + m.backend_id + "' produced no frames");
    }
    std::vector<double> sum(m.values.cols(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = m.values.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) sum[c] += row[c];
    }
    for (double s : sum) out.values.push_back(s / static_cast<double>(rows));
  }
  return out;
}

}  // namespace coughscreen
