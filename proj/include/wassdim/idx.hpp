// Copyright 2026 The Wassdim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <zlib.h>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wassdim/core.hpp"

namespace wassdim {

struct IdxFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

inline std::vector<std::uint8_t> read_file_bytes(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IdxFormatError("cannot open file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline bool looks_gzipped(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

inline std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
  z_stream zs{};
  // 15 + 16 selects the gzip wrapper.
  if (inflateInit2(&zs, 15 + 16) != Z_OK)
    throw IdxFormatError("gzip: inflateInit failed");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buffer(1 << 16);
  zs.next_in = const_cast<Bytef*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  do {
    zs.next_out = buffer.data();
    zs.avail_out = static_cast<uInt>(buffer.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw IdxFormatError("gzip: corrupt stream");
    }
    out.insert(out.end(), buffer.data(),
               buffer.data() + (buffer.size() - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

/// Raw bytes of the file, transparently gunzipped when the two-byte gzip
/// header is sniffed.
inline std::vector<std::uint8_t> read_idx_payload(
    const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  if (looks_gzipped(bytes)) return gunzip(bytes);
  return bytes;
}

inline std::uint32_t read_be32(std::span<const std::uint8_t> bytes,
                               std::size_t offset) {
  if (offset + 4 > bytes.size())
    throw IdxFormatError("idx: truncated header");
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
  const char buf[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(buf, 4);
}

}  // namespace detail

/// Decoded IDX image tensor, pixels scaled by 1/255 into [0, 1].
struct RawImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  PointCloud pixels;  // count x (rows * cols), flattened row-major
};

inline RawImages load_idx_images(const std::filesystem::path& path) {
  const auto bytes = detail::read_idx_payload(path);
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != detail::kIdxImagesMagic)
    throw IdxFormatError("idx images: bad magic number");
  RawImages images;
  images.count = detail::read_be32(bytes, 4);
  images.rows = detail::read_be32(bytes, 8);
  images.cols = detail::read_be32(bytes, 12);
  const std::size_t pixels = images.rows * images.cols;
  if (bytes.size() != 16 + images.count * pixels)
    throw IdxFormatError("idx images: truncated payload");
  images.pixels = PointCloud(images.count, pixels);
  for (std::size_t i = 0; i < images.count * pixels; ++i)
    images.pixels.data[i] = static_cast<double>(bytes[16 + i]) / 255.0;
  return images;
}

inline std::vector<std::uint8_t> load_idx_labels(
    const std::filesystem::path& path) {
  const auto bytes = detail::read_idx_payload(path);
  const std::uint32_t magic = detail::read_be32(bytes, 0);
  if (magic != detail::kIdxLabelsMagic)
    throw IdxFormatError("idx labels: bad magic number");
  const std::size_t count = detail::read_be32(bytes, 4);
  if (bytes.size() != 8 + count)
    throw IdxFormatError("idx labels: truncated payload");
  return {bytes.begin() + 8, bytes.end()};
}

/// Encoders for fixtures and round-trip checks.
inline void write_idx_images(const std::filesystem::path& path,
                             std::size_t rows, std::size_t cols,
                             std::span<const std::uint8_t> pixel_bytes) {
  if (rows * cols == 0 || pixel_bytes.size() % (rows * cols) != 0)
    throw std::invalid_argument("write_idx_images: payload shape mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_idx_images: cannot open " + path.string());
  detail::write_be32(out, detail::kIdxImagesMagic);
  detail::write_be32(
      out, static_cast<std::uint32_t>(pixel_bytes.size() / (rows * cols)));
  detail::write_be32(out, static_cast<std::uint32_t>(rows));
  detail::write_be32(out, static_cast<std::uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(pixel_bytes.data()),
            static_cast<std::streamsize>(pixel_bytes.size()));
}

inline void write_idx_labels(const std::filesystem::path& path,
                             std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_idx_labels: cannot open " + path.string());
  detail::write_be32(out, detail::kIdxLabelsMagic);
  detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

/// Image cloud paired with digit labels.
struct LabeledCloud {
  PointCloud cloud;
  std::vector<std::uint8_t> labels;
};

inline LabeledCloud load_labeled_images(
    const std::filesystem::path& images_path,
    const std::filesystem::path& labels_path) {
  RawImages images = load_idx_images(images_path);
  std::vector<std::uint8_t> labels = load_idx_labels(labels_path);
  if (labels.size() != images.count)
    throw IdxFormatError("labeled images: image/label count mismatch");
  return {std::move(images.pixels), std::move(labels)};
}

/// Rows whose label equals the digit, original order preserved. An absent
/// digit yields an empty cloud.
inline PointCloud filter_by_digit(const LabeledCloud& data, int digit) {
  if (digit < 0 || digit > 9)
    throw std::invalid_argument("filter_by_digit: digit must be in 0..9");
  PointCloud out(0, data.cloud.dim);
  for (std::size_t i = 0; i < data.cloud.n; ++i) {
    if (data.labels[i] != static_cast<std::uint8_t>(digit)) continue;
    out.data.insert(out.data.end(), data.cloud.row(i).begin(),
                    data.cloud.row(i).end());
    ++out.n;
  }
  return out;
}

}  // namespace wassdim
