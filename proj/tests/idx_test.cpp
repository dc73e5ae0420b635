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

#include "wassdim/idx.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "gtest/gtest.h"

namespace wassdim {
namespace {

namespace fs = std::filesystem;

class IdxTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "wassdim_idx_test";
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const char* name) const { return dir_ / name; }

  static void write_raw(const fs::path& p,
                        const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }

  static void gzip_file(const fs::path& src, const fs::path& dst) {
    std::ifstream in(src, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    gzFile gz = gzopen(dst.string().c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size()));
    gzclose(gz);
  }

  fs::path dir_;
};

TEST_F(IdxTest, DecodesHandcraftedImages) {
  // Two 2x2 images: [0,255,128,0] and [255,255,0,0].
  const std::vector<std::uint8_t> pixels{0, 255, 128, 0, 255, 255, 0, 0};
  write_idx_images(path("imgs"), 2, 2, pixels);
  const RawImages images = load_idx_images(path("imgs"));
  ASSERT_EQ(images.count, 2u);
  ASSERT_EQ(images.rows, 2u);
  ASSERT_EQ(images.cols, 2u);
  EXPECT_DOUBLE_EQ(images.pixels.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(0, 2), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(0, 3), 0.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(1, 2), 0.0);
  EXPECT_DOUBLE_EQ(images.pixels.at(1, 3), 0.0);
}

TEST_F(IdxTest, LabelMagicPassedToImageLoaderIsRejected) {
  write_idx_labels(path("labels"), std::vector<std::uint8_t>{3, 7});
  EXPECT_THROW(load_idx_images(path("labels")), IdxFormatError);
}

TEST_F(IdxTest, TruncatedImagePayloadIsRejected) {
  const std::vector<std::uint8_t> pixels{0, 255, 128, 0, 255, 255, 0, 0};
  write_idx_images(path("imgs"), 2, 2, pixels);
  // Chop the last byte off.
  auto bytes = detail::read_file_bytes(path("imgs"));
  bytes.pop_back();
  write_raw(path("truncated"), bytes);
  EXPECT_THROW(load_idx_images(path("truncated")), IdxFormatError);
}

TEST_F(IdxTest, DecodesLabels) {
  write_idx_labels(path("labels"), std::vector<std::uint8_t>{3, 7});
  const auto labels = load_idx_labels(path("labels"));
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0], 3);
  EXPECT_EQ(labels[1], 7);
}

TEST_F(IdxTest, EmptyLabelPayload) {
  write_idx_labels(path("labels"), std::vector<std::uint8_t>{});
  EXPECT_TRUE(load_idx_labels(path("labels")).empty());
}

TEST_F(IdxTest, ImageMagicPassedToLabelLoaderIsRejected) {
  write_idx_images(path("imgs"), 1, 1, std::vector<std::uint8_t>{42});
  EXPECT_THROW(load_idx_labels(path("imgs")), IdxFormatError);
}

TEST_F(IdxTest, RoundTripsBitExactly) {
  std::vector<std::uint8_t> pixels(3 * 4 * 4);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    pixels[i] = static_cast<std::uint8_t>((i * 37) % 256);
  write_idx_images(path("imgs"), 4, 4, pixels);
  const RawImages images = load_idx_images(path("imgs"));

  std::vector<std::uint8_t> recovered;
  for (double v : images.pixels.data)
    recovered.push_back(static_cast<std::uint8_t>(v * 255.0 + 0.5));
  EXPECT_EQ(recovered, pixels);

  std::vector<std::uint8_t> labels{0, 9, 5};
  write_idx_labels(path("labels"), labels);
  EXPECT_EQ(load_idx_labels(path("labels")), labels);
}

TEST_F(IdxTest, GzippedFilesAreSniffedAndDecoded) {
  const std::vector<std::uint8_t> pixels{0, 255, 128, 0, 255, 255, 0, 0};
  write_idx_images(path("imgs"), 2, 2, pixels);
  gzip_file(path("imgs"), path("imgs.gz"));
  const RawImages plain = load_idx_images(path("imgs"));
  const RawImages gz = load_idx_images(path("imgs.gz"));
  EXPECT_EQ(gz.pixels.data, plain.pixels.data);

  write_idx_labels(path("labels"), std::vector<std::uint8_t>{1, 2});
  gzip_file(path("labels"), path("labels.gz"));
  EXPECT_EQ(load_idx_labels(path("labels.gz")),
            (std::vector<std::uint8_t>{1, 2}));
}

TEST_F(IdxTest, MissingFileIsAnError) {
  EXPECT_THROW(load_idx_images(path("nope")), IdxFormatError);
}

TEST_F(IdxTest, LabeledLoadChecksCounts) {
  write_idx_images(path("imgs"), 1, 2, std::vector<std::uint8_t>{1, 2, 3, 4});
  write_idx_labels(path("labels"), std::vector<std::uint8_t>{7});
  EXPECT_THROW(load_labeled_images(path("imgs"), path("labels")),
               IdxFormatError);
}

LabeledCloud tiny_corpus() {
  LabeledCloud data;
  data.cloud = PointCloud(3, 2);
  data.cloud.at(0, 0) = 1.0;
  data.cloud.at(1, 0) = 2.0;
  data.cloud.at(2, 0) = 3.0;
  data.labels = {3, 7, 3};
  return data;
}

TEST(FilterByDigit, SelectsMatchingRowsInOrder) {
  const LabeledCloud data = tiny_corpus();
  const PointCloud threes = filter_by_digit(data, 3);
  ASSERT_EQ(threes.n, 2u);
  EXPECT_EQ(threes.at(0, 0), 1.0);
  EXPECT_EQ(threes.at(1, 0), 3.0);
}

TEST(FilterByDigit, AbsentDigitGivesEmptyCloud) {
  const PointCloud none = filter_by_digit(tiny_corpus(), 9);
  EXPECT_EQ(none.n, 0u);
  EXPECT_EQ(none.dim, 2u);
}

TEST(FilterByDigit, RejectsOutOfRangeDigit) {
  EXPECT_THROW(filter_by_digit(tiny_corpus(), 10), std::invalid_argument);
  EXPECT_THROW(filter_by_digit(tiny_corpus(), -1), std::invalid_argument);
}

TEST(FilterByDigit, PartitionsTheCorpus) {
  LabeledCloud data;
  data.cloud = PointCloud(50, 3);
  for (std::size_t i = 0; i < 50; ++i) {
    data.cloud.at(i, 0) = static_cast<double>(i);
    data.labels.push_back(static_cast<std::uint8_t>((i * 7) % 10));
  }
  std::size_t total = 0;
  std::set<double> seen;
  for (int digit = 0; digit <= 9; ++digit) {
    const PointCloud part = filter_by_digit(data, digit);
    total += part.n;
    for (std::size_t i = 0; i < part.n; ++i) {
      // First coordinates are unique row ids; disjointness means no repeats.
      ASSERT_FALSE(seen.count(part.at(i, 0)));
      seen.insert(part.at(i, 0));
    }
  }
  EXPECT_EQ(total, 50u);
}

// Checks against the published MNIST test split, when a copy is available.
// Point WASSDIM_MNIST_DIR at the directory holding the four standard files.
TEST(MnistFiles, T10kHeaderAndDigitCounts) {
  const char* dir = std::getenv("WASSDIM_MNIST_DIR");
  if (!dir) GTEST_SKIP() << "WASSDIM_MNIST_DIR not set";
  fs::path images, labels;
  for (const char* name :
       {"t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"}) {
    if (fs::exists(fs::path(dir) / name)) images = fs::path(dir) / name;
    if (fs::exists(fs::path(dir) / (std::string(name) + ".gz")))
      images = fs::path(dir) / (std::string(name) + ".gz");
  }
  for (const char* name :
       {"t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"}) {
    if (fs::exists(fs::path(dir) / name)) labels = fs::path(dir) / name;
    if (fs::exists(fs::path(dir) / (std::string(name) + ".gz")))
      labels = fs::path(dir) / (std::string(name) + ".gz");
  }
  if (images.empty() || labels.empty())
    GTEST_SKIP() << "t10k files not found under " << dir;

  const LabeledCloud data = load_labeled_images(images, labels);
  EXPECT_EQ(data.cloud.n, 10000u);
  EXPECT_EQ(data.cloud.dim, 784u);
  for (double v : data.cloud.data) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  std::vector<std::size_t> histogram(10, 0);
  for (std::uint8_t label : data.labels) {
    ASSERT_LE(label, 9);
    ++histogram[label];
  }
  for (std::size_t count : histogram) EXPECT_GT(count, 0u);
  EXPECT_EQ(filter_by_digit(data, 7).n, 1028u);
}

}  // namespace
}  // namespace wassdim
