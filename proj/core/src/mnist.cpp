#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "umm/errors.hpp"
#include "umm/problems.hpp"

namespace umm {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;
constexpr std::size_t kClasses = 10;

std::vector<unsigned char> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& buf, std::size_t off, const std::string& path) {
  if (buf.size() < off + 4) throw TruncatedFile(path + ": header cut short");
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) | (std::uint32_t{buf[off + 2]} << 8) |
         std::uint32_t{buf[off + 3]};
}

}  // namespace

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path, std::size_t n) {
  const auto images = read_all(images_path);
  const auto labels = read_all(labels_path);
  if (be32(images, 0, images_path) != kImagesMagic) throw BadMagic(images_path + ": not an IDX image file");
  if (be32(labels, 0, labels_path) != kLabelsMagic) throw BadMagic(labels_path + ": not an IDX label file");

  const std::size_t count = be32(images, 4, images_path);
  const std::size_t rows = be32(images, 8, images_path);
  const std::size_t cols = be32(images, 12, images_path);
  const std::size_t label_count = be32(labels, 4, labels_path);
  if (n == 0 || n > count || n > label_count)
    throw DomainError("load_idx_pair: requested " + std::to_string(n) + " examples, files hold " +
                      std::to_string(std::min(count, label_count)));
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + n * pixels) throw TruncatedFile(images_path + ": pixel data cut short");
  if (labels.size() < 8 + n) throw TruncatedFile(labels_path + ": label data cut short");

  Dataset data;
  data.features = Tensor(Shape{n, pixels});
  data.labels = Tensor(Shape{n, kClasses});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pixels; ++j) data.features.at(i, j) = images[16 + i * pixels + j] / 255.0;
    const unsigned label = labels[8 + i];
    if (label >= kClasses) throw DomainError(labels_path + ": label out of range");
    data.labels.at(i, label) = 1.0;
  }
  return data;
}

Dataset load_mnist(const std::string& dir, std::size_t n) {
  const std::filesystem::path root(dir);
  return load_idx_pair((root / "train-images-idx3-ubyte").string(), (root / "train-labels-idx1-ubyte").string(), n);
}

}  // namespace umm
