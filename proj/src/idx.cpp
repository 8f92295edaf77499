#include <cstdint>
#include <fstream>
#include <vector>

#include "lgd/dataset.hpp"

namespace lgd {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::ifstream& f, const std::string& path) {
  unsigned char buf[4];
  if (!f.read(reinterpret_cast<char*>(buf), 4))
    throw IdxTruncatedError("idx: truncated header in " + path);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw IdxError("idx: cannot open " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw IdxError("idx: cannot open " + labels_path);

  if (read_u32_be(imgs, images_path) != kImagesMagic)
    throw IdxBadMagicError("idx: bad image magic in " + images_path);
  const std::uint32_t count = read_u32_be(imgs, images_path);
  const std::uint32_t rows = read_u32_be(imgs, images_path);
  const std::uint32_t cols = read_u32_be(imgs, images_path);

  if (read_u32_be(labs, labels_path) != kLabelsMagic)
    throw IdxBadMagicError("idx: bad label magic in " + labels_path);
  const std::uint32_t label_count = read_u32_be(labs, labels_path);
  if (label_count != count)
    throw IdxCountMismatchError("idx: image/label count mismatch");

  const std::size_t d = std::size_t(rows) * std::size_t(cols);
  RawDataset out;
  out.dim = d;
  out.points.resize(count);

  std::vector<unsigned char> pixel_buf(d);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(d)))
      throw IdxTruncatedError("idx: truncated image data in " + images_path);
    unsigned char label;
    if (!labs.read(reinterpret_cast<char*>(&label), 1))
      throw IdxTruncatedError("idx: truncated label data in " + labels_path);
    auto& p = out.points[i];
    p.x.resize(d);
    for (std::size_t j = 0; j < d; ++j) p.x[j] = static_cast<double>(pixel_buf[j]);
    p.label = static_cast<int>(label);
  }
  return out;
}

}  // namespace lgd
