#include "jigsaw/core.hpp"

#include <algorithm>
#include <numeric>

namespace jigsaw {

Image::Image(int height, int width, std::array<std::uint8_t, 3> fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw DomainError("image dimensions must be nonnegative");
  data_.resize(static_cast<std::size_t>(height) * width * 3);
  for (std::size_t k = 0; k < data_.size(); k += 3) {
    data_[k] = fill[0];
    data_[k + 1] = fill[1];
    data_[k + 2] = fill[2];
  }
}

Image Image::crop(int y0, int x0, int height, int width) const {
  if (y0 < 0 || x0 < 0 || height < 0 || width < 0 || y0 + height > height_ ||
      x0 + width > width_)
    throw DomainError("crop rectangle outside image");
  Image out(height, width);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 3;
  for (int y = 0; y < height; ++y) {
    const auto* src = &data_[(static_cast<std::size_t>(y0 + y) * width_ + x0) * 3];
    std::copy_n(src, row_bytes, &out.data_[static_cast<std::size_t>(y) * row_bytes]);
  }
  return out;
}

void Image::paste(const Image& src, int y0, int x0) {
  if (y0 < 0 || x0 < 0 || y0 + src.height_ > height_ || x0 + src.width_ > width_)
    throw DomainError("paste rectangle outside image");
  const std::size_t row_bytes = static_cast<std::size_t>(src.width_) * 3;
  for (int y = 0; y < src.height_; ++y) {
    std::copy_n(&src.data_[static_cast<std::size_t>(y) * row_bytes], row_bytes,
                &data_[(static_cast<std::size_t>(y0 + y) * width_ + x0) * 3]);
  }
}

Image Image::rotated_cw() const {
  Image out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, height_ - 1 - y, c) = at(y, x, c);
  return out;
}

const char* to_string(Relation r) noexcept {
  switch (r) {
    case Relation::Right: return "right";
    case Relation::Left: return "left";
    case Relation::Up: return "up";
    case Relation::Down: return "down";
  }
  return "?";
}

std::optional<int> neighbor_position(int position, Relation r, const GridGeometry& g) {
  if (position < 0 || position >= g.size())
    throw DomainError("position " + std::to_string(position) + " outside grid");
  const int row = position / g.cols;
  const int col = position % g.cols;
  switch (r) {
    case Relation::Right:
      if (col + 1 < g.cols) return position + 1;
      break;
    case Relation::Left:
      if (col > 0) return position - 1;
      break;
    case Relation::Up:
      if (row > 0) return position - g.cols;
      break;
    case Relation::Down:
      if (row + 1 < g.rows) return position + g.cols;
      break;
  }
  return std::nullopt;
}

Permutation::Permutation(std::vector<int> mapping) : mapping_(std::move(mapping)) {
  std::vector<char> seen(mapping_.size(), 0);
  for (int v : mapping_) {
    if (v < 0 || v >= static_cast<int>(mapping_.size()) || seen[v])
      throw DomainError("mapping is not a permutation");
    seen[v] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(n);
  std::iota(m.begin(), m.end(), 0);
  return Permutation(std::move(m));
}

std::vector<int> Permutation::inverse() const {
  std::vector<int> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = static_cast<int>(i);
  return inv;
}

}  // namespace jigsaw
