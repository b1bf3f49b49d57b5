#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jigsaw {

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidGeometry : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// 8-bit interleaved RGB raster, row-major.
class Image {
 public:
  Image() = default;
  Image(int height, int width, std::array<std::uint8_t, 3> fill = {0, 0, 0});

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  std::uint8_t at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }

  std::span<std::uint8_t> bytes() noexcept { return data_; }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  Image crop(int y0, int x0, int height, int width) const;
  void paste(const Image& src, int y0, int x0);
  /// Rotates 90 degrees clockwise.
  Image rotated_cw() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// One square puzzle piece. `original_index` is the piece's row-major
/// position in the unshuffled image.
struct Tile {
  Image pixels;
  int original_index = 0;
  double erosion_beta = 0.0;
  int erosion_px = 0;  // pixels removed from each side

  int side() const noexcept { return pixels.width(); }
};

enum class Relation : std::uint8_t { Right = 0, Left = 1, Up = 2, Down = 3 };

inline constexpr std::array<Relation, 4> kAllRelations{Relation::Right, Relation::Left,
                                                       Relation::Up, Relation::Down};

constexpr Relation inverse(Relation r) noexcept {
  switch (r) {
    case Relation::Right: return Relation::Left;
    case Relation::Left: return Relation::Right;
    case Relation::Up: return Relation::Down;
    case Relation::Down: return Relation::Up;
  }
  return r;
}

const char* to_string(Relation r) noexcept;

struct GridGeometry {
  int rows = 1;
  int cols = 1;

  int size() const noexcept { return rows * cols; }
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Row-major neighbor lookup; nullopt when the neighbor would leave the grid.
std::optional<int> neighbor_position(int position, Relation r, const GridGeometry& g);

/// mapping[i] = position of piece i.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<int> mapping);

  static Permutation identity(int n);

  int size() const noexcept { return static_cast<int>(mapping_.size()); }
  int operator[](int piece) const { return mapping_[piece]; }
  const std::vector<int>& mapping() const noexcept { return mapping_; }
  /// inverse()[position] = piece at that position.
  std::vector<int> inverse() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> mapping_;
};

}  // namespace jigsaw
