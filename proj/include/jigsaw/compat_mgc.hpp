#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jigsaw/core.hpp"

namespace jigsaw {

enum class ColorSpace { Lab, Rgb };

/// Three-channel floating point raster used for all compatibility math.
class FloatImage {
 public:
  FloatImage() = default;
  FloatImage(int height, int width) : height_(height), width_(width), data_(3 * height * width) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  double& at(int y, int x, int c) { return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c]; }
  double at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  Eigen::Vector3d pixel(int y, int x) const {
    const double* p = &data_[(static_cast<std::size_t>(y) * width_ + x) * 3];
    return {p[0], p[1], p[2]};
  }

  FloatImage rotated_cw() const;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// sRGB (D65) -> CIELAB, or plain 0..255 RGB.
FloatImage to_float(const Image& image, ColorSpace space);

/// Mean and ridge-regularized inverse covariance of the cross-boundary
/// gradient (outermost minus second-outermost pixel) along one side.
struct BoundaryStats {
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov_inv = Eigen::Matrix3d::Identity();
};

/// Ridge added to a 3x3 sample covariance before inversion.
double covariance_ridge(const Eigen::Matrix3d& cov);

/// Statistics of an S x 3 sample block: each row is one gradient sample.
BoundaryStats sample_stats(const Eigen::Matrix<double, Eigen::Dynamic, 3>& samples);

BoundaryStats boundary_stats(const FloatImage& tile, Relation side);

struct MgcOptions {
  ColorSpace color = ColorSpace::Lab;
  /// Permit compatibility on tiles whose borders were never repaired.
  bool allow_eroded = false;
};

BoundaryStats boundary_stats(const Tile& tile, Relation side, const MgcOptions& opts = {});

/// Gamma_R(i, j): dissimilarity of placing j in relation R to i (for Right,
/// j sits to the right of i). Down is evaluated by rotating both tiles
/// clockwise; Left and Up swap the arguments.
double mgc_pair(const FloatImage& i, const FloatImage& j, Relation r);
double mgc_pair(const Tile& i, const Tile& j, Relation r, const MgcOptions& opts = {});

/// Per-relation n x n dissimilarities; the diagonal holds +infinity.
struct DissimilarityTable {
  int n = 0;
  std::array<Eigen::MatrixXd, 4> gamma;

  const Eigen::MatrixXd& operator[](Relation r) const { return gamma[static_cast<int>(r)]; }
  Eigen::MatrixXd& operator[](Relation r) { return gamma[static_cast<int>(r)]; }
};

DissimilarityTable dissimilarity_table(const std::vector<Tile>& tiles, const MgcOptions& opts = {});
DissimilarityTable dissimilarity_table(const std::vector<FloatImage>& tiles);

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// C_R(i, j) in [0, 1]; each row keeps at most k - 1 nonzeros.
struct CompatibilityTable {
  int n = 0;
  int k = 0;  // effective K after clamping to n - 1
  std::array<SparseRowMatrix, 4> compat;

  const SparseRowMatrix& operator[](Relation r) const { return compat[static_cast<int>(r)]; }
  SparseRowMatrix& operator[](Relation r) { return compat[static_cast<int>(r)]; }
};

inline constexpr int kDefaultK = 2;

/// C = max(1 - gamma / kmin, 0), kmin the K-th smallest off-diagonal entry of
/// the row. A zero kmin maps zero entries to 1 and everything else to 0.
CompatibilityTable normalize(const DissimilarityTable& d, int k = kDefaultK);

/// FNV-1a 64 over tile dimensions and pixels, as 16 hex digits.
std::string tiles_checksum(const std::vector<Tile>& tiles);

/// Cache format: one JSON header line
///   {"n":..,"relations":["right","left","up","down"],"dtype":"float64-le",
///    "checksum":"..","color_space":".."}
/// followed by 4*n*n little-endian doubles, relation-major then row-major.
void save_dissimilarity_cache(const std::filesystem::path& path, const DissimilarityTable& d,
                              const std::string& checksum, ColorSpace space);
/// nullopt when the file is absent, unreadable, or was built from other tiles.
std::optional<DissimilarityTable> load_dissimilarity_cache(const std::filesystem::path& path,
                                                           const std::string& checksum,
                                                           ColorSpace space);

}  // namespace jigsaw
