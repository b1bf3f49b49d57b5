#include "jigsaw/compat_mgc.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace jigsaw {
namespace {

using Samples = Eigen::Matrix<double, Eigen::Dynamic, 3>;

const std::array<double, 256>& srgb_to_linear_lut() {
  static const std::array<double, 256> lut = [] {
    std::array<double, 256> t{};
    for (int v = 0; v < 256; ++v) {
      const double c = v / 255.0;
      t[v] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return t;
  }();
  return lut;
}

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

// One side of a tile seen as a vertical strip: `edge` is the outermost
// column, `inner` the next one in, both listed top to bottom.
struct SideProfile {
  Samples edge;
  Samples dedge;  // along-boundary derivative of edge, S - 1 rows
  BoundaryStats stats;
  BoundaryStats dstats;
};

Samples column(const FloatImage& img, int x) {
  Samples out(img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int c = 0; c < 3; ++c) out(y, c) = img.at(y, x, c);
  return out;
}

Samples along_derivative(const Samples& s) {
  const Eigen::Index n = s.rows();
  if (n < 2) return Samples(0, 3);
  return s.bottomRows(n - 1) - s.topRows(n - 1);
}

SideProfile make_profile(const Samples& edge, const Samples& inner) {
  SideProfile p;
  p.edge = edge;
  p.dedge = along_derivative(edge);
  p.stats = sample_stats(edge - inner);
  p.dstats = sample_stats(p.dedge - along_derivative(inner));
  return p;
}

SideProfile right_profile(const FloatImage& img) {
  const int w = img.width();
  return make_profile(column(img, w - 1), column(img, w - 2));
}

SideProfile left_profile(const FloatImage& img) {
  return make_profile(column(img, 0), column(img, 1));
}

double mahalanobis_sum(const Samples& delta, const BoundaryStats& st) {
  if (delta.rows() == 0) return 0.0;
  const Samples r = delta.rowwise() - st.mu.transpose();
  return ((r * st.cov_inv).cwiseProduct(r)).sum();
}

// Gamma_Right(i, j) from i's right profile and j's left profile.
double gamma_right(const SideProfile& i_right, const SideProfile& j_left) {
  const Samples cross = j_left.edge - i_right.edge;
  const Samples dcross = j_left.dedge - i_right.dedge;
  return mahalanobis_sum(cross, i_right.stats) + mahalanobis_sum(-cross, j_left.stats) +
         mahalanobis_sum(dcross, i_right.dstats) + mahalanobis_sum(-dcross, j_left.dstats);
}

void check_same_shape(const FloatImage& a, const FloatImage& b) {
  if (a.height() != b.height() || a.width() != b.width())
    throw DomainError("tiles differ in size");
  if (a.width() < 2 || a.height() < 2) throw DomainError("tiles must be at least 2x2");
}

void check_tile(const Tile& t, const MgcOptions& opts) {
  if (!opts.allow_eroded && (t.erosion_px > 0 || t.erosion_beta > 0.0))
    throw DomainError("tile borders are eroded; repair them first or set allow_eroded");
}

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= p[k];
    h *= kFnvPrime;
  }
}

const char* color_space_name(ColorSpace s) { return s == ColorSpace::Lab ? "lab" : "rgb"; }

}  // namespace

FloatImage FloatImage::rotated_cw() const {
  FloatImage out(width_, height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, height_ - 1 - y, c) = at(y, x, c);
  return out;
}

FloatImage to_float(const Image& image, ColorSpace space) {
  FloatImage out(image.height(), image.width());
  const auto& lin = srgb_to_linear_lut();
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (space == ColorSpace::Rgb) {
        for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, x, c);
        continue;
      }
      const double r = lin[image.at(y, x, 0)];
      const double g = lin[image.at(y, x, 1)];
      const double b = lin[image.at(y, x, 2)];
      const double X = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
      const double Y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
      const double Z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
      const double fx = lab_f(X), fy = lab_f(Y), fz = lab_f(Z);
      out.at(y, x, 0) = 116.0 * fy - 16.0;
      out.at(y, x, 1) = 500.0 * (fx - fy);
      out.at(y, x, 2) = 200.0 * (fy - fz);
    }
  }
  return out;
}

double covariance_ridge(const Eigen::Matrix3d& cov) {
  return 1e-6 * std::max(cov.trace() / 3.0, 1.0);
}

BoundaryStats sample_stats(const Samples& samples) {
  BoundaryStats st;
  const Eigen::Index n = samples.rows();
  if (n == 0) {
    st.cov_inv = Eigen::Matrix3d::Identity() / covariance_ridge(Eigen::Matrix3d::Zero());
    return st;
  }
  st.mu = samples.colwise().mean().transpose();
  const Samples centered = samples.rowwise() - st.mu.transpose();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  if (n > 1) cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov.diagonal().array() += covariance_ridge(cov);
  st.cov_inv = cov.inverse();
  st.cov_inv = 0.5 * (st.cov_inv + st.cov_inv.transpose()).eval();
  return st;
}

BoundaryStats boundary_stats(const FloatImage& tile, Relation side) {
  switch (side) {
    case Relation::Right: return right_profile(tile).stats;
    case Relation::Left: return left_profile(tile).stats;
    // Up/Down: rotating clockwise turns the bottom row into the left column
    // and the top row into the right column, in the same left-to-right order.
    case Relation::Down: return left_profile(tile.rotated_cw()).stats;
    case Relation::Up: return right_profile(tile.rotated_cw()).stats;
  }
  return {};
}

BoundaryStats boundary_stats(const Tile& tile, Relation side, const MgcOptions& opts) {
  check_tile(tile, opts);
  return boundary_stats(to_float(tile.pixels, opts.color), side);
}

double mgc_pair(const FloatImage& i, const FloatImage& j, Relation r) {
  check_same_shape(i, j);
  switch (r) {
    case Relation::Right: return gamma_right(right_profile(i), left_profile(j));
    case Relation::Left: return mgc_pair(j, i, Relation::Right);
    case Relation::Down: {
      // i above j becomes cw(j) left of cw(i).
      const FloatImage ri = i.rotated_cw();
      const FloatImage rj = j.rotated_cw();
      return gamma_right(right_profile(rj), left_profile(ri));
    }
    case Relation::Up: return mgc_pair(j, i, Relation::Down);
  }
  return 0.0;
}

double mgc_pair(const Tile& i, const Tile& j, Relation r, const MgcOptions& opts) {
  check_tile(i, opts);
  check_tile(j, opts);
  return mgc_pair(to_float(i.pixels, opts.color), to_float(j.pixels, opts.color), r);
}

DissimilarityTable dissimilarity_table(const std::vector<FloatImage>& tiles) {
  const int n = static_cast<int>(tiles.size());
  if (n < 2) throw DomainError("need at least two tiles");
  for (const auto& t : tiles) check_same_shape(tiles.front(), t);

  std::vector<SideProfile> right(n), left(n), rot_right(n), rot_left(n);
  for (int k = 0; k < n; ++k) {
    right[k] = right_profile(tiles[k]);
    left[k] = left_profile(tiles[k]);
    const FloatImage rot = tiles[k].rotated_cw();
    rot_right[k] = right_profile(rot);  // original top row
    rot_left[k] = left_profile(rot);    // original bottom row
  }

  DissimilarityTable d;
  d.n = n;
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& m : d.gamma) m = Eigen::MatrixXd::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d[Relation::Right](i, j) = gamma_right(right[i], left[j]);
      d[Relation::Down](i, j) = gamma_right(rot_right[j], rot_left[i]);
    }
  }
  d[Relation::Left] = d[Relation::Right].transpose();
  d[Relation::Up] = d[Relation::Down].transpose();
  return d;
}

DissimilarityTable dissimilarity_table(const std::vector<Tile>& tiles, const MgcOptions& opts) {
  std::vector<FloatImage> f;
  f.reserve(tiles.size());
  for (const Tile& t : tiles) {
    check_tile(t, opts);
    f.push_back(to_float(t.pixels, opts.color));
  }
  return dissimilarity_table(f);
}

CompatibilityTable normalize(const DissimilarityTable& d, int k) {
  if (k < 2) throw DomainError("K must be at least 2");
  const int n = d.n;
  CompatibilityTable c;
  c.n = n;
  c.k = std::max(1, std::min(k, n - 1));
  std::vector<double> row;
  for (Relation r : kAllRelations) {
    const Eigen::MatrixXd& g = d[r];
    std::vector<Eigen::Triplet<double>> entries;
    for (int i = 0; i < n; ++i) {
      row.clear();
      for (int j = 0; j < n; ++j)
        if (j != i) row.push_back(g(i, j));
      if (row.empty()) continue;
      std::nth_element(row.begin(), row.begin() + (c.k - 1), row.end());
      const double kmin = row[c.k - 1];
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double gij = g(i, j);
        double v;
        if (kmin > 0.0)
          v = std::max(1.0 - gij / kmin, 0.0);
        else
          v = gij == 0.0 ? 1.0 : 0.0;
        if (v > 0.0) entries.emplace_back(i, j, v);
      }
    }
    SparseRowMatrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    c[r] = std::move(m);
  }
  return c;
}

std::string tiles_checksum(const std::vector<Tile>& tiles) {
  std::uint64_t h = kFnvOffset;
  for (const Tile& t : tiles) {
    const std::int32_t dims[2] = {t.pixels.height(), t.pixels.width()};
    fnv_mix(h, dims, sizeof dims);
    fnv_mix(h, t.pixels.bytes().data(), t.pixels.bytes().size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_dissimilarity_cache(const std::filesystem::path& path, const DissimilarityTable& d,
                              const std::string& checksum, ColorSpace space) {
  static_assert(std::endian::native == std::endian::little, "cache writer assumes little endian");
  nlohmann::json header{{"n", d.n},
                        {"relations", {"right", "left", "up", "down"}},
                        {"dtype", "float64-le"},
                        {"checksum", checksum},
                        {"color_space", color_space_name(space)}};
  std::ofstream out(path, std::ios::binary);
  out << header.dump() << '\n';
  std::vector<double> buf(static_cast<std::size_t>(d.n) * d.n);
  for (Relation r : kAllRelations) {
    for (int i = 0; i < d.n; ++i)
      for (int j = 0; j < d.n; ++j) buf[static_cast<std::size_t>(i) * d.n + j] = d[r](i, j);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error(path.string() + ": cache write failed");
}

std::optional<DissimilarityTable> load_dissimilarity_cache(const std::filesystem::path& path,
                                                           const std::string& checksum,
                                                           ColorSpace space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("checksum", "") != checksum ||
      header.value("dtype", "") != "float64-le" ||
      header.value("color_space", "") != color_space_name(space))
    return std::nullopt;
  DissimilarityTable d;
  d.n = header.value("n", 0);
  std::vector<double> buf(static_cast<std::size_t>(d.n) * d.n);
  for (Relation r : kAllRelations) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) return std::nullopt;
    d[r].resize(d.n, d.n);
    for (int i = 0; i < d.n; ++i)
      for (int j = 0; j < d.n; ++j) d[r](i, j) = buf[static_cast<std::size_t>(i) * d.n + j];
  }
  return d;
}

}  // namespace jigsaw
