#include "jigsaw/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "jigsaw/image_io.hpp"
#include "jigsaw/rng.hpp"

namespace jigsaw {
namespace {

using Plane = std::vector<double>;

struct Canvas {
  int h, w;
  std::array<Plane, 3> ch;
  Canvas(int height, int width) : h(height), w(width) {
    for (auto& p : ch) p.assign(static_cast<std::size_t>(h) * w, 0.0);
  }
  double& at(int c, int y, int x) { return ch[c][static_cast<std::size_t>(y) * w + x]; }
};

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

// Lattice value noise with cell size `cell`, values in [-1, 1].
Plane value_noise(int h, int w, double cell, Rng& rng) {
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
  for (auto& v : lattice) v = rng.uniform(-1.0, 1.0);
  const double oy = rng.uniform01() * cell;
  const double ox = rng.uniform01() * cell;
  Plane out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    const double fy = (y + oy) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = smooth(fy - y0);
    for (int x = 0; x < w; ++x) {
      const double fx = (x + ox) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = smooth(fx - x0);
      auto L = [&](int yy, int xx) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
      const double top = L(y0, x0) * (1 - tx) + L(y0, x0 + 1) * tx;
      const double bot = L(y0 + 1, x0) * (1 - tx) + L(y0 + 1, x0 + 1) * tx;
      out[static_cast<std::size_t>(y) * w + x] = top * (1 - ty) + bot * ty;
    }
  }
  return out;
}

std::array<double, 3> random_color(Rng& rng) {
  return {rng.uniform(20, 235), rng.uniform(20, 235), rng.uniform(20, 235)};
}

void paint_gradient(Canvas& cv, Rng& rng) {
  const auto a = random_color(rng);
  const auto b = random_color(rng);
  const double angle = rng.uniform(0, 2 * std::numbers::pi);
  const double ux = std::cos(angle), uy = std::sin(angle);
  const double span = std::abs(ux) * cv.w + std::abs(uy) * cv.h;
  const double base = std::min(0.0, ux * cv.w) + std::min(0.0, uy * cv.h);
  for (int y = 0; y < cv.h; ++y)
    for (int x = 0; x < cv.w; ++x) {
      const double t = (ux * x + uy * y - base) / span;
      for (int c = 0; c < 3; ++c) cv.at(c, y, x) = a[c] * (1 - t) + b[c] * t;
    }
}

// Fractal noise with a roughly 1/f amplitude spectrum.
void add_fractal_noise(Canvas& cv, Rng& rng, double amplitude, double min_cell = 3.0) {
  const double largest = std::max(cv.h, cv.w) / 2.0;
  for (int c = -1; c < 3; ++c) {
    // c == -1 is a luminance layer shared by all channels.
    const double amp = c < 0 ? amplitude : amplitude * 0.45;
    for (double cell = largest; cell >= min_cell; cell /= 2.0) {
      const Plane n = value_noise(cv.h, cv.w, cell, rng);
      const double a = amp * std::pow(cell / largest, 0.75);
      for (int k = 0; k < 3; ++k) {
        if (c >= 0 && k != c) continue;
        for (std::size_t p = 0; p < n.size(); ++p) cv.ch[k][p] += a * n[p];
      }
    }
  }
}

void paint_shapes(Canvas& cv, Rng& rng, int count) {
  const double scale = std::min(cv.h, cv.w);
  for (int s = 0; s < count; ++s) {
    const auto color = random_color(rng);
    const double opacity = rng.uniform(0.55, 1.0);
    const double cy = rng.uniform(0, cv.h), cx = rng.uniform(0, cv.w);
    const double ry = rng.uniform(0.04, 0.3) * scale, rx = rng.uniform(0.04, 0.3) * scale;
    const double angle = rng.uniform(0, std::numbers::pi);
    const bool ellipse = rng.uniform01() < 0.5;
    // Shading across the shape keeps its interior from being flat.
    const double shade = rng.uniform(-0.35, 0.35);
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (int y = 0; y < cv.h; ++y) {
      for (int x = 0; x < cv.w; ++x) {
        const double dy = y - cy, dx = x - cx;
        const double u = (ca * dx + sa * dy) / rx;
        const double v = (-sa * dx + ca * dy) / ry;
        // Approximate signed distance to the boundary in pixels.
        double dist;
        if (ellipse)
          dist = (std::sqrt(u * u + v * v) - 1.0) * std::min(rx, ry);
        else
          dist = std::max((std::abs(u) - 1.0) * rx, (std::abs(v) - 1.0) * ry);
        const double cover = std::clamp(0.5 - dist, 0.0, 1.0) * opacity;
        if (cover <= 0.0) continue;
        const double tint = 1.0 + shade * std::clamp(u, -1.0, 1.0);
        for (int c = 0; c < 3; ++c)
          cv.at(c, y, x) = cv.at(c, y, x) * (1 - cover) + std::clamp(color[c] * tint, 0.0, 255.0) * cover;
      }
    }
  }
}

}  // namespace

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "smooth") return SynthKind::Smooth;
  if (name == "textured") return SynthKind::Textured;
  throw DomainError("unknown synthetic kind '" + name + "'");
}

Image synthesize_image(int height, int width, SynthKind kind, std::uint64_t seed) {
  if (height < 1 || width < 1) throw DomainError("image dimensions must be positive");
  Rng rng(seed);
  Canvas cv(height, width);
  paint_gradient(cv, rng);
  if (kind == SynthKind::Textured) {
    add_fractal_noise(cv, rng, rng.uniform(25.0, 45.0));
    paint_shapes(cv, rng, 4 + static_cast<int>(rng.uniform_below(9)));
    add_fractal_noise(cv, rng, rng.uniform(4.0, 10.0));
  } else {
    add_fractal_noise(cv, rng, 20.0, std::max(height, width) / 4.0);
  }
  Image out(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = cv.at(c, y, x);
        if (kind == SynthKind::Textured) v += rng.uniform(-1.5, 1.5);
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  return out;
}

std::vector<std::filesystem::path> write_synthetic_dataset(const std::filesystem::path& dir,
                                                           int count, int height, int width,
                                                           SynthKind kind, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  Rng seeds(seed);
  for (int k = 0; k < count; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%04d.png", k);
    const auto path = dir / name;
    write_png(path, synthesize_image(height, width, kind, seeds.next_u64()));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace jigsaw
