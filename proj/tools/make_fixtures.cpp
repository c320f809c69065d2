// Generates the small synthetic sequences used by the end-to-end tests:
//   static     still camera, still object
//   moving     textured square at constant velocity over a panning background
//   occlusion  still object hidden by an opaque block for 10 frames
// Output follows the OTB layout (img/0001.png, groundtruth_rect.txt, 1-based).

#include <fstream>
#include <iostream>
#include <random>

#include "uhpsot/image.hpp"

namespace fs = std::filesystem;
using uhpsot::Frame;

namespace {

using Rgb = std::array<std::uint8_t, 3>;

// Only raw engine output is used so the pixels do not depend on the standard
// library's distribution implementations.
struct Rng {
  std::mt19937 engine;
  explicit Rng(std::uint32_t seed) : engine(seed) {}
  int uniform(int lo, int hi) { return lo + int(engine() % std::uint32_t(hi - lo + 1)); }
};

Frame blank(int w, int h, Rgb c) {
  Frame f(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k) f.at(x, y, k) = c[k];
  return f;
}

void fill(Frame& f, int x0, int y0, int w, int h, Rgb c) {
  for (int y = std::max(0, y0); y < std::min(f.height, y0 + h); ++y)
    for (int x = std::max(0, x0); x < std::min(f.width, x0 + w); ++x)
      for (int k = 0; k < 3; ++k) f.at(x, y, k) = c[k];
}

// Muted clutter of random rectangles.
Frame background(int w, int h, std::uint32_t seed) {
  Rng rng(seed);
  Frame f = blank(w, h, {110, 115, 105});
  for (int i = 0; i < w * h / 180; ++i) {
    const int v = rng.uniform(60, 170);
    fill(f, rng.uniform(-8, w), rng.uniform(-8, h), rng.uniform(4, 18), rng.uniform(4, 18),
         {std::uint8_t(v + rng.uniform(-15, 15)), std::uint8_t(v + rng.uniform(-15, 15)), std::uint8_t(v + rng.uniform(-15, 15))});
  }
  return f;
}

// Saturated 4x4-block checker so the target stands out in color and texture.
Frame target(int size, std::uint32_t seed) {
  Rng rng(seed);
  Frame f(size, size, 3);
  const Rgb palette[4] = {{220, 40, 30}, {250, 210, 20}, {30, 60, 200}, {240, 240, 240}};
  for (int by = 0; by < size; by += 4)
    for (int bx = 0; bx < size; bx += 4) fill(f, bx, by, 4, 4, palette[rng.uniform(0, 3)]);
  return f;
}

void paste(Frame& dst, const Frame& src, int x0, int y0) {
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      const int X = x0 + x, Y = y0 + y;
      if (X < 0 || Y < 0 || X >= dst.width || Y >= dst.height) continue;
      for (int k = 0; k < 3; ++k) dst.at(X, Y, k) = src.at(x, y, k);
    }
}

Frame crop(const Frame& src, int x0, int y0, int w, int h) {
  Frame f(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k) f.at(x, y, k) = src.at(x0 + x, y0 + y, k);
  return f;
}

struct Writer {
  fs::path root;
  std::ofstream gt;
  int n = 0;
  explicit Writer(fs::path dir) : root(std::move(dir)) {
    fs::create_directories(root / "img");
    gt.open(root / "groundtruth_rect.txt");
  }
  void add(const Frame& f, int x, int y, int w, int h) {
    char name[16];
    std::snprintf(name, sizeof name, "%04d.png", ++n);
    uhpsot::save_png(root / "img" / name, f);
    gt << x + 1 << ',' << y + 1 << ',' << w << ',' << h << '\n';
  }
};

constexpr int W = 160, H = 120;

void make_static(const fs::path& root) {
  Writer out(root / "static");
  Frame f = background(W, H, 11);
  paste(f, target(28, 12), 66, 46);
  for (int t = 0; t < 20; ++t) out.add(f, 66, 46, 28, 28);
}

void make_moving(const fs::path& root) {
  Writer out(root / "moving");
  const Frame world = background(W + 80, H + 40, 21);
  const Frame obj = target(24, 22);
  for (int t = 0; t < 40; ++t) {
    // Camera pans right and down one pixel per frame; the object moves
    // (+2, +1) pixels per frame in image coordinates.
    Frame f = crop(world, t, t / 2, W, H);
    const int x = 24 + 2 * t, y = 30 + t;
    paste(f, obj, x, y);
    out.add(f, x, y, 24, 24);
  }
}

void make_occlusion(const fs::path& root) {
  Writer out(root / "occlusion");
  std::ofstream occ(root / "occlusion" / "full_occlusion.txt");
  const Frame bg = background(W, H, 31);
  const Frame obj = target(28, 32);
  for (int t = 0; t < 40; ++t) {
    Frame f = bg;
    paste(f, obj, 66, 46);
    const bool hidden = t >= 15 && t < 25;
    if (hidden) fill(f, 58, 38, 44, 44, {70, 140, 70});
    out.add(f, 66, 46, 28, 28);
    occ << (t ? "," : "") << int(hidden);
  }
  occ << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <output-dir>\n";
    return 2;
  }
  try {
    const fs::path root = argv[1];
    make_static(root);
    make_moving(root);
    make_occlusion(root);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
