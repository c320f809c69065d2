#include "uhpsot/image.hpp"

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include <jpeglib.h>
#include <png.h>

namespace uhpsot {

Frame::Frame(int w, int h, int c) : width(w), height(h), channels(c), pixels(std::size_t(w) * h * c, 0) {}

bool Frame::has_equal_channels() const {
  if (channels == 1) return true;
  for (std::size_t i = 0; i < pixels.size(); i += 3)
    if (pixels[i] != pixels[i + 1] || pixels[i] != pixels[i + 2]) return false;
  return true;
}

Plane Frame::gray() const {
  Plane g(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (channels == 1) {
        g(y, x) = at(x, y, 0);
      } else {
        g(y, x) = 0.299 * at(x, y, 0) + 0.587 * at(x, y, 1) + 0.114 * at(x, y, 2);
      }
    }
  return g;
}

std::vector<Plane> Frame::planes() const {
  std::vector<Plane> out(channels, Plane(height, width));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) out[c](y, x) = at(x, y, c);
  return out;
}

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw ImageError("cannot open image: " + path.string());
  return f;
}

Frame load_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int w = int(png_get_image_width(png, info));
  const int h = int(png_get_image_height(png, info));
  const int c = int(png_get_channels(png, info));
  Frame frame(w, h, c == 1 ? 1 : 3);
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < frame.channels; ++k) frame.at(x, y, k) = row[std::size_t(x) * c + k];
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return frame;
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

Frame load_jpeg(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr err{};
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = [](j_common_ptr c) { std::longjmp(reinterpret_cast<JpegErrorMgr*>(c->err)->jump, 1); };
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageError("corrupt JPEG: " + path.string());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  Frame frame(int(cinfo.output_width), int(cinfo.output_height), cinfo.output_components == 1 ? 1 : 3);
  std::vector<JSAMPLE> row(std::size_t(cinfo.output_width) * cinfo.output_components);
  while (cinfo.output_scanline < cinfo.output_height) {
    const int y = int(cinfo.output_scanline);
    JSAMPROW ptr = row.data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    std::copy(row.begin(), row.begin() + std::ptrdiff_t(frame.width) * frame.channels,
              frame.pixels.begin() + std::ptrdiff_t(y) * frame.width * frame.channels);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return frame;
}

}  // namespace

Frame load_image(const std::filesystem::path& path) {
  unsigned char sig[8] = {};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open image: " + path.string());
    in.read(reinterpret_cast<char*>(sig), sizeof(sig));
  }
  Frame f;
  if (png_sig_cmp(sig, 0, 8) == 0) {
    f = load_png(path);
  } else if (sig[0] == 0xFF && sig[1] == 0xD8) {
    f = load_jpeg(path);
  } else {
    throw ImageError("unsupported image format: " + path.string());
  }
  f.path = path.string();
  return f;
}

void save_png(const std::filesystem::path& path, const Frame& frame) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw ImageError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageError("PNG write failed: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(frame.width), png_uint_32(frame.height), 8,
               frame.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  for (int y = 0; y < frame.height; ++y) {
    auto* row = const_cast<png_bytep>(frame.pixels.data() + std::size_t(y) * frame.width * frame.channels);
    png_write_row(png, row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

double sample_bilinear(const Plane& p, double x, double y) {
  const double cx = std::clamp(x, 0.0, double(p.cols() - 1));
  const double cy = std::clamp(y, 0.0, double(p.rows() - 1));
  const int x0 = int(std::floor(cx)), y0 = int(std::floor(cy));
  const int x1 = std::min<int>(x0 + 1, int(p.cols()) - 1), y1 = std::min<int>(y0 + 1, int(p.rows()) - 1);
  const double fx = cx - x0, fy = cy - y0;
  const double top = p(y0, x0) + fx * (p(y0, x1) - p(y0, x0));
  const double bot = p(y1, x0) + fx * (p(y1, x1) - p(y1, x0));
  return top + fy * (bot - top);
}

Plane downscale(const Plane& p, double factor) {
  if (factor <= 1.0) return p;
  const int h = std::max(1, int(std::lround(p.rows() / factor)));
  const int w = std::max(1, int(std::lround(p.cols() / factor)));
  Plane out(h, w);
  const double sy = double(p.rows()) / h, sx = double(p.cols()) / w;
  for (int y = 0; y < h; ++y) {
    const int ya = int(std::floor(y * sy)), yb = std::max(ya + 1, int(std::floor((y + 1) * sy)));
    for (int x = 0; x < w; ++x) {
      const int xa = int(std::floor(x * sx)), xb = std::max(xa + 1, int(std::floor((x + 1) * sx)));
      out(y, x) = p.block(ya, xa, std::min<int>(yb, int(p.rows())) - ya, std::min<int>(xb, int(p.cols())) - xa).mean();
    }
  }
  return out;
}

}  // namespace uhpsot
