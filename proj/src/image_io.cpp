#include "lrt/dataset.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace lrt {

namespace {

[[noreturn]] void fail(const std::filesystem::path& file, const char* what) {
  throw std::runtime_error("image '" + file.string() + "': " + what);
}

// Skips whitespace and '#' comment lines, then reads one ASCII token.
std::string next_pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
      }
      if (c == '#') in.unget();
      break;
    }
  }
  return tok;
}

struct PngReader {
  std::FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace

Image read_pgm(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(file, "cannot open");

  const std::string magic = next_pnm_token(in);
  if (magic != "P2" && magic != "P5") fail(file, "not a PGM (expected P2/P5)");
  const int width = std::stoi(next_pnm_token(in));
  const int height = std::stoi(next_pnm_token(in));
  const long maxval = std::stol(next_pnm_token(in));
  if (width <= 0 || height <= 0) fail(file, "bad dimensions");
  if (maxval <= 0 || maxval > 65535) fail(file, "bad maxval");

  Image img{width, height, std::vector<double>(
                               static_cast<size_t>(width) * height)};
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P2") {
    for (auto& p : img.pixels) {
      const std::string tok = next_pnm_token(in);
      if (tok.empty()) fail(file, "truncated ASCII data");
      p = std::stol(tok) * scale;
    }
  } else {
    // P5: one whitespace byte after maxval, then raw samples
    // (big-endian 2-byte when maxval > 255).
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(img.pixels.size() * bytes);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      fail(file, "truncated binary data");
    }
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      const long v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
      img.pixels[i] = v * scale;
    }
  }
  return img;
}

Image read_png(const std::filesystem::path& file) {
  PngReader r;
  Image img;
  std::vector<unsigned char> data;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;

  r.fp = std::fopen(file.string().c_str(), "rb");
  if (!r.fp) fail(file, "cannot open");
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
  if (!r.png) fail(file, "libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) fail(file, "libpng init failed");

  if (setjmp(png_jmpbuf(r.png))) fail(file, "corrupt PNG");

  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);

  // Normalize every variant to 8-bit gray or RGB.
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  png_set_packing(r.png);
  const int color = png_get_color_type(r.png, r.info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
  if (color == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(r.png, r.info) < 8) {
    png_set_expand_gray_1_2_4_to_8(r.png);
  }
  png_read_update_info(r.png, r.info);

  width = png_get_image_width(r.png, r.info);
  height = png_get_image_height(r.png, r.info);
  channels = static_cast<int>(png_get_channels(r.png, r.info));
  if (width == 0 || height == 0) fail(file, "bad dimensions");
  if (channels != 1 && channels != 3) fail(file, "unsupported channel count");

  data.resize(static_cast<size_t>(width) * height * channels);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = data.data() + static_cast<size_t>(y) * width * channels;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  img.width = static_cast<int>(width);
  img.height = static_cast<int>(height);
  img.pixels.resize(static_cast<size_t>(width) * height);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    if (channels == 1) {
      img.pixels[i] = data[i] / 255.0;
    } else {
      const double luma = 0.299 * data[3 * i] + 0.587 * data[3 * i + 1] +
                          0.114 * data[3 * i + 2];
      img.pixels[i] = luma / 255.0;
    }
  }
  return img;
}

Image read_image(const std::filesystem::path& file) {
  std::ifstream probe(file, std::ios::binary);
  if (!probe) fail(file, "cannot open");
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    return read_pgm(file);
  }
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') {
    return read_png(file);
  }
  fail(file, "unknown format (PGM/PNG supported)");
}

Image resize_bilinear(const Image& src, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("resize_bilinear: target size must be positive");
  }
  if (src.width <= 0 || src.height <= 0 || src.pixels.empty()) {
    throw std::invalid_argument("resize_bilinear: empty source");
  }
  Image out{width, height,
            std::vector<double>(static_cast<size_t>(width) * height)};
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  auto clampi = [](long v, long hi) {
    return static_cast<int>(std::clamp(v, 0L, hi));
  };
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(fy));
    const double dy = fy - y0;
    const int y0c = clampi(y0, src.height - 1);
    const int y1c = clampi(y0 + 1, src.height - 1);
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const long x0 = static_cast<long>(std::floor(fx));
      const double dx = fx - x0;
      const int x0c = clampi(x0, src.width - 1);
      const int x1c = clampi(x0 + 1, src.width - 1);
      const double top = (1 - dx) * src.at(x0c, y0c) + dx * src.at(x1c, y0c);
      const double bot = (1 - dx) * src.at(x0c, y1c) + dx * src.at(x1c, y1c);
      out.at(x, y) = (1 - dy) * top + dy * bot;
    }
  }
  return out;
}

Vector image_to_column(const Image& img) {
  Vector col(static_cast<Index>(img.pixels.size()));
  for (int x = 0; x < img.width; ++x) {
    for (int y = 0; y < img.height; ++y) {
      col(static_cast<Index>(x) * img.height + y) = img.at(x, y);
    }
  }
  return col;
}

Vector flip_horizontal(const Vector& column, int width, int height) {
  if (width <= 0 || height <= 0 ||
      column.size() != static_cast<Index>(width) * height) {
    throw std::invalid_argument(
        "flip_horizontal: column length must equal width*height");
  }
  Vector out(column.size());
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      out(static_cast<Index>(width - 1 - x) * height + y) =
          column(static_cast<Index>(x) * height + y);
    }
  }
  return out;
}

}  // namespace lrt
