#include "dels/image_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace dels {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const std::filesystem::path& path, const char* mode) {
  FilePtr file(std::fopen(path.string().c_str(), mode));
  if (!file) {
    throw IoError("cannot open " + path.string());
  }
  return file;
}

// Decoded PNG as 8/16-bit samples normalized to [0, 1].
struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 gray, 3 rgb (alpha dropped)
  std::vector<double> samples;
};

DecodedPng DecodePng(const std::filesystem::path& path) {
  FilePtr file = OpenFile(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw IoError("not a PNG file: " + path.string());
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  DecodedPng decoded;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (bit_depth == 16) png_set_swap(png);  // native little-endian words
  png_read_update_info(png, info);

  decoded.width = static_cast<int>(png_get_image_width(png, info));
  decoded.height = static_cast<int>(png_get_image_height(png, info));
  decoded.channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * decoded.height);
  rows.resize(decoded.height);
  for (int y = 0; y < decoded.height; ++y) {
    rows[y] = buffer.data() + row_bytes * y;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (decoded.channels != 1 && decoded.channels != 3) {
    throw IoError("unsupported PNG channel layout: " + path.string());
  }
  const std::size_t count =
      static_cast<std::size_t>(decoded.width) * decoded.height * decoded.channels;
  decoded.samples.resize(count);
  if (depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      decoded.samples[i] = v / 65535.0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      decoded.samples[i] = buffer[i] / 255.0;
    }
  }
  return decoded;
}

}  // namespace

Raster ReadPngGray(const std::filesystem::path& path) {
  const DecodedPng png = DecodePng(path);
  Raster out(png.width, png.height, 1);
  auto data = out.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (png.channels == 1) {
      data[i] = png.samples[i];
    } else {
      data[i] = 0.299 * png.samples[3 * i] + 0.587 * png.samples[3 * i + 1] +
                0.114 * png.samples[3 * i + 2];
    }
  }
  return out;
}

Raster ReadPngColor(const std::filesystem::path& path) {
  const DecodedPng png = DecodePng(path);
  Raster out(png.width, png.height, 3);
  auto data = out.data();
  const std::size_t pixels = data.size() / 3;
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < 3; ++c) {
      data[3 * i + c] = png.channels == 1 ? png.samples[i]
                                          : png.samples[3 * i + c];
    }
  }
  return out;
}

void WritePngGray(const std::filesystem::path& path, const Raster& raster,
                  int bit_depth) {
  DELS_CHECK(raster.channels() == 1, DimensionMismatch,
             "WritePngGray expects one channel");
  DELS_CHECK(bit_depth == 8 || bit_depth == 16, IoError,
             "PNG bit depth must be 8 or 16");
  FilePtr file = OpenFile(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  const int w = raster.width();
  const int h = raster.height();
  const int bytes = bit_depth / 8;
  std::vector<png_byte> buffer(static_cast<std::size_t>(w) * h * bytes);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = std::clamp(raster.at(x, y), 0.0, 1.0);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (bit_depth == 16) {
        const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        buffer[2 * i] = static_cast<png_byte>(q >> 8);
        buffer[2 * i + 1] = static_cast<png_byte>(q & 0xff);
      } else {
        buffer[i] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) {
    rows[y] = buffer.data() + static_cast<std::size_t>(y) * w * bytes;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, w, h, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster ReadPfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || (magic != "Pf" && magic != "PF") || width <= 0 || height <= 0 ||
      scale == 0.0) {
    throw IoError("malformed PFM header: " + path.string());
  }
  in.get();  // single whitespace byte before the payload
  const int channels = magic == "PF" ? 3 : 1;
  const bool little_endian = scale < 0.0;
  const std::size_t count =
      static_cast<std::size_t>(width) * height * channels;
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(count * sizeof(std::uint32_t)));
  if (!in) throw IoError("truncated PFM payload: " + path.string());
  const bool swap = little_endian != (std::endian::native == std::endian::little);
  Raster out(width, height, channels);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        std::uint32_t word =
            words[(static_cast<std::size_t>(row) * width + x) * channels + c];
        if (swap) word = __builtin_bswap32(word);
        out.at(x, y, c) = std::bit_cast<float>(word);
      }
    }
  }
  return out;
}

void WritePfm(const std::filesystem::path& path, const Raster& raster) {
  DELS_CHECK(raster.channels() == 1 || raster.channels() == 3,
             DimensionMismatch, "PFM holds one or three channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  out << (raster.channels() == 3 ? "PF" : "Pf") << '\n'
      << raster.width() << ' ' << raster.height() << '\n'
      << "-1.0\n";
  std::vector<std::uint32_t> words;
  words.reserve(static_cast<std::size_t>(raster.width()) * raster.height() *
                raster.channels());
  for (int row = 0; row < raster.height(); ++row) {
    const int y = raster.height() - 1 - row;
    for (int x = 0; x < raster.width(); ++x) {
      for (int c = 0; c < raster.channels(); ++c) {
        std::uint32_t word =
            std::bit_cast<std::uint32_t>(static_cast<float>(raster.at(x, y, c)));
        if constexpr (std::endian::native == std::endian::big) {
          word = __builtin_bswap32(word);
        }
        words.push_back(word);
      }
    }
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("failed writing " + path.string());
}

CameraFile ReadCameraFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CameraFile cam;
  in >> cam.intrinsics.fx >> cam.intrinsics.fy >> cam.intrinsics.cx >>
      cam.intrinsics.cy;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) in >> cam.pose.rotation(r, c);
  }
  for (int r = 0; r < 3; ++r) in >> cam.pose.translation(r);
  if (!in) throw IoError("malformed camera file: " + path.string());
  if (!cam.intrinsics.IsValid()) {
    throw IoError("invalid intrinsics in " + path.string());
  }
  return cam;
}

void WriteCameraFile(const std::filesystem::path& path,
                     const CameraFile& camera) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const Intrinsics& k = camera.intrinsics;
  out << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << '\n';
  for (int r = 0; r < 3; ++r) {
    out << camera.pose.rotation(r, 0) << ' ' << camera.pose.rotation(r, 1)
        << ' ' << camera.pose.rotation(r, 2) << '\n';
  }
  out << camera.pose.translation(0) << ' ' << camera.pose.translation(1) << ' '
      << camera.pose.translation(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<double, double> ReadDepthRange(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  double min_depth = 0.0;
  double max_depth = 0.0;
  in >> min_depth >> max_depth;
  if (!in || !(min_depth > 0.0) || !(max_depth > min_depth)) {
    throw IoError("malformed depth range: " + path.string());
  }
  return {min_depth, max_depth};
}

void WriteDepthRange(const std::filesystem::path& path, double min_depth,
                     double max_depth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10)
      << min_depth << ' ' << max_depth << '\n';
}

}  // namespace dels
