#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "pdec/grid.hpp"

namespace pdec {

// 8-bit image and mask I/O. Containers: binary PGM/PPM (P5/P6, maxval 255),
// PBM (P4) and PNG (8-bit gray or RGB). Loading maps byte/255 to [0,1];
// saving rounds and clamps, so any 8-bit round-trip is bit-exact.
//
// Mask convention: a stored pixel is black (PBM bit 1, PNG value 0).

namespace detail {

inline int pnm_next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {  // comment to end of line
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok.empty() ? EOF : 0;
}

inline long pnm_int(std::istream& in, const std::string& path) {
  std::string tok;
  if (pnm_next_token(in, tok) == EOF) throw io_error(path + ": truncated PNM header");
  try {
    return std::stol(tok);
  } catch (...) {
    throw io_error(path + ": bad PNM header token '" + tok + "'");
  }
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

inline std::vector<std::uint8_t> png_read_bytes(const std::string& path, int& w, int& h,
                                                int& channels) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw io_error(path + ": cannot open for reading");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8))
    throw io_error(path + ": not a PNG file");
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw io_error(path + ": libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw io_error(path + ": libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw io_error(path + ": PNG decode error");
  png_init_io(ctx.png, ctx.fp);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  if (bit_depth != 8)
    throw io_error(path + ": unsupported bit depth " + std::to_string(bit_depth) +
                   " (only 8-bit images are handled)");
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB)
    throw io_error(path + ": unsupported PNG color type " + std::to_string(color_type) +
                   " (only 8-bit grayscale or RGB, no alpha/palette)");
  w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  channels = (color_type == PNG_COLOR_TYPE_GRAY) ? 1 : 3;

  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * channels);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = data.data() + static_cast<std::size_t>(y) * w * channels;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);
  return data;
}

inline void png_write_bytes(const std::string& path, const std::vector<std::uint8_t>& data, int w,
                            int h, int channels) {
  PngWriteCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) throw io_error(path + ": cannot open for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw io_error(path + ": libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw io_error(path + ": libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw io_error(path + ": PNG encode error");
  png_init_io(ctx.png, ctx.fp);
  png_set_IHDR(ctx.png, ctx.info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * w * channels);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

inline bool has_suffix(const std::string& s, const char* suf) {
  const std::size_t n = std::strlen(suf);
  return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
}

inline std::uint8_t to_byte(double v) {
  const double scaled = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

}  // namespace detail

// Returns 1 channel (gray) or 3 channels (RGB).
inline std::vector<ImageGrid> load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path + ": cannot open for reading");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in) throw io_error(path + ": empty or unreadable file");

  int w = 0, h = 0, channels = 0;
  std::vector<std::uint8_t> bytes;
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    channels = (magic[1] == '5') ? 1 : 3;
    w = static_cast<int>(detail::pnm_int(in, path));
    h = static_cast<int>(detail::pnm_int(in, path));
    const long maxval = detail::pnm_int(in, path);
    if (maxval != 255)
      throw io_error(path + ": unsupported PNM maxval " + std::to_string(maxval) +
                     " (only 8-bit images are handled)");
    if (w <= 0 || h <= 0) throw io_error(path + ": bad PNM dimensions");
    bytes.resize(static_cast<std::size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
      throw io_error(path + ": truncated PNM pixel data");
  } else {
    in.close();
    bytes = detail::png_read_bytes(path, w, h, channels);
  }

  std::vector<ImageGrid> out(channels, ImageGrid(w, h));
  for (int c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i)
      out[c].values[i] = bytes[i * channels + c] / 255.0;
  return out;
}

inline void save_image(const std::vector<ImageGrid>& channels, const std::string& path) {
  if (channels.size() != 1 && channels.size() != 3)
    throw std::invalid_argument("save_image: expected 1 or 3 channels");
  const int w = channels[0].width, h = channels[0].height;
  for (const auto& ch : channels)
    if (ch.width != w || ch.height != h)
      throw std::invalid_argument("save_image: channel dimension mismatch");
  const int nc = static_cast<int>(channels.size());

  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * nc);
  for (int c = 0; c < nc; ++c)
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i)
      bytes[i * nc + c] = detail::to_byte(channels[c].values[i]);

  if (detail::has_suffix(path, ".png")) {
    detail::png_write_bytes(path, bytes, w, h, nc);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path + ": cannot open for writing");
  out << (nc == 1 ? "P5\n" : "P6\n") << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error(path + ": write failed");
}

inline void save_image(const ImageGrid& img, const std::string& path) {
  save_image(std::vector<ImageGrid>{img}, path);
}

inline void save_mask(const Mask& mask, const std::string& path) {
  const int w = mask.width, h = mask.height;
  if (detail::has_suffix(path, ".png")) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.bits[i] ? 0 : 255;
    detail::png_write_bytes(path, bytes, w, h, 1);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path + ": cannot open for writing");
  out << "P4\n" << w << " " << h << "\n";
  const int row_bytes = (w + 7) / 8;
  std::vector<std::uint8_t> row(row_bytes);
  for (int y = 0; y < h; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < w; ++x)
      if (mask.at(x, y)) row[x >> 3] |= static_cast<std::uint8_t>(0x80 >> (x & 7));
    out.write(reinterpret_cast<const char*>(row.data()), row_bytes);
  }
  if (!out) throw io_error(path + ": write failed");
}

inline Mask load_mask(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path + ": cannot open for reading");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in) throw io_error(path + ": empty or unreadable file");

  if (magic[0] == 'P' && magic[1] == '4') {
    const int w = static_cast<int>(detail::pnm_int(in, path));
    const int h = static_cast<int>(detail::pnm_int(in, path));
    if (w <= 0 || h <= 0) throw io_error(path + ": bad PBM dimensions");
    in.get();  // single whitespace after header
    Mask mask(w, h);
    const int row_bytes = (w + 7) / 8;
    std::vector<std::uint8_t> row(row_bytes);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), row_bytes);
      if (!in) throw io_error(path + ": truncated PBM pixel data");
      for (int x = 0; x < w; ++x)
        mask.set(x, y, (row[x >> 3] >> (7 - (x & 7))) & 1);
    }
    return mask;
  }

  in.close();
  int w = 0, h = 0, channels = 0;
  auto bytes = detail::png_read_bytes(path, w, h, channels);
  if (channels != 1) throw io_error(path + ": mask PNG must be grayscale");
  Mask mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == 0)
      mask.bits[i] = 1;
    else if (bytes[i] == 255)
      mask.bits[i] = 0;
    else
      throw io_error(path + ": mask PNG must contain only 0/255 values");
  }
  return mask;
}

}  // namespace pdec
