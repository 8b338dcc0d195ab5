#include "webscraper/png.hpp"

#include <zlib.h>

#include <cstring>

#include "webscraper/errors.hpp"

namespace webscraper::png {

namespace {

void append_u32(std::string& out, uint32_t v) {
  out += static_cast<char>((v >> 24) & 0xFF);
  out += static_cast<char>((v >> 16) & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
  out += static_cast<char>(v & 0xFF);
}

void append_chunk(std::string& out, const char type[4],
                  const std::string& data) {
  append_u32(out, static_cast<uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(body.data()),
              static_cast<uInt>(body.size()));
  append_u32(out, crc);
}

std::string zlib_compress(const std::string& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string out(bound, '\0');
  int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                     reinterpret_cast<const Bytef*>(raw.data()),
                     static_cast<uLong>(raw.size()), 9);
  if (rc != Z_OK) throw Error("zlib compression failed");
  out.resize(bound);
  return out;
}

}  // namespace

std::string encode_rgb(int width, int height, const std::string& rgb) {
  if (width <= 0 || height <= 0)
    throw ValidationError("image dimensions must be positive");
  if (rgb.size() != static_cast<size_t>(width) * height * 3)
    throw ValidationError("pixel buffer size does not match dimensions");

  std::string out("\x89PNG\r\n\x1a\n", 8);

  std::string ihdr;
  append_u32(ihdr, static_cast<uint32_t>(width));
  append_u32(ihdr, static_cast<uint32_t>(height));
  ihdr += static_cast<char>(8);   // bit depth
  ihdr += static_cast<char>(2);   // color type: truecolor
  ihdr += static_cast<char>(0);   // compression
  ihdr += static_cast<char>(0);   // filter
  ihdr += static_cast<char>(0);   // interlace
  append_chunk(out, "IHDR", ihdr);

  std::string raw;
  raw.reserve(static_cast<size_t>(height) * (1 + width * 3));
  for (int y = 0; y < height; ++y) {
    raw += '\0';  // filter: none
    raw.append(rgb, static_cast<size_t>(y) * width * 3,
               static_cast<size_t>(width) * 3);
  }
  append_chunk(out, "IDAT", zlib_compress(raw));
  append_chunk(out, "IEND", "");
  return out;
}

std::string placeholder_screenshot(const std::string& seed_text, int width,
                                   int height) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : seed_text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::string rgb(static_cast<size_t>(width) * height * 3, '\0');
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      size_t at = (static_cast<size_t>(y) * width + x) * 3;
      rgb[at + 0] = static_cast<char>((x * 7 + (h & 0xFF)) & 0xFF);
      rgb[at + 1] = static_cast<char>((y * 5 + ((h >> 8) & 0xFF)) & 0xFF);
      rgb[at + 2] = static_cast<char>(((x ^ y) + ((h >> 16) & 0xFF)) & 0xFF);
    }
  return encode_rgb(width, height, rgb);
}

}  // namespace webscraper::png
