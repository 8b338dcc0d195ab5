#pragma once

#include <cstdint>
#include <string>

namespace webscraper::png {

// Encodes 8-bit RGB pixels (row-major, 3 bytes per pixel) as a PNG.
// Output is deterministic for fixed input. Throws ValidationError on
// size mismatch.
std::string encode_rgb(int width, int height, const std::string& rgb);

// Deterministic placeholder screenshot: a small gradient pattern seeded
// by the string, so equal page states yield byte-equal images.
std::string placeholder_screenshot(const std::string& seed_text,
                                   int width = 256, int height = 192);

}  // namespace webscraper::png
