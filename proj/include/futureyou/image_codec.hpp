#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"

namespace futureyou::image {

enum class MediaType { png, jpeg };

std::string_view to_string(MediaType t);
std::string_view mime_type(MediaType t);
std::string_view extension(MediaType t);

// Interleaved 8-bit RGB, row-major, no padding.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Identifies PNG/JPEG by signature bytes.
std::optional<MediaType> sniff(std::span<const std::uint8_t> bytes);

RgbImage decode(std::span<const std::uint8_t> bytes, MediaType type);
RgbImage decode(std::span<const std::uint8_t> bytes);  // sniffs first

std::vector<std::uint8_t> encode_png(const RgbImage& img);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality = 90);

}  // namespace futureyou::image
