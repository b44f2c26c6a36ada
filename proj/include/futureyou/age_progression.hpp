#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "futureyou/error.hpp"
#include "futureyou/image_codec.hpp"

namespace futureyou::aging {

using image::MediaType;

inline constexpr int kMinDimension = 128;

class TooSmall : public Error {
 public:
  TooSmall(int width, int height)
      : Error("portrait is " + std::to_string(width) + "x" + std::to_string(height) + ", minimum side is " +
              std::to_string(kMinDimension) + " px") {}
};

class ProviderError : public Error {
 public:
  ProviderError(int status, const std::string& detail)
      : Error("aging provider failed (status " + std::to_string(status) + "): " + detail), status_(status) {}
  // HTTP status from the provider, 0 when no response was received.
  int status() const { return status_; }

 private:
  int status_;
};

struct Portrait {
  std::vector<std::uint8_t> image_bytes;
  MediaType media_type = MediaType::png;
  int width = 0;
  int height = 0;

  // Sniffs and decodes; throws image::DecodeError or TooSmall.
  static Portrait from_bytes(std::vector<std::uint8_t> bytes);
};

enum class Provider { external, stub };

std::string_view to_string(Provider p);

struct AgedPortrait {
  std::vector<std::uint8_t> image_bytes;
  MediaType media_type = MediaType::png;
  Provider provider = Provider::stub;
  int width = 0;
  int height = 0;
};

struct AgingConfig {
  std::string provider = "stub";  // "stub" or "external"
  std::string endpoint_url;       // external: multipart POST, field "image"
  std::chrono::milliseconds timeout{60000};
};

// Deterministic placeholder: grayscale, contrast stretched, slightly
// lightened, re-encoded as PNG at the source geometry.
AgedPortrait stub_age(const Portrait& portrait);

AgedPortrait age_progress(const Portrait& portrait, const AgingConfig& config);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Content-addressed image storage: each blob is named by the SHA-256 of
// its bytes. With an empty directory the store is memory-only.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path dir = {});

  // Returns the reference "<sha256>.<ext>"; storing the same bytes twice
  // yields the same reference.
  std::string put(std::span<const std::uint8_t> bytes, MediaType type);
  std::optional<std::vector<std::uint8_t>> get(const std::string& ref) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::uint8_t>> memory_;
};

// Reference used when aging fails and the chat proceeds without a portrait.
inline constexpr std::string_view kSilhouetteRef = "silhouette";

}  // namespace futureyou::aging
