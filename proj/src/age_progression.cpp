#include "futureyou/age_progression.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "httplib.h"

namespace futureyou::aging {
namespace {

std::uint8_t age_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int luma = (77 * r + 150 * g + 29 * b + 128) >> 8;
  // 1.25x contrast around mid grey, then a lift toward white.
  int v = 128 + ((luma - 128) * 5) / 4;
  v = std::clamp(v, 0, 255);
  v = v + (255 - v) / 8;
  return static_cast<std::uint8_t>(v);
}

bool valid_ref(const std::string& ref) {
  return !ref.empty() && std::all_of(ref.begin(), ref.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || c == '.';
  }) && ref.find("..") == std::string::npos;
}

}  // namespace

std::string_view to_string(Provider p) { return p == Provider::stub ? "stub" : "external"; }

Portrait Portrait::from_bytes(std::vector<std::uint8_t> bytes) {
  auto type = image::sniff(bytes);
  if (!type) throw image::DecodeError("portrait is neither PNG nor JPEG");
  const auto decoded = image::decode(bytes, *type);
  if (std::min(decoded.width, decoded.height) < kMinDimension) throw TooSmall(decoded.width, decoded.height);
  return {std::move(bytes), *type, decoded.width, decoded.height};
}

AgedPortrait stub_age(const Portrait& portrait) {
  auto img = image::decode(portrait.image_bytes, portrait.media_type);
  for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
    const auto v = age_pixel(img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]);
    img.pixels[i] = img.pixels[i + 1] = img.pixels[i + 2] = v;
  }
  return {image::encode_png(img), MediaType::png, Provider::stub, img.width, img.height};
}

AgedPortrait age_progress(const Portrait& portrait, const AgingConfig& config) {
  if (std::min(portrait.width, portrait.height) < kMinDimension) throw TooSmall(portrait.width, portrait.height);
  if (config.provider == "stub") return stub_age(portrait);
  if (config.provider != "external") throw ProviderError(0, "unknown aging provider '" + config.provider + "'");

  const auto scheme_end = config.endpoint_url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError(0, "endpoint_url needs a scheme");
  const auto path_start = config.endpoint_url.find('/', scheme_end + 3);
  const std::string base = config.endpoint_url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : config.endpoint_url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(config.timeout);
  client.set_read_timeout(config.timeout);
  client.set_write_timeout(config.timeout);
  httplib::MultipartFormDataItems items = {
      {"image", std::string(portrait.image_bytes.begin(), portrait.image_bytes.end()),
       fmt::format("portrait.{}", image::extension(portrait.media_type)),
       std::string(image::mime_type(portrait.media_type))}};
  auto res = client.Post(path, items);
  if (!res) throw ProviderError(0, httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw ProviderError(res->status, "non-success response");

  std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
  auto type = image::sniff(bytes);
  if (!type) throw ProviderError(res->status, "response is not a PNG or JPEG image");
  image::RgbImage decoded;
  try {
    decoded = image::decode(bytes, *type);
  } catch (const image::DecodeError& e) {
    throw ProviderError(res->status, e.what());
  }
  if (static_cast<long long>(decoded.width) * portrait.height !=
      static_cast<long long>(decoded.height) * portrait.width) {
    throw ProviderError(res->status, "aged image changes the aspect ratio");
  }
  return {std::move(bytes), *type, Provider::external, decoded.width, decoded.height};
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

ImageStore::ImageStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string ImageStore::put(std::span<const std::uint8_t> bytes, MediaType type) {
  std::string ref = sha256_hex(bytes) + "." + std::string(image::extension(type));
  std::lock_guard lock(mu_);
  if (dir_.empty()) {
    memory_.try_emplace(ref, bytes.begin(), bytes.end());
    return ref;
  }
  const auto path = dir_ / ref;
  if (!std::filesystem::exists(path)) {
    const auto tmp = dir_ / (ref + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error("cannot write image " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }
  return ref;
}

std::optional<std::vector<std::uint8_t>> ImageStore::get(const std::string& ref) const {
  if (!valid_ref(ref)) return std::nullopt;
  std::lock_guard lock(mu_);
  if (dir_.empty()) {
    auto it = memory_.find(ref);
    if (it == memory_.end()) return std::nullopt;
    return it->second;
  }
  std::ifstream in(dir_ / ref, std::ios::binary);
  if (!in) return std::nullopt;
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace futureyou::aging
