#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace futureyou {

std::string_view trim(std::string_view s);

// First `count` code points of a UTF-8 string. Never splits a sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t count);

std::size_t utf8_length(std::string_view s);

// 64-bit FNV-1a; stable across platforms, used for ids and stub digests.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer; a cheap well-mixed hash of one word.
std::uint64_t splitmix64(std::uint64_t x);

std::string hex64(std::uint64_t v);

}  // namespace futureyou
