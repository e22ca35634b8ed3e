#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vlx {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

/// 64-bit FNV-1a. Used to bucket tokens in the fixture backend's
/// bag-of-tokens embedding; stable across platforms.
std::uint64_t fnv1a64(std::string_view text) noexcept;

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace vlx
