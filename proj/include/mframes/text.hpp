#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mframes::text {

/// Lowercases ASCII and collapses runs of whitespace to single spaces,
/// trimming the ends.
std::string fold(std::string_view s);

/// Whitespace+punctuation token count; the prompt budget estimator.
std::size_t token_estimate(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms; used for cache keys and
/// content hashes, not for security.
std::uint64_t fnv1a(std::string_view s);

/// fnv1a rendered as 16 lowercase hex digits.
std::string digest_hex(std::string_view s);

}  // namespace mframes::text
